from .saddle import R_derivative, R_eval, saddle_gamma, steepest_curve
from .contour import SaddleData, contour_K, free_energy, laplace_error, saddle_data
from .weibull import weibull_cdf, weibull_cdf_lower
