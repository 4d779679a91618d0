# contour integral K
STEEPEST_DESCENT = "steepest_descent"
VERTICAL_LINE = "vertical_line"
LAPLACE = "laplace"
K_METHODS = (STEEPEST_DESCENT, VERTICAL_LINE, LAPLACE)

# experiments
LOW_TEMP = "low_temp"
HIGH_TEMP = "high_temp"
LSS = "lss"
RIGIDITY = "rigidity"
LOCAL_LAW = "local_law"
EXTREME_EIG = "extreme_eig"
LAPLACE_ERROR = "laplace_error"
FREE_ENERGY_LIMIT = "free_energy_limit"
EXPERIMENTS = (LOW_TEMP, HIGH_TEMP, LSS, RIGIDITY, LOCAL_LAW, EXTREME_EIG, LAPLACE_ERROR, FREE_ENERGY_LIMIT)

# free energy phases
LOW_TEMPERATURE = "low temperature"
HIGH_TEMPERATURE = "high temperature"

# criterion status
PASSED = "Passed"
FAILED = "Failed"
REPORTED = "Reported"

# support edges
CLOSED_FORM = "closed form"
BISECTION = "bisection"
