from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.special import betaincinv, betaln, roots_jacobi

from ..core import lab
from ..errors import DivergentIntegral, NonFinite, NonPositiveWeight, NotCentered
from ..logger import LOGGER
from .base import Measure

CENTERING_TOL = 1e-8
NORMALIZATION_TOL = 1e-10
# the Gauss rule is trusted on a Cauchy kernel once radius^(-2n) drops below this
GAUSS_CAUCHY_TOL = 1e-15
POSITIVITY_GRID = 4097
KERNEL_CHUNK = 2048

WeightSpec = Union[None, float, Sequence[float], np.ndarray, Polynomial, Callable, dict]


@lru_cache(maxsize=64)
def gauss_jacobi(order: int, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi nodes and weights for the weight (1+x)^a (1-x)^b on [-1, 1].

    The rule comes from scipy's Golub-Welsch implementation, which uses the
    (1-x)^alpha (1+x)^beta convention, hence the swapped exponents. The
    returned arrays are cached and read-only.
    """
    if order < 1:
        raise ValueError(f"Quadrature order must be positive, got {order}.")
    if a <= -1 or b <= -1:
        raise DivergentIntegral(f"Jacobi exponents must exceed -1, got a={a}, b={b}.")
    nodes, weights = roots_jacobi(int(order), float(b), float(a))
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


class _ReflectedFunction:
    def __init__(self, function: Callable) -> None:
        self._function = function

    def __call__(self, x):
        return self._function(-np.asarray(x))


class Weight:
    """The positive factor d(x) of a Jacobi measure.

    Accepted specs are None (d ≡ 1), a scalar, polynomial coefficients in
    increasing degree (list, array, numpy Polynomial or {"poly": [...]}),
    a table {"table": {"x": [...], "y": [...]}} interpolated by PCHIP, or a
    plain callable.
    """

    def __init__(self, d: WeightSpec = None) -> None:
        self._coefficients: Optional[np.ndarray] = None
        self._table: Optional[Tuple[np.ndarray, np.ndarray]] = None
        self._function: Callable
        if isinstance(d, dict):
            if "poly" in d:
                self._set_polynomial(d["poly"])
            elif "table" in d:
                self._set_table(d["table"]["x"], d["table"]["y"])
            else:
                raise ValueError(f"Unknown weight spec keys {sorted(d)}, expected 'poly' or 'table'.")
        elif d is None:
            self._set_polynomial([1.0])
        elif isinstance(d, Polynomial):
            self._set_polynomial(d.coef)
        elif callable(d):
            self._function = d
        elif np.isscalar(d):
            self._set_polynomial([float(d)])
        else:
            self._set_polynomial(d)

    def _set_polynomial(self, coefficients) -> None:
        coefficients = np.atleast_1d(np.asarray(coefficients, dtype=float))
        if coefficients.size == 0:
            raise ValueError("Polynomial weight needs at least one coefficient.")
        self._coefficients = np.trim_zeros(coefficients, "b")
        if self._coefficients.size == 0:
            self._coefficients = np.zeros(1)
        self._function = Polynomial(self._coefficients)

    def _set_table(self, x, y) -> None:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.size < 2:
            raise ValueError("Weight table needs matching 'x' and 'y' arrays of length >= 2.")
        if np.any(np.diff(x) <= 0):
            raise ValueError("Weight table 'x' must be strictly increasing.")
        if x[0] > -1 or x[-1] < 1:
            raise ValueError(f"Weight table must cover [-1, 1], got [{x[0]}, {x[-1]}].")
        self._table = (x, y)
        self._function = PchipInterpolator(x, y, extrapolate=False)

    def __call__(self, x):
        return np.asarray(self._function(x), dtype=float)

    @property
    def coefficients(self) -> Optional[np.ndarray]:
        """Returns the polynomial coefficients, None for non-polynomial weights."""
        return self._coefficients

    @property
    def is_constant(self) -> bool:
        """Returns whether d is a constant function."""
        return self._coefficients is not None and self._coefficients.size == 1

    def reflected(self) -> Weight:
        """Returns the weight x -> d(-x)."""
        if self._coefficients is not None:
            signs = (-1.0) ** np.arange(self._coefficients.size)
            return Weight(self._coefficients * signs)
        if self._table is not None:
            x, y = self._table
            return Weight({"table": {"x": (-x[::-1]).tolist(), "y": y[::-1].tolist()}})
        return Weight(_ReflectedFunction(self._function))

    def to_dict(self) -> dict:
        if self._coefficients is not None:
            return {"poly": [float(c) for c in self._coefficients]}
        if self._table is not None:
            x, y = self._table
            return {"table": {"x": x.tolist(), "y": y.tolist()}}
        raise ValueError("A callable weight has no JSON spec, use {'poly': [...]} or {'table': {...}}.")


class JacobiMeasure(Measure):
    """The centered measure dμ = d(x)(1+x)^a(1-x)^b dx / Z on [-1, 1].

    Construction computes Z by Gauss-Jacobi quadrature, checks that d is
    positive and that the measure is centered, and prepares the sampler.
    Instances are immutable afterwards.
    """

    _a: float
    _b: float
    _Z: float
    _quadrature_order: int

    def __init__(
        self,
        a: float,
        b: float,
        d: WeightSpec = None,
        quadrature_order: Optional[int] = None,
    ) -> None:
        """Create a Jacobi measure.

        Args:
            a (float): exponent of (1+x), must exceed -1.
            b (float): exponent of (1-x), must exceed -1.
            d (WeightSpec, optional): the positive C^1 factor d(x). Defaults to None, meaning d ≡ 1.
            quadrature_order (Optional[int], optional): Gauss-Jacobi order. Defaults to the laboratory setting.

        Raises:
            NonPositiveWeight: d is not strictly positive on [-1, 1].
            NotCentered: the mean of the measure exceeds 1e-8 in absolute value.
        """
        if a <= -1 or b <= -1:
            raise ValueError(f"Jacobi exponents must exceed -1, got a={a}, b={b}.")
        self._a = float(a)
        self._b = float(b)
        self._weight = d if isinstance(d, Weight) else Weight(d)
        self._quadrature_order = int(quadrature_order or lab.quadrature_order)
        if self._quadrature_order < 1:
            raise ValueError(f"Quadrature order must be positive, got {self._quadrature_order}.")
        self._rules: Dict[int, Tuple[np.ndarray, np.ndarray]] = dict()

        grid = np.linspace(-1.0, 1.0, POSITIVITY_GRID)
        values = self._weight(grid)
        if not np.all(np.isfinite(values)):
            raise NonFinite("Weight d is not finite on [-1, 1].")
        if np.min(values) <= 0:
            where = grid[int(np.argmin(values))]
            raise NonPositiveWeight(
                f"Weight d must be positive on [-1, 1], got d({where:.4f})={np.min(values):.3e}."
            )
        self._d_bound = 1.001 * float(np.max(values))

        self._Z = self._normalization(self._quadrature_order)
        refined = self._normalization(2 * self._quadrature_order)
        if abs(refined - self._Z) > NORMALIZATION_TOL * self._Z:
            LOGGER.warning(
                f"JacobiMeasure a={self._a}, b={self._b}: Z changes by {abs(refined - self._Z) / self._Z:.2e} when the order doubles."
            )

        mean = self.moment(1)
        if abs(mean) > CENTERING_TOL:
            raise NotCentered(
                f"Measure is not centered: mean={mean:.3e} exceeds {CENTERING_TOL:.0e} (a={self._a}, b={self._b})."
            )
        self._mixture = self._beta_mixture()
        LOGGER.debug(
            f"JacobiMeasure a={self._a}, b={self._b}: Z={self._Z:.15g}, order={self._quadrature_order}."
        )

    def _normalization(self, order: int) -> float:
        nodes, weights = gauss_jacobi(order, self._a, self._b)
        return float(np.dot(weights, self._weight(nodes)))

    def _beta_mixture(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        # with u = (1-x)/2 the density is a mixture of Beta(b+1+j, a+1) laws
        # whenever d(1-2u) has nonnegative coefficients in u
        if self._weight.coefficients is None:
            return None
        in_u = Polynomial(self._weight.coefficients)(Polynomial([1.0, -2.0])).coef
        if np.any(in_u < 0):
            return None
        degrees = np.arange(in_u.size)
        masses = in_u * np.exp(betaln(self._b + 1 + degrees, self._a + 1))
        keep = masses > 0
        return self._b + 1 + degrees[keep], masses[keep] / masses[keep].sum()

    @property
    def a(self) -> float:
        """Returns the exponent at -1."""
        return self._a

    @property
    def b(self) -> float:
        """Returns the exponent at +1."""
        return self._b

    @property
    def Z(self) -> float:
        """Returns the normalization constant."""
        return self._Z

    @property
    def d(self) -> Weight:
        """Returns the weight d(x)."""
        return self._weight

    @property
    def quadrature_order(self) -> int:
        """Returns the default Gauss-Jacobi order."""
        return self._quadrature_order

    def pdf(self, x) -> np.ndarray:
        """Returns the density d(x)(1+x)^a(1-x)^b/Z, zero outside [-1, 1]."""
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) <= 1
        clipped = np.clip(x, -1.0, 1.0)
        values = self._weight(clipped) * (1 + clipped) ** self._a * (1 - clipped) ** self._b / self._Z
        return np.where(inside, values, 0.0)

    def rule(self, order: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        order = int(order or self._quadrature_order)
        if order not in self._rules:
            nodes, weights = gauss_jacobi(order, self._a, self._b)
            normalized = weights * self._weight(nodes) / self._Z
            normalized.setflags(write=False)
            self._rules[order] = (nodes, normalized)
        return self._rules[order]

    def integrate(self, f: Callable, order: Optional[int] = None):
        """Gauss-Jacobi value of ∫ f dμ.

        Args:
            f (Callable): vectorized integrand; extra trailing output axes are integrated element-wise.
            order (Optional[int], optional): quadrature order. Defaults to the measure's order.

        Raises:
            NonFinite: f is NaN or infinite at a node.
        """
        nodes, weights = self.rule(order)
        return _weighted_sum(nodes, weights, f)

    def integrate_weighted(
        self, f: Callable, left: float = 0.0, right: float = 0.0, order: Optional[int] = None
    ):
        """Returns ∫ f(x)(1+x)^(-left)(1-x)^(-right) dμ(x) with the singular factor folded into the rule.

        Raises:
            DivergentIntegral: a - left <= -1 or b - right <= -1.
        """
        a = self._a - left
        b = self._b - right
        if a <= -1 or b <= -1:
            raise DivergentIntegral(
                f"∫ dμ(x)/((1+x)^{left:g}(1-x)^{right:g}) diverges for a={self._a:g}, b={self._b:g}."
            )
        nodes, weights = gauss_jacobi(int(order or self._quadrature_order), a, b)
        return _weighted_sum(nodes, weights * self._weight(nodes) / self._Z, f)

    def stieltjes(self, s, power: int = 1, order: Optional[int] = None) -> np.ndarray:
        """∫ dμ(t)/(t-s)^power for every point of s.

        Points whose Bernstein ellipse radius lets the Gauss rule converge to
        1e-15 use it directly. The remaining points, close to [-1, 1], fall
        back to adaptive QAWS quadrature with the Jacobi weight.
        """
        s = np.asarray(s, dtype=complex)
        flat = s.ravel()
        on_support = (flat.imag == 0) & (np.abs(flat.real) <= 1)
        if np.any(on_support):
            raise ValueError(
                f"Stieltjes transform is undefined on the support, got s={flat[on_support][0]}."
            )
        order = int(order or lab.solver_order)
        nodes, weights = self.rule(order)
        radius = np.abs(flat + np.sqrt(flat - 1) * np.sqrt(flat + 1))
        with np.errstate(divide="ignore"):
            resolved = 2 * order * np.log(radius) > -math.log(GAUSS_CAUCHY_TOL)

        out = np.empty(flat.shape, dtype=complex)
        fast = np.flatnonzero(resolved)
        for start in range(0, fast.size, KERNEL_CHUNK):
            part = fast[start : start + KERNEL_CHUNK]
            out[part] = (1.0 / (nodes[None, :] - flat[part, None]) ** power) @ weights
        for k in np.flatnonzero(~resolved):
            out[k] = self._stieltjes_adaptive(complex(flat[k]), power)
        return out.reshape(s.shape)

    def _stieltjes_adaptive(self, s: complex, power: int) -> complex:
        def part(t, imaginary: bool):
            kernel = self._weight(t) / (t - s) ** power
            return (kernel.imag if imaginary else kernel.real) / self._Z

        options = dict(weight="alg", wvar=(self._a, self._b), epsabs=1e-15, epsrel=1e-12, limit=200, full_output=1)
        real = quad(part, -1.0, 1.0, args=(False,), **options)
        imag = quad(part, -1.0, 1.0, args=(True,), **options) if s.imag != 0 else (0.0, 0.0)
        for result in (real, imag):
            if len(result) > 3:
                LOGGER.debug(f"JacobiMeasure: adaptive Cauchy integral at s={s:.6g}: {result[3]}")
        return complex(real[0], imag[0])

    def sample(self, rng: np.random.Generator, size=None):
        """Draw from μ with the caller's generator.

        Constant d uses the inverse CDF of the Beta law of (1-x)/2, polynomial
        d with a Beta mixture representation picks a component first, and any
        other d is drawn by rejection against the pure Jacobi envelope.
        """
        count = 1 if size is None else int(np.prod(size))
        draws = self._draw(rng, count)
        return float(draws[0]) if size is None else draws.reshape(size)

    def _draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if self._mixture is not None:
            shapes, probabilities = self._mixture
            if shapes.size == 1:
                shape = np.full(count, shapes[0])
            else:
                shape = rng.choice(shapes, size=count, p=probabilities)
            return 1.0 - 2.0 * betaincinv(shape, self._a + 1, rng.random(count))
        out = np.empty(count)
        filled = 0
        while filled < count:
            batch = max(2 * (count - filled), 64)
            x = 1.0 - 2.0 * betaincinv(self._b + 1, self._a + 1, rng.random(batch))
            accepted = x[rng.random(batch) * self._d_bound < self._weight(x)]
            take = min(accepted.size, count - filled)
            out[filled : filled + take] = accepted[:take]
            filled += take
        return out

    def reflected(self) -> JacobiMeasure:
        return JacobiMeasure(self._b, self._a, self._weight.reflected(), self._quadrature_order)

    def to_dict(self) -> dict:
        return {
            "a": self._a,
            "b": self._b,
            "d": self._weight.to_dict(),
            "quadrature_order": self._quadrature_order,
        }

    def __repr__(self) -> str:
        return f"JacobiMeasure(a={self._a:g}, b={self._b:g}, Z={self._Z:.6g})"


def _weighted_sum(nodes: np.ndarray, weights: np.ndarray, f: Callable):
    values = np.asarray(f(nodes))
    if values.ndim == 0:
        values = np.full(nodes.shape, values[()])
    if not np.all(np.isfinite(values)):
        bad = nodes[~np.isfinite(values).reshape(nodes.size, -1).all(axis=1)]
        raise NonFinite(f"Integrand is not finite at node x={bad[0]:.6g}.")
    total = np.tensordot(weights, values, axes=(0, 0))
    return total.item() if np.ndim(total) == 0 else total


def make_jacobi(
    a: float, b: float, d: WeightSpec = None, quadrature_order: Optional[int] = None
) -> JacobiMeasure:
    """Create a centered Jacobi measure, see JacobiMeasure."""
    return JacobiMeasure(a, b, d, quadrature_order)
