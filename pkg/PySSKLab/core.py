from __future__ import annotations

import os
from typing import Optional, Tuple

THREADS_ENV = "SSKLAB_THREADS"


def _default_threads() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            threads = int(value)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {value!r}.")
        if threads < 1:
            raise ValueError(f"{THREADS_ENV} must be positive, got {threads}.")
        return threads
    return os.cpu_count() or 1


class Laboratory:
    def __new__(cls):
        if not hasattr(cls, "instance"):
            cls.instance = super(Laboratory, cls).__new__(cls)
        return cls.instance

    def __init__(
        self,
        quadrature_order: int = 128,
        solver_order: int = 512,
        solver_tol: float = 1e-12,
        max_iter: int = 500,
        grid_points: int = 1501,
        eta_schedule: Tuple[float, ...] = tuple(1e-2 * 2.0 ** (-k) for k in range(6)),
        cache_dir: Optional[str] = None,
        verify_eigenpairs: bool = False,
    ):
        """Runtime defaults shared by every computation of the laboratory.

        Args:
            quadrature_order (int, optional): Gauss-Jacobi order used for integrals against a base measure. Defaults to 128.
            solver_order (int, optional): Gauss-Jacobi order used inside the self-consistent equation solver. Defaults to 512.
            solver_tol (float, optional): residual tolerance of the self-consistent equation. Defaults to 1e-12.
            max_iter (int, optional): iteration cap of the fixed point solver. Defaults to 500.
            grid_points (int, optional): number of points of the density grid over [L_-, L_+]. Defaults to 1501.
            eta_schedule (Tuple[float, ...], optional): decreasing offsets used for density extrapolation. Defaults to 1e-2 * 2^-k, k=0..5.
            cache_dir (Optional[str], optional): directory of the spectral sample cache, disabled when None. Defaults to None.
            verify_eigenpairs (bool, optional): spot-check eigenpair residuals when sampling. Defaults to False.
        """
        if hasattr(self, "_initialized"):
            return
        self._initialized = True
        self._threads: Optional[int] = None
        self._quadrature_order = quadrature_order
        self._solver_order = solver_order
        self._solver_tol = solver_tol
        self._max_iter = max_iter
        self._grid_points = grid_points
        self._eta_schedule = tuple(eta_schedule)
        self._cache_dir = cache_dir
        self._verify_eigenpairs = verify_eigenpairs

    @property
    def threads(self) -> int:
        """Returns the worker count, from SSKLAB_THREADS or the available cores unless set explicitly."""
        if self._threads is None:
            return _default_threads()
        return self._threads

    @threads.setter
    def threads(self, value: Optional[int]) -> None:
        if value is not None and value < 1:
            raise ValueError(f"Thread count must be positive, got {value}.")
        self._threads = value

    @property
    def quadrature_order(self) -> int:
        """Returns the default Gauss-Jacobi order."""
        return self._quadrature_order

    @quadrature_order.setter
    def quadrature_order(self, value: int) -> None:
        self._quadrature_order = int(value)

    @property
    def solver_order(self) -> int:
        """Returns the Gauss-Jacobi order used by the self-consistent solver."""
        return self._solver_order

    @solver_order.setter
    def solver_order(self, value: int) -> None:
        self._solver_order = int(value)

    @property
    def solver_tol(self) -> float:
        """Returns the residual tolerance of the self-consistent equation."""
        return self._solver_tol

    @solver_tol.setter
    def solver_tol(self, value: float) -> None:
        self._solver_tol = float(value)

    @property
    def max_iter(self) -> int:
        """Returns the iteration cap of the fixed point solver."""
        return self._max_iter

    @max_iter.setter
    def max_iter(self, value: int) -> None:
        self._max_iter = int(value)

    @property
    def grid_points(self) -> int:
        """Returns the density grid resolution."""
        return self._grid_points

    @grid_points.setter
    def grid_points(self, value: int) -> None:
        self._grid_points = int(value)

    @property
    def eta_schedule(self) -> Tuple[float, ...]:
        """Returns the extrapolation schedule used for the density."""
        return self._eta_schedule

    @eta_schedule.setter
    def eta_schedule(self, value) -> None:
        self._eta_schedule = tuple(float(eta) for eta in value)

    @property
    def cache_dir(self) -> Optional[str]:
        """Returns the spectral sample cache directory."""
        return self._cache_dir

    @cache_dir.setter
    def cache_dir(self, value: Optional[str]) -> None:
        self._cache_dir = value

    @property
    def verify_eigenpairs(self) -> bool:
        """Returns whether sampled spectra get an eigenpair residual spot-check."""
        return self._verify_eigenpairs

    @verify_eigenpairs.setter
    def verify_eigenpairs(self, value: bool) -> None:
        self._verify_eigenpairs = bool(value)


lab = Laboratory()
