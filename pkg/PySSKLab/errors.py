from typing import List, Optional


class LabError(Exception):
    """Base class for every error raised by PySSKLab."""


# measure
class NotCentered(LabError, ValueError):
    pass


class NonPositiveWeight(LabError, ValueError):
    pass


class NonFinite(LabError, ValueError):
    pass


class DivergentIntegral(LabError, ArithmeticError):
    pass


# freeconv
class NoConvergence(LabError, RuntimeError):
    pass


class SingularDerivative(LabError, ArithmeticError):
    pass


class EdgeNotFound(LabError, RuntimeError):
    pass


class OutOfRegime(LabError, RuntimeError):
    pass


class ContourTooClose(LabError, ValueError):
    pass


# spectra
class MatrixNotRetained(LabError, RuntimeError):
    pass


class SpectrumError(LabError, RuntimeError):
    pass


# saddle
class BranchCut(LabError, ValueError):
    pass


class OutOfDomain(LabError, ValueError):
    pass


class QuadratureFailure(LabError, RuntimeError):
    pass


class DomainError(LabError, ValueError):
    pass


# experiments and cli
class RegimeViolation(LabError, ValueError):
    def __init__(self, violations: List[str]) -> None:
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ConfigError(LabError, ValueError):
    def __init__(self, violations: List[str]) -> None:
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ParseError(LabError, ValueError):
    def __init__(
        self, message: str, line: Optional[int] = None, column: Optional[int] = None
    ) -> None:
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")
