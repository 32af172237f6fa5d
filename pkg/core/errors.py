from __future__ import annotations

from typing import Any, List, Optional


class GrushinError(Exception):
    pass


class DimensionError(GrushinError):
    pass


class DomainError(GrushinError):
    """Argument outside the domain of the operation (λ ≤ 0, eps ∉ (0,1), ...)."""


class InapplicableConstantError(GrushinError):
    pass


class DegenerateEquationError(GrushinError):
    pass


class InadmissibleError(GrushinError):
    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class DivergentIntegralError(GrushinError):
    def __init__(self, message: str, region: Optional[str] = None):
        super().__init__(message)
        self.region = region


class QuadratureError(GrushinError):
    def __init__(self, message: str, result: Any = None):
        super().__init__(message)
        self.result = result


class FitError(GrushinError):
    def __init__(self, message: str, r_squared: Optional[float] = None):
        super().__init__(message)
        self.r_squared = r_squared


class OptimizerBudgetError(GrushinError):
    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class ConfigError(GrushinError):
    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        return base + "\n" + "\n".join(f"  - {d}" for d in self.diagnostics)
