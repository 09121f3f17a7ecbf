"""Result container and error types for the special-function evaluators."""
from __future__ import annotations

from dataclasses import dataclass


class SpecFunError(Exception):
    pass


class DomainError(SpecFunError):
    """Argument outside the supported domain."""


class ConvergenceError(SpecFunError):
    """Series or quadrature failed to reach the requested accuracy."""


@dataclass(frozen=True)
class SpecialValue:
    """A computed value together with an absolute error estimate."""
    value: complex
    abs_err_estimate: float

    def require(self, tol: float) -> complex:
        if not (self.abs_err_estimate <= tol):
            raise ConvergenceError(
                f"error estimate {self.abs_err_estimate:.3e} exceeds tolerance {tol:.3e}")
        return self.value

    @property
    def real(self) -> float:
        return self.value.real

    def __complex__(self) -> complex:
        return complex(self.value)

    def __float__(self) -> float:
        if abs(self.value.imag) > 1e3 * self.abs_err_estimate + 1e-300:
            raise ValueError("value has a significant imaginary part")
        return float(self.value.real)
