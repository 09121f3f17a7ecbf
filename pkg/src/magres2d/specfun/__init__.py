"""Self-contained special functions: Gamma, Bessel J/Y/I/K of real order,
and the Kummer functions M and U, with the derivative recurrences.

Every evaluator returns a SpecialValue carrying an absolute error estimate;
callers decide how strict to be via SpecialValue.require().
"""
from .types import SpecialValue, SpecFunError, DomainError, ConvergenceError
from .gammafn import gamma, gamma_real, log_gamma, recip_gamma
from .bessel import bessel, bessel_derivative, bessel_array, BESSEL_KINDS
from .kummer import kummer_m, kummer_u, kummer_derivatives, kummer_m_array

__all__ = [
    "SpecialValue", "SpecFunError", "DomainError", "ConvergenceError",
    "gamma", "gamma_real", "log_gamma", "recip_gamma",
    "bessel", "bessel_derivative", "bessel_array", "BESSEL_KINDS",
    "kummer_m", "kummer_u", "kummer_derivatives", "kummer_m_array",
]
