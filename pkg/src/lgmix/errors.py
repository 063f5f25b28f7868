"""Exception types shared across the package.

Every numerical-contract failure gets its own class so callers (and the
CLI exit-code mapping) can distinguish bad inputs from runs that violated
a stability or convergence contract mid-flight.
"""

from __future__ import annotations


class LgmixError(Exception):
    """Base class for all package errors."""


class InvalidInputError(LgmixError, ValueError):
    """Arguments violate a documented precondition (shape, finiteness, range)."""


class UnstableSystemError(LgmixError):
    """An operation requiring spectral radius < 1 received an unstable matrix."""


class ConvergenceError(LgmixError):
    """An iterative scheme failed to converge within its iteration budget."""


class ConstructionError(LgmixError):
    """System construction could not satisfy its constraints (e.g. condition cap)."""


class NotContractiveError(LgmixError):
    """No power of the matrix became contractive within the scan budget.

    Carries the norm trace observed so far in ``log_norms``.
    """

    def __init__(self, message: str, log_norms=None):
        super().__init__(message)
        self.log_norms = list(log_norms) if log_norms is not None else []


class ExplosionOverflowError(LgmixError):
    """A simulated state exceeded the overflow guard.

    Carries the truncated trajectory in ``partial_states``.
    """

    def __init__(self, message: str, partial_states=None):
        super().__init__(message)
        self.partial_states = partial_states


class ContractViolationError(LgmixError):
    """A runtime contract between modules was violated (e.g. ||A^k|| >= 1)."""


class IllPosedError(LgmixError):
    """A least-squares problem is numerically rank deficient.

    Carries the singular spectrum of the data matrix in ``singular_values``.
    """

    def __init__(self, message: str, singular_values=None):
        super().__init__(message)
        self.singular_values = singular_values
