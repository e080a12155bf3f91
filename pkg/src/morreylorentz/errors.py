"""Exception types raised across the package."""


class MorreyLorentzError(Exception):
    """Base class for package errors."""


class DomainError(MorreyLorentzError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConjugateUndefinedError(DomainError):
    """p(t) <= 1, so the conjugate exponent p'(t) does not exist."""


class DivergenceError(MorreyLorentzError, ArithmeticError):
    """An integral or norm is infinite for the given input."""


class HypothesisError(MorreyLorentzError, ValueError):
    """A parameter violates a standing hypothesis of the operator."""


class PreconditionError(MorreyLorentzError, ValueError):
    """An operator precondition failed (e.g. Omega without mean zero)."""


class ConfigError(MorreyLorentzError, ValueError):
    """Malformed run configuration."""
