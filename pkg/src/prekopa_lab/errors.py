"""Exception hierarchy shared by all prekopa_lab modules."""


class PrekopaLabError(Exception):
    """Base class for every error raised by this package."""


class WeightError(PrekopaLabError, ValueError):
    """Malformed weight specification or bad evaluation arguments."""


class IntegrationError(PrekopaLabError):
    """An integrand produced NaN at a quadrature node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class TruncationError(PrekopaLabError):
    """Exhaustion reached its cap without converging."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class DivergenceError(PrekopaLabError):
    """A fiber integral is infinite, so the marginal is undefined."""

    def __init__(self, message, t=None, trace=()):
        super().__init__(message)
        self.t = t
        self.trace = list(trace)


class InfiniteMarginalError(PrekopaLabError):
    """The fiber integral vanishes (phi is +inf on the whole fiber)."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class ConditioningError(PrekopaLabError):
    """A Gram matrix failed Cholesky factorization."""

    def __init__(self, message, degree=None):
        super().__init__(message)
        self.degree = degree


class ConsistencyError(PrekopaLabError):
    """An inequality chain that must hold by construction was violated."""


class AuditError(PrekopaLabError):
    """An audited constant or inequality failed its check."""


class DomainError(PrekopaLabError, ValueError):
    """Parameters outside the admissible range."""


class CoverageError(PrekopaLabError, ValueError):
    """A sampling grid does not cover the declared support."""


class ConfigError(PrekopaLabError):
    """Malformed CLI configuration; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
