"""Exception and warning types shared across the package."""


class NetpanelError(Exception):
    """Base class for errors raised by this package."""


class InvalidNetworkError(NetpanelError, ValueError):
    """Adjacency data violates the directed-binary-network contract."""


class InvalidDyadError(NetpanelError, ValueError):
    """A dyad (i, j) is out of range or lies on the diagonal."""


class ConfigurationError(NetpanelError, ValueError):
    """A model, covariate, panel, or file input is malformed."""


class EstimationError(NetpanelError, RuntimeError):
    """Base class for estimation failures."""


class SeparationError(EstimationError):
    """Perfect separation in the logistic pseudolikelihood.

    Carries the name of the offending statistic in ``statistic``.
    """

    def __init__(self, statistic, message=None):
        self.statistic = statistic
        if message is None:
            message = (
                f"perfect separation on statistic {statistic!r}: the maximum "
                "pseudolikelihood estimate does not exist"
            )
        super().__init__(message)


class ConvergenceError(EstimationError):
    """An iterative estimator failed to converge.

    ``last_iterate`` holds the parameter vector at the point of failure, when
    one is available.
    """

    def __init__(self, message, last_iterate=None):
        self.last_iterate = last_iterate
        super().__init__(message)


class DerivativeSingularityError(EstimationError):
    """The estimated moment-derivative matrix is not invertible."""


class UndefinedCurveError(NetpanelError, ValueError):
    """A classifier curve is undefined (single-class target)."""


class UndefinedTestError(NetpanelError, ValueError):
    """A two-sample test is undefined for the given samples."""


class ScreeningExhaustedError(NetpanelError, RuntimeError):
    """Parameter screening exceeded its rejection budget."""


class DegeneracyWarning(UserWarning):
    """A sampler chain spent nearly all its time at extreme densities."""


class NonConvergenceWarning(UserWarning):
    """An estimate is returned but failed its convergence diagnostic."""
