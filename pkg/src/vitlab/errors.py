"""Exception types shared across the package."""


class ConvergenceError(RuntimeError):
    """A numerical routine failed to converge to its stated tolerance."""


class RankDeficientError(ConvergenceError):
    """Least-squares design matrix is rank deficient.

    Carries the name of the parameter that is not identifiable.
    """

    def __init__(self, parameter, message=None):
        self.parameter = parameter
        super().__init__(message or f"parameter '{parameter}' is not identifiable from the data")


class BandCoverageError(ValueError):
    """Pulse grid does not cover the medium's spectral features.

    Raised when the transfer function still varies at the edge of the
    sampled frequency band, where wrap-around would corrupt the output.
    """
