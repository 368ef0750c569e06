"""Exception types raised by the reconstruction pipeline."""


class RRBFError(Exception):
    """Base class for all package errors."""


class ConditioningError(RRBFError):
    """A kernel matrix could not be Cholesky-factored."""

    def __init__(self, message, patch=None):
        if patch is not None:
            message = f"patch {patch}: {message}"
        super().__init__(message)
        self.patch = patch


class ZeroFunctionValue(RRBFError):
    """The rational fit was given a zero data value."""

    def __init__(self, message, patch=None):
        if patch is not None:
            message = f"patch {patch}: {message}"
        super().__init__(message)
        self.patch = patch


class EigenSolverError(RRBFError):
    """The iterative eigensolver did not converge and no fallback applied."""


class DenominatorNearZero(RRBFError):
    """The denominator expansion of a rational fit vanished at a point."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class UncoveredPoint(RRBFError):
    """An evaluation point lies outside every fitted patch."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class PointCloudFormatError(RRBFError):
    """A point-cloud file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line
