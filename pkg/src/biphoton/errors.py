"""Exception and warning types raised across the package."""


class BiphotonError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(BiphotonError, ValueError):
    """A constructor or operation received an invalid parameter.

    The offending field name is kept on ``field`` so callers (the CLI in
    particular) can report it without parsing the message.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class QuadratureCoverageError(BiphotonError, ValueError):
    """The x-grid does not contain the full aperture support."""


class UnsupportedEvaluationError(BiphotonError, TypeError):
    """The delta kernel has no pointwise value."""


class WindowTooSmallError(BiphotonError, ValueError):
    pass


class InsufficientPeaksError(BiphotonError, ValueError):
    pass


class GridMismatchError(BiphotonError, ValueError):
    pass


class DegenerateDataError(BiphotonError, ValueError):
    """Fitting data carry no information about the free parameters."""


class ConfigError(BiphotonError, ValueError):
    pass


class DataParseError(BiphotonError, ValueError):
    """A data file could not be parsed; ``line`` is 1-based when known."""

    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line
        self.path = path


class ResolutionWarning(UserWarning):
    """Quadrature spacing is coarser than recommended for the slit width."""
