"""Exception hierarchy shared by every module."""


class QuregressError(Exception):
    """Base class for errors raised by this package."""


class InvalidArgument(QuregressError, ValueError):
    pass


class DegenerateTargetError(QuregressError, ValueError):
    """Raised when the regression target has zero variance."""


class UndefinedCorrelationError(QuregressError, ValueError):
    pass


class UnderdeterminedError(QuregressError, ValueError):
    pass


class DegeneratePairError(QuregressError, ValueError):
    """All paired differences are zero, so no signed-rank statistic exists."""


class InvalidStateError(QuregressError, RuntimeError):
    pass


class ConfigError(QuregressError):
    """Invalid experiment configuration. ``path`` names the offending field."""

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class EmptyReportError(QuregressError):
    pass
