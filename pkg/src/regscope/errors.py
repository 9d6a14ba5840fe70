"""Exception hierarchy shared by every regscope module."""


class RegscopeError(ValueError):
    """Base class; CLI maps every subclass to a data-error exit code."""


class PathError(RegscopeError):
    pass


class EmptyPath(PathError):
    pass


class UnknownRoot(PathError):
    pass


class ManifestInvalid(RegscopeError):
    pass


class Unparseable(RegscopeError):
    pass


class MalformedReport(RegscopeError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class MalformedDataset(RegscopeError):
    pass


class EmptyDataset(RegscopeError):
    pass


class DimensionMismatch(RegscopeError):
    pass


class InvalidProfile(RegscopeError):
    pass
