"""Exception hierarchy for the fusion pipeline."""


class FuseError(Exception):
    """Base class for every error raised by mmfuse."""


class ConfigError(FuseError):
    pass


# ingest
class IngestError(FuseError):
    pass


class MissingFile(IngestError):
    def __init__(self, path):
        super().__init__(f"missing required file: {path}")
        self.path = path


class MalformedRow(IngestError):
    def __init__(self, file, row, message=""):
        super().__init__(f"{file}: row {row}: {message}".rstrip(": "))
        self.file = file
        self.row = row


class UnknownCode(IngestError):
    def __init__(self, code, file=None, row=None):
        super().__init__(f"unknown code {code!r}" + (f" ({file}: row {row})" if file else ""))
        self.code = code


class NonMonotoneTimestamp(IngestError):
    def __init__(self, student, t, file=None):
        super().__init__(f"non-increasing timestamp for student {student!r} at t={t}"
                         + (f" in {file}" if file else ""))
        self.student = student
        self.t = t


class WrongStudentCount(IngestError):
    def __init__(self, n):
        super().__init__(f"expected 4 students per session, found {n}")
        self.n = n


# indicators / sync
class InsufficientBaselineData(FuseError):
    pass


class SpanMismatch(FuseError):
    pass


# lca
class NonFiniteLikelihood(FuseError):
    pass


class AllRestartsFailed(FuseError):
    pass


class DimensionMismatch(FuseError):
    pass


# ena
class DegenerateProjection(FuseError):
    pass


class IdenticalGroupMeans(DegenerateProjection):
    pass


class GroupTooSmall(FuseError):
    pass


# statkit
class ZeroVariance(FuseError, ValueError):
    pass


class LengthMismatch(FuseError, ValueError):
    pass


class EmptyGroup(FuseError, ValueError):
    pass


# synthgen
class InconsistentScript(FuseError):
    pass
