"""Exception hierarchy shared by every module of the package."""


class SppcsoError(ValueError):
    """Base class for all errors raised by this package."""


class TooFewRows(SppcsoError):
    pass


class ConstantColumn(SppcsoError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column} has zero variance after centering")


class NotSymmetric(SppcsoError):
    pass


class DimensionMismatch(SppcsoError):
    pass


class EmptyData(SppcsoError):
    pass


class InvalidPenalty(SppcsoError):
    pass


class InvalidGamma(InvalidPenalty):
    pass


class InvalidTheta(SppcsoError):
    pass


class Diverged(SppcsoError):
    pass


class EmptySupport(SppcsoError):
    pass


class SingularGram(SppcsoError):
    pass


class BadFoldCount(SppcsoError):
    pass


class BadDimensions(SppcsoError):
    pass


class BadSplit(SppcsoError):
    pass


class KTooLarge(SppcsoError):
    pass


class MissingTarget(SppcsoError):
    pass


class MalformedFile(SppcsoError):
    def __init__(self, line, detail=""):
        self.line = line
        msg = f"malformed input at line {line}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class NonNumericValue(SppcsoError):
    def __init__(self, row, col, value=None):
        self.row = row
        self.col = col
        super().__init__(f"non-numeric value {value!r} at line {row}, column {col}")


class EmptyAfterFilter(SppcsoError):
    pass


class NonpositiveValue(SppcsoError):
    pass


class CVFailed(SppcsoError):
    pass


class BenchmarkFailed(SppcsoError):
    pass
