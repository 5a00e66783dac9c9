"""Exception hierarchy shared by every module of the package."""


class PerronTreeError(Exception):
    """Base class for all package errors."""


class TreeError(PerronTreeError, ValueError):
    """Input does not describe a valid tree.

    ``line`` carries the 1-based line number of the offending edge-list
    line when the error came from parsing, otherwise ``None``.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line

    @property
    def kind(self) -> str:
        return type(self).__name__


class MalformedLine(TreeError):
    pass


class SelfLoop(TreeError):
    pass


class DuplicateEdge(TreeError):
    pass


class HasCycle(TreeError):
    pass


class NotConnected(TreeError):
    pass


class Empty(TreeError):
    pass


class InvalidSize(PerronTreeError, ValueError):
    pass


class UnknownVertex(PerronTreeError, ValueError):
    pass


class ArgumentIsRoot(PerronTreeError, ValueError):
    pass


class LinalgError(PerronTreeError, ArithmeticError):
    pass


class NoConvergence(LinalgError):
    pass


class NotPositiveDefinite(LinalgError):
    pass


class NotPositiveMatrix(LinalgError):
    pass


class DimensionMismatch(LinalgError, ValueError):
    pass


class ClassificationError(PerronTreeError):
    pass


class NotType1(ClassificationError):
    pass


class NotType2(ClassificationError):
    pass


class NoRoot(ClassificationError):
    pass


class TieAmbiguity(ClassificationError):
    pass
