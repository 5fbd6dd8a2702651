"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`RevMCError`.
The CLI maps the intermediate classes onto its exit codes.
"""


class RevMCError(Exception):
    """Base class for library errors."""


class InputError(RevMCError, ValueError):
    """Malformed or unparseable input."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GraphError(RevMCError, ValueError):
    """Invalid structure graph."""


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class DisconnectedError(GraphError):
    pass


class EmptyOrFullSubsetError(GraphError):
    pass


class RankDeficientFamilyError(GraphError):
    pass


class DimensionMismatchError(RevMCError, ValueError):
    pass


class CycleCapExceededError(RevMCError):
    pass


class NotInKernelError(RevMCError, ValueError):
    pass


class InstanceTooLargeError(RevMCError):
    pass


class NotCycleBinomialError(RevMCError, ValueError):
    pass


class InvalidTransitionMatrixError(RevMCError, ValueError):
    pass


class ZeroOnSupportError(RevMCError, ValueError):
    pass


class NotQReversibleError(RevMCError, ValueError):
    pass


class DisconnectedSupportError(RevMCError, ValueError):
    pass


class NonpositiveKappaError(RevMCError, ValueError):
    pass


class NotReversibleError(RevMCError, ValueError):
    pass


class NonpositivePiError(RevMCError, ValueError):
    pass


class IsolatedMasslessError(RevMCError, ValueError):
    pass


class BadSupportError(RevMCError, ValueError):
    pass


class EntriesOutOfRangeError(RevMCError, ValueError):
    pass


class NonpositiveParamsError(RevMCError, ValueError):
    pass


class NotABasisError(RevMCError, ValueError):
    pass


class ZeroTransitionError(RevMCError, ValueError):
    pass


class FeasibilityViolatedError(RevMCError, ValueError):
    """Raised when the row-mass inequalities fail.

    ``vertices`` holds the labels of the offending vertices and ``slack`` the
    full per-vertex slack vector (canonical vertex order).
    """

    def __init__(self, vertices, slack):
        self.vertices = list(vertices)
        self.slack = slack
        super().__init__(f"feasibility violated at vertices {self.vertices}")


class ReducibleError(RevMCError, ValueError):
    pass


class PathTooShortError(RevMCError, ValueError):
    pass
