"""Exception hierarchy shared by all modules."""


class HdxError(Exception):
    """Base class for all library errors."""


# --- complex construction ---

class NonPure(HdxError):
    """A face has the wrong size for the declared dimension."""


class ZeroMeasure(HdxError):
    """No top face carries positive weight."""


class DuplicateFace(HdxError):
    pass


class NotAFace(HdxError):
    pass


class TopFace(HdxError):
    """The link of a top face is empty."""


class BadLevel(HdxError):
    pass


class TooSmallT(HdxError):
    """Tensor factor smaller than d+1."""


# --- graphs / spectral ---

class EmptyGraph(HdxError):
    pass


class NotBipartite(HdxError):
    pass


class TooLargeForExact(HdxError):
    pass


class NonPositiveAlpha(HdxError):
    pass


class DegenerateColoring(HdxError):
    """A target edge (or vertex) has an empty fiber; carries the witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


# --- groups ---

class TooLarge(HdxError):
    pass


class NotAGroup(HdxError):
    pass


class NotPure(HdxError):
    """A Cayley graph edge lies in no (d+1)-clique; carries the edge."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotSymmetricGenSet(HdxError):
    pass


class NotNormal(HdxError):
    pass


class NotSubgroup(HdxError):
    pass


# --- pruning / combine ---

class BadKindForFace(HdxError):
    pass


class UnsatisfiedBase(HdxError):
    pass


class Unmeasurable(HdxError):
    """The labeling misses a pattern required by the reference link."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


# --- covers ---

class NotAnEdge(HdxError):
    pass


class NotACocycle(HdxError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class Disconnected(HdxError):
    pass


# --- sparsify ---

class EmptySide(HdxError):
    pass


class EmptyResult(HdxError):
    pass


# --- harness ---

class IoError(HdxError):
    pass


class InputError(HdxError):
    """Bad experiment spec or unreadable input file."""
