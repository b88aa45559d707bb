"""Exception hierarchy shared by all isoflex modules."""


class IsoflexError(ValueError):
    """Base class for every error raised by the library."""


class PreconditionError(IsoflexError):
    pass


class DegenerateError(IsoflexError):
    """Collinear points, zero-length edges or otherwise rank-deficient input."""


class IsotropicPlaneError(IsoflexError):
    """A plane that would contain the z-direction."""


class DimensionMismatch(IsoflexError):
    pass


class NotParallelError(IsoflexError):
    pass


class NotParallelSides(NotParallelError):
    pass


class NotVParallel(NotParallelError):
    pass


class NotDualConvex(IsoflexError):
    pass


class NotInfinitesimallyFlexible(IsoflexError):
    pass


class BoundaryVertexError(IsoflexError):
    pass


class DegenerateDiagonals(IsoflexError):
    pass


class NonConvexFace(IsoflexError):
    def __init__(self, message, face=None, t=None):
        super().__init__(message)
        self.face = face
        self.t = t


class DegenerateDeterminant(IsoflexError):
    pass


class CoplanarPair(IsoflexError):
    pass


class PropagationFailed(IsoflexError):
    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class OutOfDomain(IsoflexError):
    pass


class QuadratureFailure(IsoflexError):
    pass


class AdmissibilityFailure(IsoflexError):
    pass


class InvalidNetFile(IsoflexError):
    """A net file that does not parse, or parses to a net failing validation."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
