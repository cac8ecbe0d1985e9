"""Exception types shared across the package."""


class CausticaError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateCurvature(CausticaError):
    """The radius of curvature vanishes at the requested parameter."""


class NotARosette(CausticaError):
    """A support function fails the local-convexity check."""


class InvalidLambda(CausticaError):
    """Equidistant ratio outside (0, 1), or 0.5 where a Wigner branch is required."""


class DegenerateBranch(CausticaError):
    """A branch collapses to a point, so cusp counting is meaningless."""


class NotRegular(CausticaError):
    """A parametric curve has vanishing velocity somewhere on its domain."""


class NotALoop(CausticaError):
    """An arc does not close up, or its curvature vanishes."""


class ChainTooShort(CausticaError):
    """Too few points (or a degenerate point cloud) for singularity detection."""


class EmptyScene(CausticaError):
    """A scene with no curves cannot be rendered."""


class UnknownCurveReference(CausticaError):
    """A line family or overlay references a curve id not declared in the scene."""


class ParseError(CausticaError):
    """A scene file is not syntactically valid."""


class SchemaError(CausticaError):
    """A scene file is syntactically valid but violates the schema."""


class TangentZeroWarning(UserWarning):
    """A cusp-condition zero is not simple; the root is reported once, unrefined."""
