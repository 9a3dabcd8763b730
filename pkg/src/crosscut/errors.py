"""Exception hierarchy for the crosscut package.

Every error raised by library code derives from :class:`CrosscutError`,
so callers can catch the whole family at once.  Names mirror the failure
they signal; most carry a short diagnostic message and, where useful,
structured context on ``args``.
"""


class CrosscutError(Exception):
    """Base class for all crosscut errors."""


class NonImmersed(CrosscutError):
    """Curve speed drops to (numerical) zero; not an immersion."""


class IndexUnresolved(CrosscutError):
    """Rotation-index integral too far from every integer (under-sampling)."""


class ContinuumIntersection(CrosscutError):
    """Curve retraces an arc; self-intersections form a continuum."""


class NotNormalized(CrosscutError):
    """Operation requires a unit-speed curve of length 2*pi."""


class UncleanInput(CrosscutError):
    """Operation requires clean curves (transversal double-points only)."""


class DichotomyViolation(CrosscutError):
    """Measured attributes contradict the central-loop dichotomy.

    Signals a numerical-tolerance failure; never swallowed silently.
    """


class GenerationExhausted(CrosscutError):
    """Rejection sampling failed too many times in a row."""


class InvalidSpec(CrosscutError):
    """Malformed or out-of-range generator specification."""


class NonTransverseContact(CrosscutError):
    """Slicing plane tangent to the surface within tolerance."""


class ComponentLost(CrosscutError):
    """Cross-cut tracking between nearby planes became ambiguous."""


class IndexJump(CrosscutError):
    """Rotation index changed across a sweep; left the good-patch regime."""


class NotCentralError(CrosscutError):
    """A cross-cut expected to be central has no detectable center."""


class DegenerateInput(CrosscutError):
    """Input carries no usable geometric information (e.g. coincident points)."""


class StepTooCoarse(CrosscutError):
    """Discrete tangent turns by more than pi/2 in one step."""
