"""Exception types raised across the package."""


class HsiForgeError(Exception):
    """Base class for all errors raised by hsi_forge."""


# ---- loading / parsing ----

class ParseError(HsiForgeError):
    """Input file is malformed for its declared format."""


class SchemaError(ParseError):
    """File parses but is missing required fields or properties."""


class EmptyScene(HsiForgeError):
    """Scene contains no points."""


class InconsistentVertexCount(ParseError):
    """Motion frames do not share a single vertex count."""


class MissingRegion(HsiForgeError):
    """A required body region (feet, hips, pelvis) is absent or empty."""


class IndexOutOfRange(HsiForgeError):
    """Vertex/marker indices fall outside [0, V) or the set is empty."""


# ---- scene structure ----

class NoObjects(HsiForgeError):
    """Scene has no labeled object instances above the point-count floor."""


class EmptySurface(HsiForgeError):
    """Object has no surface points to sample from."""


class NoValidTarget(HsiForgeError):
    """No floor position satisfies the clearance constraints."""


# ---- alignment ----

class NoInteractableObject(HsiForgeError):
    """Scene holds no instance whose class is eligible for the action."""


class UnknownAction(HsiForgeError):
    """No constraint policy registered for the action tag."""


class ExhaustedTries(HsiForgeError):
    """Rejection sampler hit its budget without a fully valid placement.

    Carries the report of the best attempt seen (most sub-checks passed).
    """

    def __init__(self, message, best_report=None, attempts=0):
        super().__init__(message)
        self.best_report = best_report
        self.attempts = attempts


# ---- language ----

class NoUniqueReference(HsiForgeError):
    """No (relation, anchor) pair discriminates the target from its distractors."""


class Ambiguous(HsiForgeError):
    """Description structure matches two or more instances."""


class NoMatch(HsiForgeError):
    """Description structure matches no instance."""


# ---- metrics ----

class ShapeMismatch(HsiForgeError):
    """Array arguments disagree in shape where agreement is required."""


class DegenerateBody(HsiForgeError):
    """Too few body points to estimate inside/outside signs."""
