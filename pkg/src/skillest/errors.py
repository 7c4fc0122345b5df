"""Exception hierarchy shared across the package."""


class SkillEstimationError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(SkillEstimationError):
    """A skill or model parameter is outside its valid domain."""


class MismatchedResolutionError(SkillEstimationError):
    """Reward grid and noise kernel were built at different resolutions."""


class InvalidObservationError(SkillEstimationError):
    """An observation produced a non-finite likelihood (e.g. NaN coordinates)."""


class DegenerateFilterError(SkillEstimationError):
    """Every particle (or hypothesis) carries zero posterior weight."""


class DataError(SkillEstimationError):
    """Input data is missing, malformed, or insufficient."""
