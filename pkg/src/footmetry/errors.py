"""Exception types shared across the package.

Every error raised on purpose derives from FootmetryError so callers can
catch one base type. The measurement pipeline attaches a ``stage`` label to
errors it re-raises; ``__str__`` appends it when present.
"""


class FootmetryError(Exception):
    """Base class for all package errors."""

    stage: str | None = None

    def __str__(self) -> str:
        base = super().__str__()
        if self.stage:
            return f"{base} [stage: {self.stage}]"
        return base


class DecodeError(FootmetryError):
    """Input bytes could not be decoded as an image."""


class UnsupportedFormat(FootmetryError):
    """Decoded image has a format or pixel mode outside the supported set."""


class BandNotFound(FootmetryError):
    """No divider band satisfied the brightness rule during view splitting."""


class NoFeasibleThreshold(FootmetryError):
    """Every candidate threshold failed the accepted-fraction window."""


class DegenerateHistogram(FootmetryError):
    """Histogram has too little support for the requested method."""


class NotBimodal(FootmetryError):
    """Iterative smoothing never produced exactly two modes."""


class CalibrationMissing(FootmetryError):
    """No scale function available for the requested view."""


class NonPositiveScale(FootmetryError):
    """Scale function evaluated to a non-positive pixels-per-centimeter."""


class InsufficientData(FootmetryError):
    """Too few values for the requested fit or statistic."""


class DegenerateFit(FootmetryError):
    """Fit inputs leave the line undetermined (single distinct distance)."""


class EmptyInput(FootmetryError):
    """An aggregate was asked for on no data."""


class ZeroVariance(FootmetryError):
    """A constant sample where spread is required."""


class EmptyRegion(FootmetryError):
    """Sampling region holds no pixels."""


class FootNotFound(FootmetryError):
    """No column of the side view is darker than the background cutoff."""


class ColumnEmpty(FootmetryError):
    """The probed column holds no pixel darker than the background cutoff."""


class CurveNotFound(FootmetryError):
    """Top profile never descends, so there is no fore curve to trace."""


class EmptyMask(FootmetryError):
    """Mask has no accepted pixels to measure."""


class SpecInvalid(FootmetryError):
    """Scene description violates a generator constraint."""


class StageError(FootmetryError):
    """Unexpected failure inside a measurement stage, labeled with the stage."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
