"""Foot measurement from two-view scanner photos.

Public surface: image handling (imaging), the transition-noise threshold
search (soit), fifteen classical baselines (classical), distance-dependent
calibration (calibration), the measurement pipeline (measure), synthetic
labeled scenes (scenes), agreement statistics (stats), and the CLI/HTTP
entry points (cli, service).
"""

from ._kernels import USING_NUMBA, backend_name, warmup
from .calibration import (
    CalibrationProfile,
    ScaleFunction,
    ScaleObservation,
    build_profile,
    cm_to_px,
    fit_scale,
    px_to_cm,
)
from .classical import MethodId, classical_threshold
from .errors import (
    BandNotFound,
    CalibrationMissing,
    ColumnEmpty,
    CurveNotFound,
    DecodeError,
    DegenerateFit,
    DegenerateHistogram,
    EmptyInput,
    EmptyMask,
    EmptyRegion,
    FootmetryError,
    FootNotFound,
    InsufficientData,
    NoFeasibleThreshold,
    NonPositiveScale,
    NotBimodal,
    SpecInvalid,
    StageError,
    UnsupportedFormat,
    ZeroVariance,
)
from .imaging import (
    GrayImage,
    Histogram,
    Mask,
    ViewPair,
    gray_to_png,
    histogram,
    load_gray,
    mask_from_png,
    mask_to_png,
    split_views,
)
from .measure import (
    FootMeasurements,
    MeasureParams,
    estimate_background,
    measure_foot,
    side_height,
    side_length,
    under_measurements,
    upper_curve,
)
from .scenes import (
    FootPhoto,
    FootPhotoSpec,
    LabeledScene,
    SceneSpec,
    generate,
    generate_foot_photo,
    iou,
    lighting_tier,
    sample_photo_spec,
    scanner_profile,
    splitmix64,
)
from .soit import (
    NoiseReport,
    SearchConfig,
    SearchResult,
    binarize,
    curve_to_csv,
    denoise,
    noise_score,
    soit_search,
)

__version__ = "0.1.0"

__all__ = [
    "BandNotFound",
    "CalibrationMissing",
    "CalibrationProfile",
    "ColumnEmpty",
    "CurveNotFound",
    "DecodeError",
    "DegenerateFit",
    "DegenerateHistogram",
    "EmptyInput",
    "EmptyMask",
    "EmptyRegion",
    "FootMeasurements",
    "FootNotFound",
    "FootPhoto",
    "FootPhotoSpec",
    "FootmetryError",
    "GrayImage",
    "Histogram",
    "InsufficientData",
    "LabeledScene",
    "Mask",
    "MeasureParams",
    "MethodId",
    "NoFeasibleThreshold",
    "NoiseReport",
    "NonPositiveScale",
    "NotBimodal",
    "ScaleFunction",
    "ScaleObservation",
    "SceneSpec",
    "SearchConfig",
    "SearchResult",
    "SpecInvalid",
    "StageError",
    "USING_NUMBA",
    "UnsupportedFormat",
    "ViewPair",
    "ZeroVariance",
    "backend_name",
    "binarize",
    "build_profile",
    "classical_threshold",
    "cm_to_px",
    "curve_to_csv",
    "denoise",
    "estimate_background",
    "fit_scale",
    "generate",
    "generate_foot_photo",
    "gray_to_png",
    "histogram",
    "iou",
    "lighting_tier",
    "load_gray",
    "mask_from_png",
    "mask_to_png",
    "measure_foot",
    "noise_score",
    "px_to_cm",
    "sample_photo_spec",
    "scanner_profile",
    "side_height",
    "side_length",
    "soit_search",
    "split_views",
    "splitmix64",
    "under_measurements",
    "upper_curve",
    "warmup",
    "__version__",
]
