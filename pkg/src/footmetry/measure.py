"""Foot measurements from a two-view scanner photo.

The under view (through the glass) is segmented with the threshold search
and yields foot length, width, and the distance to the background wall.
The side view is scanned directly against the estimated background level
and yields length, height at half length, and the upper fore-curve trace.
Pixel spans convert to centimeters through the per-view calibration lines
evaluated at the measured distance.
"""

from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .calibration import CalibrationProfile, px_to_cm
from .errors import (
    ColumnEmpty,
    CurveNotFound,
    EmptyMask,
    EmptyRegion,
    FootmetryError,
    FootNotFound,
    StageError,
)
from .imaging import GrayImage, Mask, split_views
from .soit import SearchConfig, soit_search


@dataclass(frozen=True)
class MeasureParams:
    """Knobs for one measurement run.

    background None means estimate from the side view; delta is how far
    below background a pixel must sit to count as foot; curve_fraction is
    the fraction of the foot span the upper curve covers; split_row None
    auto-detects the divider band.
    """

    background: int | None = None
    delta: int = 50
    curve_fraction: float = 0.5
    bias_correction_cm: float = 0.0
    split_row: int | None = None
    band_thickness: int = 3
    bg_region: tuple[int, int, int, int] = (0, 0, 20, 20)  # row, col, height, width
    search: SearchConfig = field(default_factory=SearchConfig)

    def __post_init__(self):
        if self.background is not None and not 0 <= self.background <= 255:
            raise ValueError(f"background must be in [0, 255], got {self.background}")
        if not 0 < self.delta < 255:
            raise ValueError(f"delta must be in (0, 255), got {self.delta}")
        if not 0.0 < self.curve_fraction <= 1.0:
            raise ValueError(f"curve_fraction must be in (0, 1], got {self.curve_fraction}")
        if self.band_thickness < 1:
            raise ValueError(f"band_thickness must be >= 1, got {self.band_thickness}")


@dataclass(frozen=True)
class FootMeasurements:
    length_side_cm: float
    length_under_cm: float
    height_cm: float
    width_cm: float
    distance_to_background_px: int
    upper_curve: tuple[tuple[int, int], ...]
    diagnostics: Mapping[str, object] = field(repr=False)


def estimate_background(img: GrayImage, region: tuple[int, int, int, int] = (0, 0, 20, 20)) -> int:
    """Mean gray of a sample region (clamped to the image), rounded half up.
    The default region is the top-left corner, which the scanner keeps
    clear of the foot."""
    r, c, rh, rw = region
    if rh < 1 or rw < 1 or not (0 <= r < img.height) or not (0 <= c < img.width):
        raise EmptyRegion(f"region {region} holds no pixels of a {img.height}x{img.width} image")
    patch = img.pixels[r : min(r + rh, img.height), c : min(c + rw, img.width)]
    total = int(patch.sum(dtype=np.int64))
    return int((2 * total + patch.size) // (2 * patch.size))  # floor(mean + 0.5)


def _dark_columns(side: GrayImage, background: int, delta: int) -> np.ndarray:
    cutoff = background - delta
    return (side.pixels.astype(np.int32) < cutoff).any(axis=0)


def side_length(side: GrayImage, background: int, delta: int) -> tuple[int, int]:
    """Columns bounding the foot in the side view.

    The span starts at the first column holding any pixel darker than
    background - delta and ends just before the first all-bright column
    after that (or at the last column when none is all bright).
    """
    dark = _dark_columns(side, background, delta)
    if not dark.any():
        raise FootNotFound(
            f"no column darker than background {background} - delta {delta}; nothing to measure"
        )
    start = int(np.argmax(dark))
    after = np.flatnonzero(~dark[start:])
    end = side.width - 1 if after.size == 0 else start + int(after[0]) - 1
    return start, end


def side_height(side: GrayImage, background: int, delta: int, col: int) -> tuple[int, int]:
    """Foot rows in one column, scanned upward from the image bottom.

    bottom_row is the first dark pixel met on the way up; top_row is the
    last dark pixel of that contiguous run before the bright background
    above. Height in pixels is bottom_row - top_row + 1. The pipeline
    probes the half-length column of the side span.
    """
    dark = side.pixels[:, col].astype(np.int32) < background - delta
    below = np.flatnonzero(dark)
    if below.size == 0:
        raise ColumnEmpty(f"column {col} holds no pixel darker than {background - delta}")
    bottom = int(below[-1])
    top = bottom
    while top > 0 and dark[top - 1]:
        top -= 1
    return bottom, top


def upper_curve(
    side: GrayImage,
    background: int,
    delta: int,
    start: int,
    end: int,
    fraction: float,
) -> tuple[tuple[int, int], ...]:
    """Fore-curve trace along the instep.

    The silhouette top profile is smoothed over three columns; inside the
    foot span the profile is flat (zero gradient) over the ankle, and the
    fore curve begins at the first column past the highest point where the
    smoothed profile starts dropping (row index rising). The trace records
    raw (column, top row) pairs for floor(fraction * span) columns,
    truncated at the foot end.
    """
    cutoff = background - delta
    dark = side.pixels.astype(np.int32) < cutoff
    span = dark[:, start : end + 1]
    has = span.any(axis=0)
    top = np.where(has, np.argmax(span, axis=0), side.height).astype(np.float64)

    kernel = np.full(3, 1.0 / 3.0)
    smooth = np.convolve(top, kernel, mode="same")
    # convolve zero-pads; patch the two ends with their raw values
    if top.size >= 1:
        smooth[0] = top[0]
        smooth[-1] = top[-1]

    highest = int(np.argmin(smooth))
    grad = np.diff(smooth)
    onset_rel = None
    for c in range(highest, grad.size):
        if grad[c] > 0.0:
            onset_rel = c + 1
            break
    if onset_rel is None:
        raise CurveNotFound("top profile never descends after the ankle; no fore curve")

    n = int(np.floor(fraction * (end - start + 1)))
    cols = range(start + onset_rel, min(start + onset_rel + n, end + 1))
    return tuple((int(c), int(top[c - start])) for c in cols)


def under_measurements(mask: Mask) -> tuple[int, int, int]:
    """(length_px, width_px, distance_to_background_px) of the under-view
    mask: extent across columns, extent across rows, and the gap from the
    view's top edge (the background wall) to the nearest accepted pixel."""
    details = _under_details(mask)
    return details["length_px"], details["width_px"], details["distance_to_background_px"]


def _under_details(mask: Mask) -> dict[str, object]:
    """under_measurements plus per-row widths and corner rows/cols for
    diagnostics."""
    acc = mask.accepted
    rows = np.flatnonzero(acc.any(axis=1))
    cols = np.flatnonzero(acc.any(axis=0))
    if rows.size == 0:
        raise EmptyMask("under-view mask is empty")
    row_widths = []
    for r in range(int(rows[0]), int(rows[-1]) + 1):
        line = np.flatnonzero(acc[r])
        row_widths.append(0 if line.size == 0 else int(line[-1] - line[0] + 1))
    return {
        "distance_to_background_px": int(rows[0]),
        "length_px": int(cols[-1] - cols[0] + 1),
        "width_px": int(rows[-1] - rows[0] + 1),
        "min_col": int(cols[0]),
        "max_col": int(cols[-1]),
        "max_row": int(rows[-1]),
        "row_widths": row_widths,
    }


@contextmanager
def _stage(name: str):
    """Label any error escaping a pipeline stage. Package errors keep their
    type and gain the stage tag; anything else wraps in StageError."""
    try:
        yield
    except FootmetryError as e:
        if e.stage is None:
            e.stage = name
        raise
    except Exception as e:
        raise StageError(name, e) from e


def measure_foot(
    img: GrayImage,
    profile: CalibrationProfile,
    params: MeasureParams | None = None,
) -> FootMeasurements:
    """Run the full pipeline on a two-view photo."""
    p = params or MeasureParams()

    with _stage("split"):
        views = split_views(img, p.split_row, band_thickness=p.band_thickness)

    with _stage("background"):
        bg = p.background if p.background is not None else estimate_background(views.side, p.bg_region)

    with _stage("calibration"):
        fn_side = profile.require("side")
        fn_under = profile.require("under")

    with _stage("under_threshold"):
        result = soit_search(views.under, p.search)

    with _stage("under_measure"):
        um = _under_details(result.mask)
        distance = um["distance_to_background_px"]

    with _stage("side_scan"):
        start, end = side_length(views.side, bg, p.delta)
        side_len_px = end - start + 1

    with _stage("side_height"):
        bottom, top = side_height(views.side, bg, p.delta, (start + end) // 2)
        height_px = bottom - top + 1

    with _stage("upper_curve"):
        curve = upper_curve(views.side, bg, p.delta, start, end, p.curve_fraction)

    with _stage("convert"):
        # the under view runs ~4 mm small (penumbra plus edge cleanup), so
        # the additive correction lands on its two outputs
        length_side = px_to_cm(fn_side, side_len_px, distance)
        length_under = px_to_cm(fn_under, um["length_px"], distance) + p.bias_correction_cm
        height = px_to_cm(fn_side, height_px, distance)
        width = px_to_cm(fn_under, um["width_px"], distance) + p.bias_correction_cm

    total = views.under.height * views.under.width
    diagnostics = {
        "split_row": views.split_row,
        "band_height": views.band_height,
        "background": bg,
        "threshold": result.best.threshold,
        "z": result.best.z,
        "nac": result.best.nac,
        "side_start_col": start,
        "side_end_col": end,
        "side_length_px": side_len_px,
        "side_bottom_row": bottom,
        "side_top_row": top,
        "height_px": height_px,
        "under_length_px": um["length_px"],
        "under_width_px": um["width_px"],
        "distance_to_background_px": distance,
        "row_widths": um["row_widths"],
        "curve_onset_col": curve[0][0] if curve else None,
        "curve": tuple(
            (rep.threshold, rep.z, rep.nac / total, rep.feasible) for rep in result.curve
        ),
    }
    return FootMeasurements(
        length_side_cm=length_side,
        length_under_cm=length_under,
        height_cm=height,
        width_cm=width,
        distance_to_background_px=distance,
        upper_curve=curve,
        diagnostics=diagnostics,
    )
