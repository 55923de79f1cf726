"""Distance-dependent pixel scale calibration.

The apparent pixels-per-centimeter of an object depends on how far it sits
from the background wall. Calibration photographs a reference cube at a few
known distances per view, fits px_per_cm as a line in distance, and stores
one line per view in a plain-text profile.
"""

from dataclasses import dataclass
from datetime import datetime, timezone
from math import fsum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import CalibrationMissing, DegenerateFit, InsufficientData, NonPositiveScale

_MAGIC = "footmetry calibration v1"


@dataclass(frozen=True)
class ScaleObservation:
    distance_px: float
    px_per_cm: float


@dataclass(frozen=True)
class ScaleFunction:
    """px_per_cm as a line in distance-to-background pixels."""

    slope: float
    intercept: float
    view: str = ""

    def __call__(self, distance_px: float) -> float:
        return self.slope * distance_px + self.intercept


def fit_scale(observations: Sequence[ScaleObservation], view: str = "") -> ScaleFunction:
    """Ordinary least squares through the observations.

    Solves the normal equations directly; with two points the line passes
    through both exactly.
    """
    if len(observations) < 2:
        raise InsufficientData(f"need at least 2 observations, got {len(observations)}")
    xs = [o.distance_px for o in observations]
    ys = [o.px_per_cm for o in observations]
    n = len(xs)
    sx = fsum(xs)
    sy = fsum(ys)
    sxx = fsum(x * x for x in xs)
    sxy = fsum(x * y for x, y in zip(xs, ys))
    den = n * sxx - sx * sx
    if den == 0.0:
        raise DegenerateFit("all observations share one distance; the line is undetermined")
    slope = (n * sxy - sx * sy) / den
    intercept = (sy * sxx - sx * sxy) / den
    return ScaleFunction(slope=slope, intercept=intercept, view=view)


def _scale_at(fn: ScaleFunction, distance_px: float) -> float:
    s = fn(distance_px)
    if s <= 0.0:
        raise NonPositiveScale(
            f"scale {s:.4f} px/cm at distance {distance_px} px; calibration does not cover this range"
        )
    return s


def px_to_cm(fn: ScaleFunction, length_px: float, distance_px: float) -> float:
    return length_px / _scale_at(fn, distance_px)


def cm_to_px(fn: ScaleFunction, length_cm: float, distance_px: float) -> float:
    return length_cm * _scale_at(fn, distance_px)


@dataclass(frozen=True)
class CalibrationProfile:
    """Fitted scale lines per view plus the observations they came from."""

    functions: Mapping[str, ScaleFunction]
    observations: Mapping[str, tuple[ScaleObservation, ...]]
    fitted: str

    def require(self, view: str) -> ScaleFunction:
        fn = self.functions.get(view)
        if fn is None:
            have = ", ".join(sorted(self.functions)) or "none"
            raise CalibrationMissing(f"no calibration for view {view!r} (have: {have})")
        return fn


def build_profile(
    observations_by_view: Mapping[str, Iterable[ScaleObservation]],
    fitted: str | None = None,
) -> CalibrationProfile:
    if fitted is None:
        fitted = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    functions = {}
    obs = {}
    for view, items in observations_by_view.items():
        items = tuple(items)
        functions[view] = fit_scale(items, view)
        obs[view] = items
    if not functions:
        raise ValueError("profile needs at least one view")
    return CalibrationProfile(functions=functions, observations=obs, fitted=fitted)


def dumps(profile: CalibrationProfile) -> str:
    """Serialize as a versioned, diffable key-value text. Floats are written
    with repr so they round-trip exactly."""
    lines = [_MAGIC, f"fitted {profile.fitted}"]
    for view in sorted(profile.functions):
        fn = profile.functions[view]
        lines.append("")
        lines.append(f"view {view}")
        lines.append(f"slope {fn.slope!r}")
        lines.append(f"intercept {fn.intercept!r}")
        for o in profile.observations.get(view, ()):
            lines.append(f"obs {o.distance_px!r} {o.px_per_cm!r}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> CalibrationProfile:
    lines = [ln.strip() for ln in text.splitlines()]
    if not lines or lines[0] != _MAGIC:
        raise ValueError(f"not a calibration profile (expected header {_MAGIC!r})")
    fitted = ""
    functions: dict[str, ScaleFunction] = {}
    observations: dict[str, tuple[ScaleObservation, ...]] = {}
    view = None
    slope = intercept = None

    def flush():
        nonlocal slope, intercept
        if view is not None:
            if slope is None or intercept is None:
                raise ValueError(f"view {view!r} is missing slope or intercept")
            functions[view] = ScaleFunction(slope=slope, intercept=intercept, view=view)
            slope = intercept = None

    for ln in lines[1:]:
        if not ln or ln.startswith("#"):
            continue
        key, _, rest = ln.partition(" ")
        if key == "fitted":
            fitted = rest
        elif key == "view":
            flush()
            view = rest
            observations[view] = ()
        elif key == "slope":
            slope = float(rest)
        elif key == "intercept":
            intercept = float(rest)
        elif key == "obs":
            if view is None:
                raise ValueError("obs line before any view")
            d, p = rest.split()
            observations[view] += (ScaleObservation(float(d), float(p)),)
        else:
            raise ValueError(f"unknown profile line: {ln!r}")
    flush()
    if not functions:
        raise ValueError("profile contains no views")
    return CalibrationProfile(functions=functions, observations=observations, fitted=fitted)


def save(profile: CalibrationProfile, path: str | Path) -> None:
    Path(path).write_text(dumps(profile), encoding="utf-8")


def load(path: str | Path) -> CalibrationProfile:
    return loads(Path(path).read_text(encoding="utf-8"))
