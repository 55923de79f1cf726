"""Synthetic labeled scenes for benchmarking and end-to-end tests.

Every pixel is produced by integer arithmetic seeded through a counter-based
splitmix64 stream, so a (spec, seed) pair renders the same bytes on any
platform. A scene is a single dark object on a bright background with an
optional soft penumbra, an optional linear illumination falloff, and
additive noise; the pre-noise object mask ships along as ground truth.
"""

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .calibration import CalibrationProfile, ScaleFunction, ScaleObservation, build_profile
from .errors import SpecInvalid
from .imaging import GrayImage, Mask

# splitmix64 constants (Steele, Lea and Flood 2014)
_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, n: int, start: int = 0) -> np.ndarray:
    """Outputs start+1 .. start+n of the splitmix64 stream for `seed`.

    z_i = mix(seed + i * golden); counter form, so any slice of the stream
    can be generated independently.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    with np.errstate(over="ignore"):
        i = np.arange(start + 1, start + n + 1, dtype=np.uint64)
        z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + i * _SM_GAMMA
        z = (z ^ (z >> np.uint64(30))) * _SM_M1
        z = (z ^ (z >> np.uint64(27))) * _SM_M2
        return z ^ (z >> np.uint64(31))


def _noise(seed: int, shape: tuple[int, int], sigma: int, start: int = 0) -> np.ndarray:
    """Integer approximate-Gaussian noise: an Irwin-Hall sum of twelve
    16-bit uniforms, centered, scaled by sigma, rounded half up. Stddev is
    sigma to within the uniform-sum approximation."""
    n = shape[0] * shape[1]
    draws = splitmix64(seed, 12 * n, start=start) & np.uint64(0xFFFF)
    s = draws.reshape(12, n).sum(axis=0, dtype=np.int64)
    dev = s - 6 * 65536  # zero-centered, stddev 65536
    return ((dev * sigma + 32768) // 65536).reshape(shape)


@dataclass(frozen=True)
class Ellipse:
    cx: int
    cy: int
    semi_x: int
    semi_y: int


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[tuple[int, int], ...]  # (x, y) pairs


def foot_polygon(length_px: int, width_px: int, x0: int = 0, y0: int = 0) -> Polygon:
    """Foot-sole outline scaled to the given pixel box, heel at low x."""
    unit = (
        (0.00, 0.50), (0.04, 0.25), (0.14, 0.10), (0.30, 0.04), (0.55, 0.01),
        (0.76, 0.00), (0.92, 0.06), (1.00, 0.30), (0.97, 0.55), (0.88, 0.70),
        (0.76, 0.72), (0.58, 0.69), (0.44, 0.74), (0.27, 0.88), (0.11, 0.93),
        (0.02, 0.76),
    )
    verts = tuple(
        (x0 + round(ux * (length_px - 1)), y0 + round(uy * (width_px - 1))) for ux, uy in unit
    )
    return Polygon(vertices=verts)


def _raster_ellipse(e: Ellipse, w: int, h: int) -> np.ndarray:
    ys = np.arange(h, dtype=np.int64)[:, None]
    xs = np.arange(w, dtype=np.int64)[None, :]
    a = np.int64(e.semi_x)
    b = np.int64(e.semi_y)
    return ((xs - e.cx) * b) ** 2 + ((ys - e.cy) * a) ** 2 <= (a * b) ** 2


def _raster_polygon(p: Polygon, w: int, h: int) -> np.ndarray:
    # even-odd crossing count of a horizontal ray through each pixel center
    ys = np.arange(h, dtype=np.float64)[:, None]
    xs = np.arange(w, dtype=np.float64)[None, :]
    inside = np.zeros((h, w), dtype=bool)
    verts = p.vertices
    for k in range(len(verts)):
        x1, y1 = verts[k]
        x2, y2 = verts[(k + 1) % len(verts)]
        if y1 == y2:
            continue
        straddle = (y1 > ys) != (y2 > ys)
        cross_x = (x2 - x1) * (ys - y1) / (y2 - y1) + x1
        inside ^= straddle & (xs < cross_x)
    return inside


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    shape: Ellipse | Polygon
    object_gray: int = 40
    background_gray: int = 220
    noise_sigma: int = 0
    penumbra_px: int = 0
    # (axis, per-pixel magnitude); brightness drops along the axis
    gradient: tuple[str, float] | None = None
    seed: int = 0


@dataclass(frozen=True)
class LabeledScene:
    image: GrayImage
    truth: Mask
    spec: SceneSpec
    extents: Mapping[str, int] = field(repr=False)


def _dilate8(m: np.ndarray) -> np.ndarray:
    h, w = m.shape
    p = np.zeros((h + 2, w + 2), dtype=bool)
    p[1:-1, 1:-1] = m
    return (
        p[:-2, :-2] | p[:-2, 1:-1] | p[:-2, 2:]
        | p[1:-1, :-2] | p[1:-1, 1:-1] | p[1:-1, 2:]
        | p[2:, :-2] | p[2:, 1:-1] | p[2:, 2:]
    )


def _validate(spec: SceneSpec) -> None:
    if spec.width < 8 or spec.height < 8:
        raise SpecInvalid(f"scene must be at least 8x8, got {spec.width}x{spec.height}")
    for name in ("object_gray", "background_gray"):
        v = getattr(spec, name)
        if not 0 <= v <= 255:
            raise SpecInvalid(f"{name} must be in [0, 255], got {v}")
    if spec.object_gray == spec.background_gray:
        raise SpecInvalid("object and background gray levels must differ")
    if spec.noise_sigma < 0:
        raise SpecInvalid(f"noise_sigma must be >= 0, got {spec.noise_sigma}")
    if spec.penumbra_px < 0:
        raise SpecInvalid(f"penumbra_px must be >= 0, got {spec.penumbra_px}")
    if spec.gradient is not None:
        axis, mag = spec.gradient
        if axis not in ("horizontal", "vertical"):
            raise SpecInvalid(f"gradient axis must be horizontal or vertical, got {axis!r}")
        if mag < 0:
            raise SpecInvalid(f"gradient magnitude must be >= 0, got {mag}")


def render(spec: SceneSpec) -> tuple[np.ndarray, np.ndarray]:
    """Render to (uint8 pixels, bool truth). Composition order: flat object
    over background, penumbra rings, illumination gradient, noise, clamp."""
    _validate(spec)
    h, w = spec.height, spec.width
    if isinstance(spec.shape, Ellipse):
        truth = _raster_ellipse(spec.shape, w, h)
    elif isinstance(spec.shape, Polygon):
        truth = _raster_polygon(spec.shape, w, h)
    else:
        raise SpecInvalid(f"unknown shape type {type(spec.shape).__name__}")
    if not truth.any():
        raise SpecInvalid("shape covers no pixels")
    if truth.all():
        raise SpecInvalid("shape covers the whole frame")

    obj, bg = spec.object_gray, spec.background_gray
    canvas = np.full((h, w), bg, dtype=np.int32)
    canvas[truth] = obj

    # penumbra: each ring one step further out blends linearly toward bg
    cur = truth
    for k in range(1, spec.penumbra_px + 1):
        grown = _dilate8(cur)
        ring = grown & ~cur
        canvas[ring] = obj + ((bg - obj) * k) // (spec.penumbra_px + 1)
        cur = grown

    if spec.gradient is not None:
        axis, mag = spec.gradient
        milli = round(mag * 1000)
        coords = np.arange(w if axis == "horizontal" else h, dtype=np.int64)
        drop = (milli * coords) // 1000
        canvas = canvas - (drop[None, :] if axis == "horizontal" else drop[:, None])

    if spec.noise_sigma > 0:
        canvas = canvas + _noise(spec.seed, (h, w), spec.noise_sigma)

    return np.clip(canvas, 0, 255).astype(np.uint8), truth


def _extents(truth: np.ndarray) -> dict[str, int]:
    rows = np.flatnonzero(truth.any(axis=1))
    cols = np.flatnonzero(truth.any(axis=0))
    return {
        "min_row": int(rows[0]),
        "max_row": int(rows[-1]),
        "min_col": int(cols[0]),
        "max_col": int(cols[-1]),
        "length_px": int(cols[-1] - cols[0] + 1),
        "width_px": int(rows[-1] - rows[0] + 1),
        "area_px": int(truth.sum()),
    }


def generate(spec: SceneSpec) -> LabeledScene:
    pixels, truth = render(spec)
    return LabeledScene(
        image=GrayImage(pixels),
        truth=Mask(truth),
        spec=spec,
        extents=_extents(truth),
    )


def iou(a: Mask, b: Mask) -> float:
    """Intersection over union; two empty masks count as identical (1.0)."""
    if a.accepted.shape != b.accepted.shape:
        raise ValueError(f"mask shapes differ: {a.accepted.shape} vs {b.accepted.shape}")
    inter = int(np.count_nonzero(a.accepted & b.accepted))
    union = int(np.count_nonzero(a.accepted | b.accepted))
    return 1.0 if union == 0 else inter / union


# ---------------------------------------------------------------------------
# lighting tiers

TIERS = ("good", "average", "poor")

_TIER_PARAMS = {
    # (noise_sigma, gradient, penumbra_px)
    "good": (2, None, 0),
    "average": (6, ("horizontal", 0.15), 2),
    "poor": (10, ("horizontal", 0.35), 3),
}


def lighting_tier(tier: str, seed: int = 0) -> SceneSpec:
    """Scene spec for one of the three lighting tiers.

    Contrast, gradient, and noise levels are fixed per tier; the ellipse
    geometry jitters with the seed inside bounds that keep the object
    fraction within the feasibility window.
    """
    if tier not in _TIER_PARAMS:
        raise SpecInvalid(f"unknown tier {tier!r}; expected one of {', '.join(TIERS)}")
    sigma, gradient, penumbra = _TIER_PARAMS[tier]
    d = splitmix64(seed ^ 0x5CE, 4)
    cx = 220 + int(d[0] % 41)
    cy = 115 + int(d[1] % 41)
    sx = 152 + int(d[2] % 17)
    sy = 69 + int(d[3] % 17)
    return SceneSpec(
        width=480,
        height=270,
        shape=Ellipse(cx=cx, cy=cy, semi_x=sx, semi_y=sy),
        object_gray=40,
        background_gray=220,
        noise_sigma=sigma,
        penumbra_px=penumbra,
        gradient=gradient,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# two-view foot photos with known ground truth

PHOTO_W = 960
PHOTO_SIDE_H = 280
PHOTO_BAND_H = 3
PHOTO_UNDER_H = 300
PHOTO_BG = 150  # mid gray, so the 255 divider clears the mean+2*std band rule
PHOTO_OBJ = 40
PHOTO_SIGMA = 2
PHOTO_PENUMBRA = 1

SIDE_SCALE = ScaleFunction(slope=-0.045, intercept=31.5)
UNDER_SCALE = ScaleFunction(slope=-0.03, intercept=21.0)


@dataclass(frozen=True)
class FootPhotoSpec:
    seed: int
    length_cm: float
    width_cm: float
    height_cm: float
    distance_px: int


@dataclass(frozen=True)
class FootPhoto:
    image: GrayImage
    profile: CalibrationProfile
    truth: Mapping[str, float]
    split_row: int


def sample_photo_spec(seed: int) -> FootPhotoSpec:
    """Deterministic plausible foot dimensions for a seed."""
    d = splitmix64(seed ^ 0xF007, 4)
    return FootPhotoSpec(
        seed=seed,
        length_cm=25.5 + int(d[0] % 31) / 10.0,
        width_cm=9.5 + int(d[1] % 14) / 10.0,
        height_cm=6.0 + int(d[2] % 21) / 10.0,
        distance_px=20 + int(d[3] % 13),
    )


def scanner_profile(fitted: str = "synthetic") -> CalibrationProfile:
    """Calibration profile matching the synthetic scanner geometry, built
    from observations sampled exactly on the two scale lines."""
    obs = {
        "side": [ScaleObservation(d, SIDE_SCALE(d)) for d in (10.0, 25.0, 40.0)],
        "under": [ScaleObservation(d, UNDER_SCALE(d)) for d in (10.0, 25.0, 40.0)],
    }
    return build_profile(obs, fitted=fitted)


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def _side_silhouette(length_px: int, height_px: int, c0: int, h: int, w: int) -> np.ndarray:
    """Solid side profile: heel rising into the leg (which touches the top
    edge), flat ankle, then a monotone descent over the instep to the toe."""
    b = h - 1
    cols = np.arange(c0, c0 + length_px)
    anchors_x = [
        c0,
        c0 + 0.20 * length_px,
        c0 + 0.34 * length_px,
        c0 + 0.50 * length_px,
        c0 + 0.82 * length_px,
        c0 + length_px - 1,
    ]
    anchors_y = [
        b - round(0.80 * height_px),
        0.0,
        0.0,
        float(b - height_px + 1),
        float(b - round(0.55 * height_px)),
        float(b - round(0.18 * height_px)),
    ]
    top = np.floor(np.interp(cols, anchors_x, anchors_y) + 0.5).astype(np.int64)
    top = np.clip(top, 0, b)
    # height is defined at the midpoint column; pin it exactly
    mid = (c0 + (c0 + length_px - 1)) // 2
    top[mid - c0] = b - height_px + 1
    mask = np.zeros((h, w), dtype=bool)
    for c, t in zip(cols, top):
        mask[t : b + 1, c] = True
    return mask


def generate_foot_photo(spec: FootPhotoSpec) -> FootPhoto:
    """Render a two-view scanner photo (side above, divider band, under
    view below) and return it with the exact ground truth implied by the
    realized masks and the synthetic calibration."""
    d = spec.distance_px
    fs = SIDE_SCALE(d)
    fu = UNDER_SCALE(d)
    if fs <= 0 or fu <= 0:
        raise SpecInvalid(f"distance {d} px is outside the calibrated range")

    side_len = _round_half_up(spec.length_cm * fs)
    side_hgt = _round_half_up(spec.height_cm * fs)
    under_len = _round_half_up(spec.length_cm * fu)
    under_wid = _round_half_up(spec.width_cm * fu)

    c0 = 30
    if c0 + side_len + PHOTO_PENUMBRA + 2 > PHOTO_W:
        raise SpecInvalid(f"side view of {side_len} px does not fit the {PHOTO_W} px frame")
    if d + under_wid + PHOTO_PENUMBRA + 2 > PHOTO_UNDER_H:
        raise SpecInvalid("under view does not fit below the glass")

    side_truth = _side_silhouette(side_len, side_hgt, c0, PHOTO_SIDE_H, PHOTO_W)
    under_truth = _raster_ellipse(
        Ellipse(
            cx=PHOTO_W // 2,
            cy=d + under_wid // 2,
            semi_x=under_len // 2,
            semi_y=under_wid // 2,
        ),
        PHOTO_W,
        PHOTO_UNDER_H,
    )

    def compose(truth: np.ndarray) -> np.ndarray:
        canvas = np.full(truth.shape, PHOTO_BG, dtype=np.int32)
        canvas[truth] = PHOTO_OBJ
        cur = truth
        for k in range(1, PHOTO_PENUMBRA + 1):
            grown = _dilate8(cur)
            ring = grown & ~cur
            canvas[ring] = PHOTO_OBJ + ((PHOTO_BG - PHOTO_OBJ) * k) // (PHOTO_PENUMBRA + 1)
            cur = grown
        return canvas

    photo = np.full((PHOTO_SIDE_H + PHOTO_BAND_H + PHOTO_UNDER_H, PHOTO_W), 255, dtype=np.int32)
    photo[:PHOTO_SIDE_H] = compose(side_truth)
    photo[PHOTO_SIDE_H + PHOTO_BAND_H :] = compose(under_truth)
    photo += _noise(spec.seed ^ 0xBEEF, photo.shape, PHOTO_SIGMA)
    image = GrayImage(np.clip(photo, 0, 255).astype(np.uint8))

    # ground truth from the realized masks and the true distance
    se = _extents(side_truth)
    ue = _extents(under_truth)
    mid = (se["min_col"] + se["max_col"]) // 2
    col = side_truth[:, mid]
    height_px = int(PHOTO_SIDE_H - 1 - np.argmax(col) + 1)
    truth = {
        "length_side_cm": se["length_px"] / fs,
        "length_under_cm": ue["length_px"] / fu,
        "height_cm": height_px / fs,
        "width_cm": ue["width_px"] / fu,
        "distance_to_background_px": float(ue["min_row"]),
    }
    return FootPhoto(
        image=image,
        profile=scanner_profile(),
        truth=truth,
        split_row=PHOTO_SIDE_H + PHOTO_BAND_H // 2,
    )
