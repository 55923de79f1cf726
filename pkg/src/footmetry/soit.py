"""Single-object image thresholding.

A threshold candidate is scored by how noisy the resulting binary mask is:
the average of mean row transitions and mean column transitions, plus a
weighted penalty for accepted pixels touching the image border. The search
scans a threshold range, keeps only candidates whose accepted-pixel
fraction falls in a plausible object-size window, and returns the lowest
scoring one. A single histogram pass gives exact transition counts for
every threshold at once, so the scan costs O(pixels + 256).
"""

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import NoFeasibleThreshold
from .imaging import GrayImage, Mask

DARK = "dark"      # accepted means pixel <= threshold (dark object, bright background)
BRIGHT = "bright"  # accepted means pixel >= threshold


@dataclass(frozen=True)
class SearchConfig:
    """Threshold scan parameters.

    literal_divisor switches the row-noise normalization to the image width
    for compatibility with the formula as originally printed; the default
    divides row noise by the image height.
    """

    lo: int = 0
    hi: int = 255
    step: int = 1
    min_frac: float = 0.2
    max_frac: float = 0.7
    edge_weight: float = 20.0
    polarity: str = DARK
    literal_divisor: bool = False

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi <= 255):
            raise ValueError(f"need 0 <= lo <= hi <= 255, got lo={self.lo} hi={self.hi}")
        if self.step < 1:
            raise ValueError(f"step must be >= 1, got {self.step}")
        if not (0.0 <= self.min_frac < self.max_frac <= 1.0):
            raise ValueError(
                f"need 0 <= min_frac < max_frac <= 1, got {self.min_frac}, {self.max_frac}"
            )
        if self.edge_weight < 0:
            raise ValueError(f"edge_weight must be >= 0, got {self.edge_weight}")
        if self.polarity not in (DARK, BRIGHT):
            raise ValueError(f"polarity must be '{DARK}' or '{BRIGHT}', got {self.polarity!r}")


@dataclass(frozen=True)
class NoiseReport:
    """Score breakdown for one mask / threshold candidate."""

    z: float
    mean_row_noise: float
    mean_col_noise: float
    edge_noise: int
    nac: int
    feasible: bool
    threshold: int | None = None


@dataclass(frozen=True)
class SearchResult:
    best: NoiseReport
    mask: Mask
    curve: tuple[NoiseReport, ...] = field(repr=False)


def binarize(img: GrayImage, threshold: int, polarity: str = DARK) -> Mask:
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be in [0, 255], got {threshold}")
    if polarity == DARK:
        return Mask(img.pixels <= threshold)
    if polarity == BRIGHT:
        return Mask(img.pixels >= threshold)
    raise ValueError(f"polarity must be '{DARK}' or '{BRIGHT}', got {polarity!r}")


def _report(row_t, col_t, edge, nac, h, w, cfg: SearchConfig, threshold) -> NoiseReport:
    # One shared expression for both the sweep and single-mask scoring so
    # their floats agree exactly.
    mean_row = row_t / (w if cfg.literal_divisor else h)
    mean_col = col_t / w
    z = (mean_row + mean_col) / 2.0 + cfg.edge_weight * edge / (w + h)
    frac = nac / (h * w)
    feasible = cfg.min_frac < frac < cfg.max_frac
    return NoiseReport(
        z=z,
        mean_row_noise=mean_row,
        mean_col_noise=mean_col,
        edge_noise=int(edge),
        nac=int(nac),
        feasible=feasible,
        threshold=threshold,
    )


def noise_score(mask: Mask, config: SearchConfig | None = None, threshold: int | None = None) -> NoiseReport:
    """Score an arbitrary mask with the same arithmetic the search uses."""
    cfg = config or SearchConfig()
    acc = mask.accepted.astype(np.uint8)
    row_t, col_t, edge, nac = _kernels.mask_counts(acc)
    return _report(row_t, col_t, edge, nac, mask.height, mask.width, cfg, threshold)


def denoise(mask: Mask, remove_max: int = 2, fill_min: int = 6, max_iters: int = 10) -> Mask:
    """Synchronous 8-neighbor cleanup of speckle noise.

    Each sweep recomputes every pixel from the previous mask: accepted
    pixels keep their state only with more than remove_max accepted
    neighbors, rejected pixels flip on at fill_min or more. Runs to a
    fixpoint or max_iters sweeps.
    """
    if not 0 <= remove_max < fill_min <= 8:
        raise ValueError(f"need 0 <= remove_max < fill_min <= 8, got {remove_max}, {fill_min}")
    if max_iters < 0:
        raise ValueError(f"max_iters must be >= 0, got {max_iters}")
    out, _ = _kernels.denoise_pass(mask.accepted.astype(np.uint8), remove_max, fill_min, max_iters)
    return Mask(out.astype(bool))


def soit_search(
    img: GrayImage,
    config: SearchConfig | None = None,
    progress: Callable[[float], None] | None = None,
) -> SearchResult:
    """Scan thresholds lo..hi by step and return the lowest-noise feasible
    candidate (ties go to the lower threshold), its denoised mask, and the
    full score curve. Raises NoFeasibleThreshold when the accepted-fraction
    window rejects every candidate.
    """
    cfg = config or SearchConfig()
    if progress:
        progress(0.0)
    h, w = img.height, img.width
    hists = _kernels.sweep_hists(img.pixels)
    row_t, col_t, edge, nac = _kernels.combine_sweep(hists, cfg.polarity == DARK)

    curve = []
    best = None
    for t in range(cfg.lo, cfg.hi + 1, cfg.step):
        rep = _report(int(row_t[t]), int(col_t[t]), int(edge[t]), int(nac[t]), h, w, cfg, t)
        curve.append(rep)
        if rep.feasible and (best is None or rep.z < best.z):
            best = rep
    if progress:
        progress(0.9)

    if best is None:
        total = h * w
        fr = (curve[0].nac / total, curve[-1].nac / total)
        raise NoFeasibleThreshold(
            f"no threshold in [{cfg.lo}, {cfg.hi}] step {cfg.step} kept the accepted fraction "
            f"inside ({cfg.min_frac}, {cfg.max_frac}); scan endpoints had fractions "
            f"{fr[0]:.3f} and {fr[1]:.3f}"
        )

    mask = denoise(binarize(img, best.threshold, cfg.polarity))
    if progress:
        progress(1.0)
    return SearchResult(best=best, mask=mask, curve=tuple(curve))


def curve_to_csv(curve: Sequence[NoiseReport], total_pixels: int) -> str:
    """Score curve as CSV with stable float formatting (repr round-trips)."""
    lines = ["threshold,z,nac_fraction,feasible"]
    for rep in curve:
        frac = rep.nac / total_pixels
        lines.append(f"{rep.threshold},{rep.z!r},{frac!r},{int(rep.feasible)}")
    return "\n".join(lines) + "\n"
