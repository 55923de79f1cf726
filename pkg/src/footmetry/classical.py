"""Classical histogram thresholding baselines.

Fifteen global methods implemented from their original formulations, used
as the comparison field for the transition-noise search. All of them share
one convention: a returned threshold t puts gray levels [0, t] in the
background class and [t+1, 255] in the object class, criterion scans visit
every candidate where both classes are non-empty, and ties break toward the
lowest index. Histograms whose mass sits in a single bin raise
DegenerateHistogram for every method that needs two classes.
"""

import enum
import math

import numpy as np

from .errors import DegenerateHistogram, NotBimodal
from .imaging import Histogram

_IDX = np.arange(256, dtype=np.float64)


class MethodId(enum.Enum):
    """Closed set of supported classical methods."""

    huang = "huang"
    intermodes = "intermodes"
    isodata = "isodata"
    li = "li"
    max_entropy = "max_entropy"
    mean = "mean"
    min_error = "min_error"
    minimum = "minimum"
    moments = "moments"
    otsu = "otsu"
    percentile = "percentile"
    renyi_entropy = "renyi_entropy"
    shanbhag = "shanbhag"
    triangle = "triangle"
    yen = "yen"


def _as_bins(hist) -> np.ndarray:
    if isinstance(hist, Histogram):
        return np.asarray(hist.bins, dtype=np.int64)
    bins = np.asarray(hist, dtype=np.int64)
    if bins.shape != (256,):
        raise ValueError(f"expected 256 bins, got shape {bins.shape}")
    if bins.min() < 0:
        raise ValueError("negative bin count")
    return bins


def _support(bins):
    occ = np.flatnonzero(bins)
    if occ.size == 0:
        raise DegenerateHistogram("histogram is empty")
    return int(occ[0]), int(occ[-1])


def _two_class_support(bins):
    lo, hi = _support(bins)
    if lo == hi:
        raise DegenerateHistogram(f"all mass in bin {lo}")
    return lo, hi


def _argbest(values: np.ndarray, offset: int, maximize: bool) -> int:
    # first occurrence of the optimum = lowest threshold
    pick = np.argmax(values) if maximize else np.argmin(values)
    return offset + int(pick)


def _otsu(bins) -> int:
    """Otsu (1979), IEEE Trans. SMC 9(1): maximize between-class variance
    sigma_b^2(t) = [mu_T w(t) - mu(t)]^2 / [w(t) (1 - w(t))]."""
    lo, hi = _two_class_support(bins)
    p = bins / bins.sum()
    w = np.cumsum(p)
    mu = np.cumsum(p * _IDX)
    mu_t = mu[-1]
    w_v = w[lo:hi]
    sigma = (mu_t * w_v - mu[lo:hi]) ** 2 / (w_v * (1.0 - w_v))
    return _argbest(sigma, lo, maximize=True)


def _mean(bins) -> int:
    """Glasbey (1993): threshold at the mean gray level, floored. Exact
    integer arithmetic."""
    _support(bins)
    total = int(bins.sum())
    weighted = int(np.dot(bins, np.arange(256, dtype=np.int64)))
    return weighted // total


def _percentile(bins, fraction: float = 0.5) -> int:
    """Doyle (1962) p-tile: smallest level whose cumulative fraction
    reaches `fraction` of the pixels."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    _support(bins)
    cumfrac = np.cumsum(bins) / bins.sum()
    return int(np.argmax(cumfrac >= fraction))


def _isodata(bins) -> int:
    """Ridler and Calvard (1978) iterative intermeans: move the threshold
    to the rounded midpoint of the two class means until it stops."""
    lo, hi = _two_class_support(bins)
    cum = np.cumsum(bins)
    cumi = np.cumsum(bins * np.arange(256, dtype=np.int64))
    total, total_i = int(cum[-1]), int(cumi[-1])
    t = min(max(total_i // total, lo), hi - 1)
    for _ in range(1000):
        m0 = cumi[t] / cum[t]
        m1 = (total_i - cumi[t]) / (total - cum[t])
        nt = int((m0 + m1 + 1.0) // 2.0)  # floor(x + 0.5)
        nt = min(max(nt, lo), hi - 1)
        if nt == t:
            break
        t = nt
    return t


def _li(bins, variant: str = "iterative") -> int:
    """Minimum cross entropy threshold.

    variant="iterative" uses the Li and Tam (1998) update
    t <- (mu_a - mu_b) / (ln mu_a - ln mu_b) run to a half-level tolerance;
    variant="scan" minimizes the Li and Lee (1993) criterion
    -A1 ln(mu_a) - B1 ln(mu_b) over every valid split.
    """
    if variant not in ("iterative", "scan"):
        raise ValueError(f"variant must be 'iterative' or 'scan', got {variant!r}")
    lo, hi = _two_class_support(bins)
    cum = np.cumsum(bins)
    cumi = np.cumsum(bins * np.arange(256, dtype=np.int64))
    total, total_i = int(cum[-1]), int(cumi[-1])

    if variant == "scan":
        a0 = cum[lo:hi].astype(np.float64)
        a1 = cumi[lo:hi].astype(np.float64)
        b0 = total - a0
        b1 = total_i - a1
        mu_a = a1 / a0
        mu_b = b1 / b0
        with np.errstate(divide="ignore", invalid="ignore"):
            term_a = np.where(a1 > 0, a1 * np.log(mu_a), 0.0)
            term_b = b1 * np.log(mu_b)  # mu_b >= 1 whenever an occupied bin sits above t
        return _argbest(-(term_a + term_b), lo, maximize=False)

    t_real = total_i / total  # start at the global mean
    for _ in range(1000):
        t = min(max(int(t_real + 0.5), lo), hi - 1)
        mu_a = cumi[t] / cum[t]
        mu_b = (total_i - cumi[t]) / (total - cum[t])
        if mu_a <= 0.0:
            return t  # background mass all at level 0, update undefined
        new_real = (mu_a - mu_b) / (math.log(mu_a) - math.log(mu_b))
        done = abs(new_real - t_real) < 0.5
        t_real = new_real
        if done:
            break
    return min(max(int(t_real + 0.5), lo), hi - 1)


def _huang(bins) -> int:
    """Huang and Wang (1995), Pattern Recognition 28(1): pick the threshold
    that minimizes the Shannon fuzziness of membership, where a pixel's
    membership is 1 / (1 + |g - mu_class| / range)."""
    lo, hi = _two_class_support(bins)
    rng = float(hi - lo)
    cum = np.cumsum(bins)
    cumi = np.cumsum(bins * np.arange(256, dtype=np.int64))
    total, total_i = int(cum[-1]), int(cumi[-1])
    weights = bins.astype(np.float64)

    best_t, best_v = lo, math.inf
    for t in range(lo, hi):
        mu0 = cumi[t] / cum[t]
        mu1 = (total_i - cumi[t]) / (total - cum[t])
        centers = np.where(_IDX <= t, mu0, mu1)
        u = 1.0 / (1.0 + np.abs(_IDX - centers) / rng)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(
                (u > 0.0) & (u < 1.0),
                -u * np.log(u) - (1.0 - u) * np.log(1.0 - u),
                0.0,
            )
        v = float(np.dot(weights, s))
        if v < best_v:
            best_t, best_v = t, v
    return best_t


def _max_entropy(bins) -> int:
    """Kapur, Sahoo and Wong (1985): maximize the summed Shannon entropies
    of the two classes."""
    lo, hi = _two_class_support(bins)
    p = bins / bins.sum()
    P = np.cumsum(p)
    plogp = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    H = np.cumsum(plogp)
    Ht = H[-1]
    P1 = P[lo:hi]
    P2 = 1.0 - P1
    crit = np.log(P1 * P2) - H[lo:hi] / P1 - (Ht - H[lo:hi]) / P2
    return _argbest(crit, lo, maximize=True)


def _renyi_entropy(bins, alpha: float = 2.0) -> int:
    """Sahoo, Wilkins and Yeager (1997) single-order variant: maximize the
    summed Renyi entropies ln(sum (p/P)^alpha) / (1 - alpha). alpha=1 is
    the Shannon limit; use max_entropy for that."""
    if not (alpha > 0.0) or alpha == 1.0:
        raise ValueError(f"alpha must be positive and != 1, got {alpha}")
    lo, hi = _two_class_support(bins)
    p = bins / bins.sum()
    P = np.cumsum(p)
    A = np.cumsum(p**alpha)
    At = A[-1]
    P1 = P[lo:hi]
    A1 = A[lo:hi]
    with np.errstate(divide="ignore"):
        hb = (np.log(A1) - alpha * np.log(P1)) / (1.0 - alpha)
        hf = (np.log(At - A1) - alpha * np.log(1.0 - P1)) / (1.0 - alpha)
    return _argbest(hb + hf, lo, maximize=True)


def _min_error(bins) -> int:
    """Kittler and Illingworth (1986) minimum error thresholding, iterative
    form: fit a weighted Gaussian to each class, move the threshold to the
    point where the two weighted densities are equal, repeat until stable.

    The quadratic for the crossing point comes from equating
    (x-m)^2/v + ln v - 2 ln P for the two classes. When a class collapses
    (non-positive variance) or the discriminant goes negative the current
    estimate is returned; the iterate itself is clamped so both classes
    keep at least one occupied bin.
    """
    lo, hi = _two_class_support(bins)
    idx = np.arange(256, dtype=np.int64)
    cum = np.cumsum(bins)
    cumi = np.cumsum(bins * idx)
    cumii = np.cumsum(bins * idx * idx)
    total = int(cum[-1])
    total_i = int(cumi[-1])
    total_ii = int(cumii[-1])

    t = min(max(total_i // total, lo), hi - 1)
    for _ in range(1000):
        c0 = int(cum[t])
        c1 = total - c0
        m0 = cumi[t] / c0
        m1 = (total_i - cumi[t]) / c1
        v0 = cumii[t] / c0 - m0 * m0
        v1 = (total_ii - cumii[t]) / c1 - m1 * m1
        if v0 <= 0.0 or v1 <= 0.0:
            return t
        p0 = c0 / total
        p1 = c1 / total
        w0 = 1.0 / v0 - 1.0 / v1
        w1 = m0 / v0 - m1 / v1
        w2 = m0 * m0 / v0 - m1 * m1 / v1 + math.log((v0 * p1 * p1) / (v1 * p0 * p0))
        if abs(w0) < 1e-12:
            if abs(w1) < 1e-12:
                return t
            x = w2 / (2.0 * w1)
        else:
            disc = w1 * w1 - w0 * w2
            if disc < 0.0:
                return t
            sq = math.sqrt(disc)
            roots = ((w1 + sq) / w0, (w1 - sq) / w0)
            between = [r for r in roots if min(m0, m1) <= r <= max(m0, m1)]
            x = between[0] if len(between) == 1 else roots[0]
        nt = min(max(int(x + 0.5), lo), hi - 1)
        if nt == t:
            return t
        t = nt
    return t


def _moments(bins) -> int:
    """Tsai (1985) moment preserving: find the two-level image with the
    same first three moments, then threshold at the gray level whose
    cumulative fraction is closest to the background fraction."""
    lo, hi = _two_class_support(bins)
    p = bins / bins.sum()
    m1 = float(np.dot(p, _IDX))
    m2 = float(np.dot(p, _IDX**2))
    m3 = float(np.dot(p, _IDX**3))
    cd = m2 - m1 * m1
    if cd <= 0.0:
        raise DegenerateHistogram("zero variance, moment fit undefined")
    c0 = (-m2 * m2 + m1 * m3) / cd
    c1 = (m1 * m2 - m3) / cd
    disc = c1 * c1 - 4.0 * c0
    if disc < 0.0:
        raise DegenerateHistogram("moment fit has no real representative levels")
    z0 = 0.5 * (-c1 - math.sqrt(disc))
    z1 = 0.5 * (-c1 + math.sqrt(disc))
    if z1 == z0:
        raise DegenerateHistogram("moment fit collapsed to one level")
    pd = (z1 - m1) / (z1 - z0)
    cumfrac = np.cumsum(p)
    return _argbest(np.abs(cumfrac[lo:hi] - pd), lo, maximize=False)


def _shanbhag(bins) -> int:
    """Shanbhag (1994), CVGIP 56(5): treat the two classes as fuzzy sets
    and pick the split where their information measures agree, i.e.
    minimize |ent_background - ent_object|."""
    lo, hi = _two_class_support(bins)
    p = bins / bins.sum()
    P = np.cumsum(p)
    Pm1 = np.concatenate([[0.0], P[:-1]])          # cumulative below each level
    Q = np.concatenate([P[-1] - Pm1, [0.0]])       # tail mass from each level up; Q[i] = sum_{k>=i} p
    Qp1 = Q[1:]                                    # tail strictly above each level

    best_t, best_v = lo, math.inf
    for t in range(lo, hi):
        if p[t] == 0.0 and t > lo:
            continue  # same split as the previous occupied level, exact tie
        term_b = 0.5 / P[t]
        back = -term_b * float(np.dot(p[: t + 1], np.log(1.0 - term_b * Pm1[: t + 1])))
        term_f = 0.5 / Q[t + 1]
        obj = -term_f * float(np.dot(p[t + 1 :], np.log(1.0 - term_f * Qp1[t + 1 :])))
        v = abs(back - obj)
        if v < best_v:
            best_t, best_v = t, v
    return best_t


def _triangle(bins) -> int:
    """Zack, Rogers and Latt (1977): draw a chord from the histogram peak
    to the far end of the longer tail (anchored one empty bin outside the
    support when there is room) and threshold where the histogram hangs
    furthest below it. The result is clamped into the occupied range."""
    lo, hi = _two_class_support(bins)
    b = bins.astype(np.float64)
    peak = int(np.argmax(b))
    xlo = lo - 1 if lo > 0 else lo
    xhi = hi + 1 if hi < 255 else hi
    if peak - xlo >= xhi - peak:
        x1, y1, x2, y2 = xlo, b[xlo], peak, b[peak]
        cand = np.arange(xlo, peak + 1)
    else:
        x1, y1, x2, y2 = peak, b[peak], xhi, b[xhi]
        cand = np.arange(peak, xhi + 1)
    below = (y2 - y1) * (cand - x1) - (x2 - x1) * (b[cand] - y1)
    t = int(cand[int(np.argmax(below))])
    return min(max(t, lo), hi)


def _smooth_to_bimodal(bins):
    """Mean-of-three smoothing (zero beyond the ends) repeated until the
    histogram has exactly two strict local maxima. Prewitt and Mendelsohn
    (1966). Raises NotBimodal after 10000 rounds."""
    h = bins.astype(np.float64)
    kernel = np.full(3, 1.0 / 3.0)
    for _ in range(10000):
        inner = h[1:-1]
        peaks = np.flatnonzero((inner > h[:-2]) & (inner > h[2:])) + 1
        if peaks.size == 2:
            return h, int(peaks[0]), int(peaks[1])
        h = np.convolve(h, kernel, mode="same")
    raise NotBimodal("histogram never reached exactly two modes")


def _intermodes(bins) -> int:
    """Prewitt and Mendelsohn (1966): smooth until bimodal, threshold at
    the floor of the midpoint of the two modes."""
    lo, hi = _two_class_support(bins)
    _, p1, p2 = _smooth_to_bimodal(bins)
    return min(max((p1 + p2) // 2, lo), hi)


def _minimum(bins) -> int:
    """Prewitt and Mendelsohn (1966): smooth until bimodal, threshold at
    the lowest point between the two modes."""
    lo, hi = _two_class_support(bins)
    h, p1, p2 = _smooth_to_bimodal(bins)
    t = p1 + int(np.argmin(h[p1 : p2 + 1]))
    return min(max(t, lo), hi)


def _yen(bins) -> int:
    """Yen, Chang and Chang (1995): maximize the entropic correlation
    criterion -ln(A1 A2) + 2 ln(P1 P2) built from squared probabilities."""
    lo, hi = _two_class_support(bins)
    p = bins / bins.sum()
    P = np.cumsum(p)
    A = np.cumsum(p * p)
    At = A[-1]
    P1 = P[lo:hi]
    A1 = A[lo:hi]
    crit = -np.log(A1 * (At - A1)) + 2.0 * np.log(P1 * (1.0 - P1))
    return _argbest(crit, lo, maximize=True)


_METHODS = {
    MethodId.huang: _huang,
    MethodId.intermodes: _intermodes,
    MethodId.isodata: _isodata,
    MethodId.li: _li,
    MethodId.max_entropy: _max_entropy,
    MethodId.mean: _mean,
    MethodId.min_error: _min_error,
    MethodId.minimum: _minimum,
    MethodId.moments: _moments,
    MethodId.otsu: _otsu,
    MethodId.percentile: _percentile,
    MethodId.renyi_entropy: _renyi_entropy,
    MethodId.shanbhag: _shanbhag,
    MethodId.triangle: _triangle,
    MethodId.yen: _yen,
}


def classical_threshold(hist, method, **params) -> int:
    """Compute a threshold with one of the fifteen classical methods.

    hist may be a Histogram or a raw 256-bin count array. method is a
    MethodId or its string value. Per-method parameters: percentile takes
    fraction (default 0.5), renyi_entropy takes alpha (default 2.0), li
    takes variant ("iterative" or "scan").
    """
    if not isinstance(method, MethodId):
        try:
            method = MethodId(method)
        except ValueError:
            known = ", ".join(m.value for m in MethodId)
            raise ValueError(f"unknown method {method!r}; expected one of: {known}") from None
    bins = _as_bins(hist)
    return int(_METHODS[method](bins, **params))
