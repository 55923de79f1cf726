"""Hot array kernels with a compiled path and a pure-numpy fallback.

Three operations dominate runtime: the histogram pass that feeds the
threshold sweep, per-mask transition counting, and mask denoising. Each has
a numba-compiled twin of the numpy implementation. Both paths accumulate
plain integers, so results are identical bit for bit; the property suite
checks that directly.

Path selection happens once at import: numba is used when it imports
cleanly and FOOTMETRY_DISABLE_NUMBA is not "1". benchmarks/bench_kernels.py
times the two paths against each other.
"""

import os

import numpy as np

_DISABLE_FLAG = "FOOTMETRY_DISABLE_NUMBA"


# ---------------------------------------------------------------------------
# numpy implementations


def sweep_hists_np(pixels):
    """One pass over the image collecting the six histograms the threshold
    sweep needs: pixel values, row-pair min/max, column-pair min/max, and
    border pixel values. All counts are exact int64.
    """
    a = pixels
    h, w = a.shape
    zeros = lambda: np.zeros(256, np.int64)

    hist = np.bincount(a.reshape(-1), minlength=256).astype(np.int64)

    if w >= 2:
        left, right = a[:, :-1], a[:, 1:]
        row_min = np.bincount(np.minimum(left, right).reshape(-1), minlength=256).astype(np.int64)
        row_max = np.bincount(np.maximum(left, right).reshape(-1), minlength=256).astype(np.int64)
    else:
        row_min, row_max = zeros(), zeros()

    if h >= 2:
        top, bot = a[:-1, :], a[1:, :]
        col_min = np.bincount(np.minimum(top, bot).reshape(-1), minlength=256).astype(np.int64)
        col_max = np.bincount(np.maximum(top, bot).reshape(-1), minlength=256).astype(np.int64)
    else:
        col_min, col_max = zeros(), zeros()

    if h == 1:
        border = a[0, :]
    elif w == 1:
        border = a[:, 0]
    else:
        border = np.concatenate([a[0, :], a[-1, :], a[1:-1, 0], a[1:-1, -1]])
    border_h = np.bincount(border, minlength=256).astype(np.int64)

    return hist, row_min, row_max, col_min, col_max, border_h


def _sweep_hists_loop(a):
    h, w = a.shape
    hist = np.zeros(256, np.int64)
    row_min = np.zeros(256, np.int64)
    row_max = np.zeros(256, np.int64)
    col_min = np.zeros(256, np.int64)
    col_max = np.zeros(256, np.int64)
    border_h = np.zeros(256, np.int64)
    for i in range(h):
        for j in range(w):
            v = a[i, j]
            hist[v] += 1
            if i == 0 or i == h - 1 or j == 0 or j == w - 1:
                border_h[v] += 1
            if j + 1 < w:
                u = a[i, j + 1]
                if u < v:
                    row_min[u] += 1
                    row_max[v] += 1
                else:
                    row_min[v] += 1
                    row_max[u] += 1
            if i + 1 < h:
                u = a[i + 1, j]
                if u < v:
                    col_min[u] += 1
                    col_max[v] += 1
                else:
                    col_min[v] += 1
                    col_max[u] += 1
    return hist, row_min, row_max, col_min, col_max, border_h


def combine_sweep(hists, dark):
    """Turn the six histograms into per-threshold counts for all 256
    thresholds: (row_transitions, col_transitions, border_accepted,
    accepted_count).

    Dark polarity accepts p <= t, so a pair straddles the mask edge exactly
    when min <= t < max; cumulative histograms of pair mins and maxes give
    the count in O(1) per threshold. Bright polarity accepts p >= t and
    shifts the cumulative index by one.
    """
    hist, row_min, row_max, col_min, col_max, border_h = (np.cumsum(x) for x in hists)
    total = int(hist[-1])
    border_total = int(border_h[-1])
    if dark:
        row_t = row_min - row_max
        col_t = col_min - col_max
        edge = border_h.copy()
        nac = hist.copy()
    else:
        shift = lambda c: np.concatenate([np.zeros(1, np.int64), c[:-1]])
        row_t = shift(row_min) - shift(row_max)
        col_t = shift(col_min) - shift(col_max)
        edge = border_total - shift(border_h)
        nac = total - shift(hist)
    return row_t, col_t, edge, nac


def mask_counts_np(acc):
    """Transition and border counts for a single 0/1 mask: returns
    (row_transitions, col_transitions, border_accepted, accepted_count)."""
    row = int(np.count_nonzero(acc[:, 1:] != acc[:, :-1])) if acc.shape[1] >= 2 else 0
    col = int(np.count_nonzero(acc[1:, :] != acc[:-1, :])) if acc.shape[0] >= 2 else 0
    h, w = acc.shape
    if h == 1:
        edge = int(np.count_nonzero(acc[0, :]))
    elif w == 1:
        edge = int(np.count_nonzero(acc[:, 0]))
    else:
        edge = int(
            np.count_nonzero(acc[0, :])
            + np.count_nonzero(acc[-1, :])
            + np.count_nonzero(acc[1:-1, 0])
            + np.count_nonzero(acc[1:-1, -1])
        )
    nac = int(np.count_nonzero(acc))
    return row, col, edge, nac


def _mask_counts_loop(acc):
    h, w = acc.shape
    row = 0
    col = 0
    edge = 0
    nac = 0
    for i in range(h):
        for j in range(w):
            v = acc[i, j]
            if v:
                nac += 1
                if i == 0 or i == h - 1 or j == 0 or j == w - 1:
                    edge += 1
            if j + 1 < w and acc[i, j + 1] != v:
                row += 1
            if i + 1 < h and acc[i + 1, j] != v:
                col += 1
    return row, col, edge, nac


def denoise_np(acc, remove_max, fill_min, max_iters):
    """Synchronous 8-neighbor cleanup. Accepted pixels with at most
    remove_max accepted neighbors turn off; rejected pixels with at least
    fill_min turn on. Every pixel updates from the same previous mask.
    Returns (mask, sweeps_applied); stops early at a fixpoint.
    """
    cur = acc.astype(np.uint8)
    h, w = cur.shape
    sweeps = 0
    for _ in range(max_iters):
        p = np.zeros((h + 2, w + 2), np.int16)
        p[1:-1, 1:-1] = cur
        nb = (
            p[:-2, :-2] + p[:-2, 1:-1] + p[:-2, 2:]
            + p[1:-1, :-2] + p[1:-1, 2:]
            + p[2:, :-2] + p[2:, 1:-1] + p[2:, 2:]
        )
        nxt = np.where(cur == 1, nb > remove_max, nb >= fill_min).astype(np.uint8)
        if np.array_equal(nxt, cur):
            break
        cur = nxt
        sweeps += 1
    return cur, sweeps


def _denoise_loop(acc, remove_max, fill_min, max_iters):
    h, w = acc.shape
    cur = acc.astype(np.uint8)
    nxt = np.empty((h, w), np.uint8)
    sweeps = 0
    for _ in range(max_iters):
        changed = False
        for i in range(h):
            for j in range(w):
                nb = 0
                for di in range(-1, 2):
                    ii = i + di
                    if ii < 0 or ii >= h:
                        continue
                    for dj in range(-1, 2):
                        jj = j + dj
                        if jj < 0 or jj >= w or (di == 0 and dj == 0):
                            continue
                        nb += cur[ii, jj]
                if cur[i, j] == 1:
                    v = 1 if nb > remove_max else 0
                else:
                    v = 1 if nb >= fill_min else 0
                nxt[i, j] = v
                if v != cur[i, j]:
                    changed = True
        if not changed:
            break
        cur, nxt = nxt.copy(), cur
        sweeps += 1
    return cur, sweeps


# ---------------------------------------------------------------------------
# compiled twins and dispatch

sweep_hists_jit = None
mask_counts_jit = None
denoise_jit = None

if os.environ.get(_DISABLE_FLAG, "") != "1":
    try:
        import numba
    except ImportError:
        numba = None
    if numba is not None:
        sweep_hists_jit = numba.njit(cache=True)(_sweep_hists_loop)
        mask_counts_jit = numba.njit(cache=True)(_mask_counts_loop)
        denoise_jit = numba.njit(cache=True)(_denoise_loop)

USING_NUMBA = sweep_hists_jit is not None

if USING_NUMBA:
    sweep_hists = sweep_hists_jit
    mask_counts = mask_counts_jit
    denoise_pass = denoise_jit
else:
    sweep_hists = sweep_hists_np
    mask_counts = mask_counts_np
    denoise_pass = denoise_np


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"


def warmup() -> None:
    """Trigger JIT compilation on tiny inputs so later calls run at steady
    state. No-op on the numpy path."""
    tiny = np.array([[0, 255], [255, 0]], np.uint8)
    sweep_hists(tiny)
    mask_counts(tiny // 255)
    denoise_pass(tiny // 255, 2, 6, 2)
