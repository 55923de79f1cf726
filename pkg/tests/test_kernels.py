"""Both kernel paths must agree bit for bit, and the histogram-sweep trick
must reproduce direct per-threshold counting."""

import numpy as np
import pytest

import oracles
from footmetry import _kernels

SHAPES = [(1, 1), (1, 7), (7, 1), (2, 2), (3, 5), (8, 8), (13, 9), (24, 31)]


def _random_image(rng, shape):
    return rng.integers(0, 256, size=shape, dtype=np.uint8)


@pytest.mark.parametrize("shape", SHAPES)
def test_sweep_hists_paths_identical(rng, shape):
    a = _random_image(rng, shape)
    ref = _kernels.sweep_hists_np(a)
    loop = _kernels._sweep_hists_loop(a)
    for x, y in zip(ref, loop):
        assert np.array_equal(x, y)
    if _kernels.sweep_hists_jit is not None:
        jit = _kernels.sweep_hists_jit(a)
        for x, y in zip(ref, jit):
            assert np.array_equal(x, y)


@pytest.mark.parametrize("shape", SHAPES)
def test_sweep_hists_totals(rng, shape):
    h, w = shape
    a = _random_image(rng, shape)
    hist, row_min, row_max, col_min, col_max, border = _kernels.sweep_hists_np(a)
    assert int(hist.sum()) == h * w
    assert int(row_min.sum()) == int(row_max.sum()) == h * (w - 1)
    assert int(col_min.sum()) == int(col_max.sum()) == (h - 1) * w
    perimeter = h * w if h <= 2 or w <= 2 else 2 * w + 2 * h - 4
    assert int(border.sum()) == perimeter


@pytest.mark.parametrize("dark", [True, False])
def test_combine_sweep_matches_direct_recount(rng, dark):
    # the O(N + 256) cumulative trick against thresholding from scratch
    for shape in [(1, 6), (6, 1), (9, 13), (16, 16)]:
        a = _random_image(rng, shape)
        counts = _kernels.combine_sweep(_kernels.sweep_hists_np(a), dark)
        for t in range(256):
            m = (a <= t) if dark else (a >= t)
            row, col, edge, nac = _kernels.mask_counts_np(m.astype(np.uint8))
            assert int(counts[0][t]) == row
            assert int(counts[1][t]) == col
            assert int(counts[2][t]) == edge
            assert int(counts[3][t]) == nac


@pytest.mark.parametrize("shape", SHAPES)
def test_mask_counts_paths_identical(rng, shape):
    for p in (0.1, 0.5, 0.9):
        m = (rng.random(shape) < p).astype(np.uint8)
        ref = _kernels.mask_counts_np(m)
        assert ref == tuple(_kernels._mask_counts_loop(m))
        if _kernels.mask_counts_jit is not None:
            assert ref == tuple(_kernels.mask_counts_jit(m))


def test_mask_counts_against_pixel_loop(rng):
    for shape in [(1, 5), (4, 4), (7, 11)]:
        m = (rng.random(shape) < 0.4).astype(np.uint8)
        assert _kernels.mask_counts_np(m) == oracles.count_mask(m)


def test_mask_counts_extremes():
    assert _kernels.mask_counts_np(np.zeros((5, 5), np.uint8)) == (0, 0, 0, 0)
    assert _kernels.mask_counts_np(np.ones((5, 5), np.uint8)) == (0, 0, 16, 25)
    assert _kernels.mask_counts_np(np.ones((1, 4), np.uint8)) == (0, 0, 4, 4)


@pytest.mark.parametrize("shape", [(4, 4), (9, 7), (16, 16)])
def test_denoise_paths_identical(rng, shape):
    for p in (0.2, 0.5, 0.8):
        m = (rng.random(shape) < p).astype(np.uint8)
        out_np, sweeps_np = _kernels.denoise_np(m, 2, 6, 10)
        out_loop, sweeps_loop = _kernels._denoise_loop(m, 2, 6, 10)
        assert np.array_equal(out_np, out_loop)
        assert sweeps_np == sweeps_loop
        if _kernels.denoise_jit is not None:
            out_jit, sweeps_jit = _kernels.denoise_jit(m, 2, 6, 10)
            assert np.array_equal(out_np, out_jit)
            assert sweeps_np == sweeps_jit


def test_denoise_single_sweep_matches_rule(rng):
    for shape in [(5, 5), (8, 6)]:
        m = (rng.random(shape) < 0.5).astype(np.uint8)
        got, _ = _kernels.denoise_np(m, 2, 6, 1)
        assert np.array_equal(got, oracles.denoise_step(m, 2, 6))


def test_denoise_sweep_is_synchronous():
    # a row of three: ends have 1 neighbor, the middle has 2; all judged
    # against the same previous mask, so the whole row dies in one sweep
    m = np.zeros((3, 5), np.uint8)
    m[1, 1:4] = 1
    out, sweeps = _kernels.denoise_np(m, 2, 6, 10)
    assert out.sum() == 0
    assert sweeps == 1


def test_denoise_reaches_fixpoint(rng):
    for p in (0.3, 0.5, 0.7):
        m = (rng.random((20, 20)) < p).astype(np.uint8)
        out, _ = _kernels.denoise_np(m, 2, 6, 100)
        again, sweeps = _kernels.denoise_np(out, 2, 6, 100)
        assert np.array_equal(out, again)
        assert sweeps == 0


def test_denoise_zero_iters_is_identity(rng):
    m = (rng.random((6, 6)) < 0.5).astype(np.uint8)
    out, sweeps = _kernels.denoise_np(m, 2, 6, 0)
    assert np.array_equal(out, m)
    assert sweeps == 0


def test_backend_flag_consistency():
    assert _kernels.backend_name() in ("numba", "numpy")
    assert (_kernels.backend_name() == "numba") == _kernels.USING_NUMBA
    if _kernels.USING_NUMBA:
        assert _kernels.sweep_hists is _kernels.sweep_hists_jit
    else:
        assert _kernels.sweep_hists is _kernels.sweep_hists_np
