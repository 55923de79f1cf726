"""Shipped guarantees, one test per gate.

Every test times its own work, checks the documented tolerance, and prints
a single verdict line (kept visible past capture) so a run reads as a
checklist. Kernels are pre-warmed by the session fixture, so the budgets
see steady-state speed.
"""

import time

import numpy as np
import pytest
import scipy.stats

import oracles
from footmetry import scenes, stats
from footmetry.calibration import ScaleObservation, fit_scale
from footmetry.classical import classical_threshold
from footmetry.imaging import GrayImage, Mask, histogram
from footmetry.measure import measure_foot
from footmetry.soit import NoFeasibleThreshold, SearchConfig, binarize, denoise, soit_search

DEVICE = stats.DEVICE_COLUMNS  # length_side_cm, length_under_cm, height_cm, width_cm


def _verdict(capsys, name: str, ok: bool, detail: str = ""):
    with capsys.disabled():
        status = "pass" if ok else "FAIL"
        suffix = f" :: {detail}" if detail else ""
        print(f"\n[acceptance] {name}: {status}{suffix}")
    assert ok, f"{name} {detail}"


@pytest.fixture(scope="module")
def report():
    return stats.agreement_report(stats.load_reference_table())


@pytest.fixture(scope="module")
def table():
    return stats.load_reference_table()


# ---------------------------------------------------------------------------
# reference-table agreement


def test_reference_error_agreement(capsys, report):
    t0 = time.perf_counter()
    rep = stats.agreement_report(stats.load_reference_table())
    elapsed = time.perf_counter() - t0
    want = {"length_side_cm": 0.444793, "length_under_cm": 0.169197, "height_cm": 0.209255}
    diffs = {c: abs(rep["mae"][c] - v) for c, v in want.items()}
    ok = all(d <= 1e-6 for d in diffs.values()) and elapsed < 1.0
    detail = (
        f"side {diffs['length_side_cm']:.1e}, under {diffs['length_under_cm']:.1e}, "
        f"height {diffs['height_cm']:.1e} from frozen values (gate 1e-6); {elapsed:.2f}s"
    )
    _verdict(capsys, "mean absolute error vs reference table", ok, detail)


@pytest.mark.xfail(
    reason="the bundled table's width summary disagrees with its own per-subject "
    "digits: recomputing gives 0.210127 against the recorded 0.210125, 1.7e-6 "
    "apart with a 1e-6 gate",
    strict=True,
)
def test_reference_width_error_agreement(capsys, report):
    diff = abs(report["mae"]["width_cm"] - 0.210125)
    _verdict(capsys, "width mean absolute error vs reference table", diff <= 1e-6,
             f"recomputed differs by {diff:.2e} (gate 1e-6)")


_GRID = {
    "mean": (26.749, 26.787, 7.123, 10.320),
    "stdev": (0.999, 0.726, 0.499, 0.388),
    "se_mean": (0.258, 0.187, 0.129, 0.100),
    "minimum": (25.459, 25.698, 6.010, 9.473),
    "q1": (25.918, 26.234, 6.970, 9.919),
    "median": (26.495, 26.626, 7.036, 10.440),
    "q3": (27.418, 27.221, 7.239, 10.625),
    "maximum": (28.644, 28.106, 8.381, 10.807),
}


def test_reference_descriptive_grid(capsys, table):
    t0 = time.perf_counter()
    rep = stats.agreement_report(table)
    elapsed = time.perf_counter() - t0
    misses = []
    for row, wants in _GRID.items():
        for col, want in zip(DEVICE, wants):
            got = round(rep[row][col], 3)
            if got != want:
                misses.append(f"{row}/{col}: {got} != {want}")
    ok = not misses and elapsed < 1.0
    detail = f"{len(_GRID) * len(DEVICE)} cells at 3 decimals; {elapsed:.2f}s"
    if misses:
        detail = "; ".join(misses[:4])
    _verdict(capsys, "descriptive grid vs frozen expectations", ok, detail)


def test_reference_correlations_and_test_oracles(capsys, report, table):
    want_r = dict(zip(DEVICE, (0.851, 0.961, 0.871, 0.750)))
    r_diffs = {c: abs(report["pearson_r"][c] - v) for c, v in want_r.items()}

    # p-values are gated against independent CDF oracles, not frozen digits
    worst_p = 0.0
    for col in DEVICE:
        manual = [r[stats.DEVICE_PAIRING[col]] for r in table]
        device = [r[col] for r in table]
        t_oracle = scipy.stats.ttest_ind(manual, device, equal_var=False).pvalue
        var_m = np.var(manual, ddof=1)
        var_d = np.var(device, ddof=1)
        ratio = var_m / var_d
        tail = scipy.stats.f.cdf(ratio, len(manual) - 1, len(device) - 1)
        f_oracle = min(1.0, 2.0 * min(tail, 1.0 - tail))
        worst_p = max(
            worst_p,
            abs(report["t_p"][col] - t_oracle),
            abs(report["f_p"][col] - f_oracle),
        )

    ok = all(d <= 0.001 for d in r_diffs.values()) and worst_p <= 1e-6
    detail = (
        f"max r deviation {max(r_diffs.values()):.2e} (gate 1e-3); "
        f"max p deviation from CDF oracles {worst_p:.2e} (gate 1e-6)"
    )
    _verdict(capsys, "paired correlations and test p-value oracles", ok, detail)


# ---------------------------------------------------------------------------
# threshold search correctness


def _random_small_image(seed: int) -> tuple[np.ndarray, str]:
    rng = np.random.default_rng(seed)
    polarity = "dark" if seed % 2 == 0 else "bright"
    if seed % 3 == 0:
        px = rng.integers(0, 256, size=(24, 32), dtype=np.uint8)
    else:
        px = np.full((24, 32), 200 if polarity == "dark" else 40, dtype=np.int32)
        r0, c0 = int(rng.integers(0, 10)), int(rng.integers(0, 12))
        rh, cw = int(rng.integers(8, 14)), int(rng.integers(10, 20))
        px[r0 : r0 + rh, c0 : c0 + cw] = 60 if polarity == "dark" else 190
        px = np.clip(px + rng.integers(-25, 26, size=px.shape), 0, 255).astype(np.uint8)
    return px, polarity


def test_threshold_search_matches_scan_oracle(capsys):
    t0 = time.perf_counter()

    # hand-checkable scene: 100x100, object 40 on 220, 3000 object pixels
    px = np.full((100, 100), 220, dtype=np.uint8)
    px[20:70, 20:80] = 40
    truth = px == 40
    result = soit_search(GrayImage(px))
    mean_row = 2 * 50 / 100  # two flips on each of the 50 object rows
    mean_col = 2 * 60 / 100
    z_hand = (mean_row + mean_col) / 2.0 + 20.0 * 0 / (100 + 100)
    hand_ok = (
        result.best.threshold == 40
        and result.best.z == z_hand
        and scenes.iou(result.mask, Mask(truth)) == 1.0
    )

    mismatches = 0
    for seed in range(50):
        px, polarity = _random_small_image(seed)
        cfg = SearchConfig(polarity=polarity)
        best, curve = oracles.scan_thresholds(
            px, cfg.lo, cfg.hi, cfg.step, cfg.min_frac, cfg.max_frac,
            cfg.edge_weight, polarity, cfg.literal_divisor,
        )
        try:
            got = soit_search(GrayImage(px), cfg)
        except NoFeasibleThreshold:
            mismatches += best is not None
            continue
        same_curve = [(r.threshold, r.z, r.nac, r.feasible) for r in got.curve] == curve
        mismatches += not (best == got.best.threshold and same_curve)

    elapsed = time.perf_counter() - t0
    ok = hand_ok and mismatches == 0 and elapsed < 5.0
    detail = (
        f"hand scene z={result.best.z} t={result.best.threshold}; "
        f"{mismatches}/50 oracle mismatches; {elapsed:.2f}s"
    )
    _verdict(capsys, "threshold search vs brute-force scan", ok, detail)


def test_lighting_tier_robustness(capsys):
    t0 = time.perf_counter()
    worst_soit = 1.0
    for tier in scenes.TIERS:
        for seed in range(5):
            scene = scenes.generate(scenes.lighting_tier(tier, seed))
            mask = soit_search(scene.image).mask
            worst_soit = min(worst_soit, scenes.iou(mask, scene.truth))

    weak = {"mean": 0.0, "percentile": 0.0}
    for seed in range(5):
        scene = scenes.generate(scenes.lighting_tier("poor", seed))
        hist = histogram(scene.image)
        for method in weak:
            t = classical_threshold(hist, method)
            score = scenes.iou(binarize(scene.image, t, "dark"), scene.truth)
            weak[method] = max(weak[method], score)

    elapsed = time.perf_counter() - t0
    ok = worst_soit >= 0.90 and all(v < 0.7 for v in weak.values()) and elapsed < 30.0
    detail = (
        f"search IoU >= {worst_soit:.3f} on all tiers; poor-tier mean <= {weak['mean']:.3f}, "
        f"percentile <= {weak['percentile']:.3f} (both < 0.7); {elapsed:.1f}s"
    )
    _verdict(capsys, "lighting tier robustness", ok, detail)


# ---------------------------------------------------------------------------
# classical criteria


_SCAN_ORACLES = {
    "otsu": oracles.otsu_scan,
    "max_entropy": oracles.max_entropy_scan,
    "yen": oracles.yen_scan,
    "renyi_entropy": oracles.renyi_scan,
    "huang": oracles.huang_scan,
    "shanbhag": oracles.shanbhag_scan,
}


def _random_histogram(rng) -> np.ndarray:
    kind = rng.integers(0, 3)
    bins = np.zeros(256, dtype=np.int64)
    if kind == 0:
        bins[:] = rng.integers(0, 60, size=256)
    elif kind == 1:
        bins[:] = rng.integers(0, 80, size=256)
        bins[rng.random(256) < 0.8] = 0
    else:
        for center, spread, count in ((70, 12, 900), (180, 18, 1200)):
            draws = np.clip(rng.normal(center, spread, count).round(), 0, 255).astype(np.int64)
            bins += np.bincount(draws, minlength=256)
    bins[40] += 1
    bins[210] += 1  # keep at least two occupied levels
    return bins


def test_classical_criteria_match_brute_force(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(777)
    failures = []
    for method, oracle in _SCAN_ORACLES.items():
        for case in range(100):
            bins = _random_histogram(rng)
            got = classical_threshold(bins, method)
            want = oracle(bins)
            if got != want:
                failures.append(f"{method}[{case}]: {got} != {want}")
    for case in range(100):
        bins = _random_histogram(rng)
        got = classical_threshold(bins, "li", variant="scan")
        want = oracles.li_scan(bins)
        if got != want:
            failures.append(f"li-scan[{case}]: {got} != {want}")

    spikes = np.zeros(256, dtype=np.int64)
    spikes[50] = 500
    spikes[200] = 500
    two_spike = classical_threshold(spikes, "otsu")

    elapsed = time.perf_counter() - t0
    ok = not failures and two_spike == 50 and elapsed < 10.0
    detail = f"7 criteria x 100 histograms, two-spike tie-break -> {two_spike}; {elapsed:.1f}s"
    if failures:
        detail = "; ".join(failures[:3])
    _verdict(capsys, "criterion scans vs exhaustive evaluation", ok, detail)


# ---------------------------------------------------------------------------
# end-to-end measurement


def test_end_to_end_measurement(capsys):
    t0 = time.perf_counter()
    worst_under = 0.0
    worst_side = 0.0
    for seed in range(10):
        photo = scenes.generate_foot_photo(scenes.sample_photo_spec(seed))
        m = measure_foot(photo.image, photo.profile)
        worst_under = max(worst_under, abs(m.length_under_cm - photo.truth["length_under_cm"]))
        worst_side = max(worst_side, abs(m.length_side_cm - photo.truth["length_side_cm"]))
    elapsed = time.perf_counter() - t0
    ok = worst_under <= 0.15 and worst_side <= 0.25 and elapsed < 30.0
    detail = (
        f"10 photos: under length off by <= {worst_under:.4f} cm (gate 0.15), "
        f"side length <= {worst_side:.4f} cm (gate 0.25); {elapsed:.1f}s"
    )
    _verdict(capsys, "end-to-end measurement accuracy", ok, detail)


# ---------------------------------------------------------------------------
# property suites


def _binarize_monotone_cases(rng, n):
    bad = 0
    for _ in range(n):
        px = rng.integers(0, 256, size=(16, 20), dtype=np.uint8)
        t1, t2 = sorted(rng.choice(255, size=2, replace=False).tolist())
        img = GrayImage(px)
        dark1 = binarize(img, t1, "dark").accepted
        dark2 = binarize(img, t2, "dark").accepted
        bright1 = binarize(img, t1, "bright").accepted
        bright2 = binarize(img, t2, "bright").accepted
        if (dark1 & ~dark2).any() or (bright2 & ~bright1).any():
            bad += 1
    return bad


def _shift_equivariance_cases(rng, n):
    bad = 0
    for _ in range(n):
        px = np.full((40, 50), 180, dtype=np.int32)
        rh, cw = int(rng.integers(14, 30)), int(rng.integers(25, 45))
        r0 = int(rng.integers(0, 40 - rh))
        c0 = int(rng.integers(0, 50 - cw))
        px[r0 : r0 + rh, c0 : c0 + cw] = 60
        px += rng.integers(-8, 9, size=px.shape)
        shift = int(rng.integers(-20, 21))
        base = soit_search(GrayImage(px.astype(np.uint8)))
        moved = soit_search(GrayImage((px + shift).astype(np.uint8)))
        if (
            moved.best.threshold != base.best.threshold + shift
            or moved.best.z != base.best.z
            or moved.best.nac != base.best.nac
        ):
            bad += 1
    return bad


def _denoise_idempotence_cases(rng, n):
    bad = 0
    for _ in range(n):
        m = Mask(rng.random((30, 30)) < rng.uniform(0.2, 0.8))
        first = denoise(m, max_iters=60)
        second = denoise(first, max_iters=60)
        if not (second.accepted == first.accepted).all():
            bad += 1
    return bad


def _fit_recovery_cases(rng, n):
    bad = 0
    for _ in range(n):
        slope = float(rng.uniform(-5.0, 5.0))
        intercept = float(rng.uniform(-50.0, 50.0))
        xs = rng.uniform(1.0, 100.0, size=int(rng.integers(2, 9)))
        while np.unique(xs).size < 2:
            xs = rng.uniform(1.0, 100.0, size=3)
        obs = [ScaleObservation(float(x), slope * float(x) + intercept) for x in xs]
        fn = fit_scale(obs)
        if abs(fn.slope - slope) > 1e-9 or abs(fn.intercept - intercept) > 1e-9:
            bad += 1
    return bad


def _descriptive_permutation_cases(rng, n):
    bad = 0
    for _ in range(n):
        values = rng.uniform(-100.0, 100.0, size=int(rng.integers(2, 41))).tolist()
        shuffled = list(values)
        rng.shuffle(shuffled)
        if stats.descriptive(values) != stats.descriptive(shuffled):
            bad += 1
    return bad


def test_property_suites(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260814)
    counts = {
        "binarize monotone": (_binarize_monotone_cases(rng, 250), 250),
        "search shift equivariance": (_shift_equivariance_cases(rng, 150), 150),
        "denoise idempotence": (_denoise_idempotence_cases(rng, 250), 250),
        "fit recovery": (_fit_recovery_cases(rng, 200), 200),
        "descriptive permutation": (_descriptive_permutation_cases(rng, 150), 150),
    }
    elapsed = time.perf_counter() - t0
    total = sum(n for _, n in counts.values())
    bad = {k: b for k, (b, _) in counts.items() if b}
    ok = not bad and total == 1000 and elapsed < 60.0
    detail = f"{total} randomized cases, 0 violations; {elapsed:.1f}s"
    if bad:
        detail = f"violations: {bad}"
    _verdict(capsys, "property suites", ok, detail)
