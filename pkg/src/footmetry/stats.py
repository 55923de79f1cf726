"""Agreement statistics between manual and device measurements.

Implements the summary battery used on the reference measurement table:
descriptive statistics with (n+1)-position quantile interpolation, mean
absolute error, Pearson correlation, Welch's two-sided t test, and a
two-sided variance-ratio F test. The t and F p-values run through a
hand-rolled regularized incomplete beta (modified Lentz continued
fraction); the test suite checks it against an independent quadrature
oracle.
"""

import csv
import math
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

from .errors import EmptyInput, InsufficientData, ZeroVariance

_BETA_EPS = 3e-16
_BETA_FPMIN = 1e-300
_BETA_MAXIT = 300

MANUAL_COLUMNS = ("manual_length_cm", "manual_width_cm", "manual_height_cm")
DEVICE_COLUMNS = ("length_side_cm", "length_under_cm", "height_cm", "width_cm")
# which manual column each device column is compared against
DEVICE_PAIRING = {
    "length_side_cm": "manual_length_cm",
    "length_under_cm": "manual_length_cm",
    "height_cm": "manual_height_cm",
    "width_cm": "manual_width_cm",
}

DESCRIPTIVE_ROWS = ("n", "mean", "se_mean", "stdev", "minimum", "q1", "median", "q3", "maximum")


def mae(reference: Sequence[float], measured: Sequence[float]) -> float:
    if not reference or not measured:
        raise EmptyInput("mean absolute error of nothing")
    if len(reference) != len(measured):
        raise ValueError("need two equal-length sequences")
    return math.fsum(abs(a - b) for a, b in zip(reference, measured)) / len(reference)


def quantile(xs: Sequence[float], p: float) -> float:
    """Order-statistic quantile at position p(n+1), linearly interpolated
    and clamped to the sample range. With n=15 this puts Q1 exactly on the
    4th and Q3 on the 12th order statistic."""
    if not xs:
        raise ValueError("empty sample")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    s = sorted(xs)
    n = len(s)
    h = p * (n + 1)
    if h <= 1.0:
        return s[0]
    if h >= n:
        return s[-1]
    k = int(h)
    frac = h - k
    return s[k - 1] + frac * (s[k] - s[k - 1])


def descriptive(xs: Sequence[float]) -> dict[str, float]:
    if len(xs) < 2:
        raise InsufficientData(f"need at least 2 values, got {len(xs)}")
    n = len(xs)
    mean = math.fsum(xs) / n
    var = math.fsum((x - mean) ** 2 for x in xs) / (n - 1)
    sd = math.sqrt(var)
    return {
        "n": float(n),
        "mean": mean,
        "se_mean": sd / math.sqrt(n),
        "stdev": sd,
        "minimum": min(xs),
        "q1": quantile(xs, 0.25),
        "median": quantile(xs, 0.5),
        "q3": quantile(xs, 0.75),
        "maximum": max(xs),
    }


def pearson(a: Sequence[float], b: Sequence[float]) -> float:
    if len(a) != len(b) or len(a) < 2:
        raise InsufficientData("need two equal-length samples of size >= 2")
    n = len(a)
    ma = math.fsum(a) / n
    mb = math.fsum(b) / n
    cov = math.fsum((x - ma) * (y - mb) for x, y in zip(a, b))
    va = math.fsum((x - ma) ** 2 for x in a)
    vb = math.fsum((y - mb) ** 2 for y in b)
    if va == 0.0 or vb == 0.0:
        raise ZeroVariance("constant sample has no correlation")
    return cov / math.sqrt(va * vb)


# ---------------------------------------------------------------------------
# regularized incomplete beta, continued fraction form


def _betacf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETA_FPMIN:
        d = _BETA_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_FPMIN:
            d = _BETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETA_FPMIN:
            c = _BETA_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_FPMIN:
            d = _BETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETA_FPMIN:
            c = _BETA_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            break
    return h


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError(f"a and b must be positive, got {a}, {b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_bt = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def student_t_sf2(t: float, df: float) -> float:
    """Two-sided tail probability P(|T| >= |t|) for Student's t."""
    if df <= 0.0:
        raise ValueError(f"df must be positive, got {df}")
    return reg_inc_beta(df / 2.0, 0.5, df / (df + t * t))


def f_cdf(f: float, d1: float, d2: float) -> float:
    if d1 <= 0.0 or d2 <= 0.0:
        raise ValueError(f"degrees of freedom must be positive, got {d1}, {d2}")
    if f <= 0.0:
        return 0.0
    x = d1 * f / (d1 * f + d2)
    return reg_inc_beta(d1 / 2.0, d2 / 2.0, x)


# ---------------------------------------------------------------------------
# tests of agreement


@dataclass(frozen=True)
class TTestResult:
    statistic: float
    df: float
    p_value: float


@dataclass(frozen=True)
class FTestResult:
    statistic: float
    df1: int
    df2: int
    p_value: float


def t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Welch's unequal-variance t test, two-sided."""
    if len(a) < 2 or len(b) < 2:
        raise InsufficientData("each sample needs at least 2 values")
    n1, n2 = len(a), len(b)
    m1 = math.fsum(a) / n1
    m2 = math.fsum(b) / n2
    v1 = math.fsum((x - m1) ** 2 for x in a) / (n1 - 1)
    v2 = math.fsum((x - m2) ** 2 for x in b) / (n2 - 1)
    se2 = v1 / n1 + v2 / n2
    if se2 == 0.0:
        # both samples constant; identical means give p=1, different give p=0
        if m1 == m2:
            return TTestResult(statistic=0.0, df=float(n1 + n2 - 2), p_value=1.0)
        return TTestResult(statistic=math.copysign(math.inf, m1 - m2), df=float(n1 + n2 - 2), p_value=0.0)
    t = (m1 - m2) / math.sqrt(se2)
    df = se2 * se2 / ((v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1))
    return TTestResult(statistic=t, df=df, p_value=student_t_sf2(t, df))


def f_test(a: Sequence[float], b: Sequence[float]) -> FTestResult:
    """Variance-ratio F test, two-sided convention p = 2 min(P<=, P>=),
    clamped to 1."""
    if len(a) < 2 or len(b) < 2:
        raise InsufficientData("each sample needs at least 2 values")
    n1, n2 = len(a), len(b)
    m1 = math.fsum(a) / n1
    m2 = math.fsum(b) / n2
    v1 = math.fsum((x - m1) ** 2 for x in a) / (n1 - 1)
    v2 = math.fsum((x - m2) ** 2 for x in b) / (n2 - 1)
    d1, d2 = n1 - 1, n2 - 1
    if v2 == 0.0:
        if v1 == 0.0:
            return FTestResult(statistic=1.0, df1=d1, df2=d2, p_value=1.0)
        return FTestResult(statistic=math.inf, df1=d1, df2=d2, p_value=0.0)
    f = v1 / v2
    cdf = f_cdf(f, d1, d2)
    p = min(1.0, 2.0 * min(cdf, 1.0 - cdf))
    if v1 == v2 and d1 == d2:
        p = 1.0  # symmetric point: both tails are exactly one half
    return FTestResult(statistic=f, df1=d1, df2=d2, p_value=p)


# ---------------------------------------------------------------------------
# reference table and the full report


def load_reference_table(path=None) -> list[dict[str, float]]:
    """Rows of the bundled reference measurement table (or another CSV with
    the same columns). Lines starting with # are version/comment lines.
    Raises ValueError naming any missing column."""
    if path is None:
        src = resources.files("footmetry.data").joinpath("reference_table.csv")
        text = src.read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    required = ("subject",) + MANUAL_COLUMNS + DEVICE_COLUMNS
    header = reader.fieldnames or []
    missing = [c for c in required if c not in header]
    if missing:
        raise ValueError(f"input table is missing column(s): {', '.join(missing)}")
    rows = []
    for raw in reader:
        rows.append({k: float(raw[k]) for k in required})
    if not rows:
        raise ValueError("input table has no data rows")
    return rows


def agreement_report(rows: Sequence[dict[str, float]]) -> dict[str, dict[str, float | None]]:
    """Full statistic-by-column report.

    Every column gets the descriptive battery; device columns additionally
    get MAE, Pearson r, Welch t p, and F p against their paired manual
    column. Returns {statistic: {column: value}} with None where a
    statistic does not apply.
    """
    columns = MANUAL_COLUMNS + DEVICE_COLUMNS
    series = {c: [r[c] for r in rows] for c in columns}
    stats = DESCRIPTIVE_ROWS + ("mae", "pearson_r", "t_p", "f_p")
    report: dict[str, dict[str, float | None]] = {s: {c: None for c in columns} for s in stats}
    for c in columns:
        d = descriptive(series[c])
        for s in DESCRIPTIVE_ROWS:
            report[s][c] = d[s]
    for c in DEVICE_COLUMNS:
        ref = series[DEVICE_PAIRING[c]]
        got = series[c]
        report["mae"][c] = mae(ref, got)
        report["pearson_r"][c] = pearson(ref, got)
        report["t_p"][c] = t_test(ref, got).p_value
        report["f_p"][c] = f_test(ref, got).p_value
    return report
