"""Statistical validation: bootstrap CIs, paired t-test, Mann-Whitney U,
Cohen's d.

The t and normal tail probabilities are computed from the regularized
incomplete beta function (Lentz-style continued fraction) and erfc, so
results are reproducible with no SciPy dependency; the test suite
cross-checks both against independent references.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    EmptySample,
    LengthMismatch,
    TooFewValues,
    ZeroPooledVariance,
    ZeroVariance,
)
from .rng import resample_indices

EXACT_MWU_MAX_N = 12


class TestKind(str, Enum):
    PAIRED_T = "paired_t"
    MANN_WHITNEY_U = "mann_whitney_u"


@dataclass(frozen=True)
class BootstrapResult:
    point_mean: float
    ci_low: float
    ci_high: float
    n_boot: int
    level: float
    seed: int


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    test_kind: TestKind
    effect_size_d: float | None = None


# --- special functions -------------------------------------------------

def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """Two-sided Student-t tail probability."""
    if df <= 0:
        raise ValueError("df must be positive")
    x = df / (df + t * t)
    return betainc(df / 2.0, 0.5, x)


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


# --- operations --------------------------------------------------------

def bootstrap_ci(values, n_boot: int = 1000, level: float = 0.95,
                 seed: int = 42) -> BootstrapResult:
    """Percentile bootstrap CI for the mean, deterministic in the seed."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        raise TooFewValues(f"need >= 2 values, got {values.size}")
    if n_boot < 100:
        raise TooFewValues(f"need n_boot >= 100, got {n_boot}")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0,1)")
    idx = resample_indices(seed, values.size, n_boot)
    boot_means = values[idx].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.percentile(boot_means, [100.0 * alpha, 100.0 * (1.0 - alpha)],
                           method="linear")
    return BootstrapResult(
        point_mean=float(values.mean()),
        ci_low=float(lo),
        ci_high=float(hi),
        n_boot=n_boot,
        level=level,
        seed=seed,
    )


def paired_t_test(a, b) -> TestResult:
    """Two-sided paired t-test on per-item differences a - b."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size != b.size:
        raise LengthMismatch(f"{a.size} vs {b.size}")
    if a.size < 2:
        raise TooFewValues("need >= 2 pairs")
    d = a - b
    sd = d.std(ddof=1)
    if sd == 0.0:
        if d.mean() == 0.0:
            return TestResult(0.0, 1.0, TestKind.PAIRED_T)
        raise ZeroVariance("differences are constant and nonzero")
    t = float(d.mean() / (sd / math.sqrt(d.size)))
    p = t_sf_two_sided(t, d.size - 1)
    return TestResult(t, min(max(p, 0.0), 1.0), TestKind.PAIRED_T)


def _midranks(pooled: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Midranks (1-based) of the pooled sample plus tie group sizes."""
    order = np.argsort(pooled, kind="stable")
    ranks = np.empty(pooled.size, dtype=np.float64)
    ties = []
    i = 0
    while i < pooled.size:
        j = i
        while j + 1 < pooled.size and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        mid = (i + j) / 2.0 + 1.0
        for idx in order[i:j + 1]:
            ranks[idx] = mid
        if j > i:
            ties.append(j - i + 1)
        i = j + 1
    return ranks, ties


def _u_statistic(a: np.ndarray, b: np.ndarray) -> tuple[float, list[int]]:
    pooled = np.concatenate([a, b])
    ranks, ties = _midranks(pooled)
    rank_sum_a = ranks[:a.size].sum()
    u = rank_sum_a - a.size * (a.size + 1) / 2.0
    return float(u), ties


def _exact_u_counts(n_a: int, n_b: int) -> np.ndarray:
    """Distribution of U over all arrangements (no ties), by counting.

    counts[u] = number of ways to choose n_a of the n_a+n_b distinct
    ranks with U statistic exactly u.
    """
    max_u = n_a * n_b
    # dp[j][u]: ways using j items from a growing rank pool
    dp = np.zeros((n_a + 1, max_u + 1), dtype=np.float64)
    dp[0][0] = 1.0
    for rank_pos in range(1, n_a + n_b + 1):
        for j in range(min(rank_pos, n_a), 0, -1):
            # placing the j-th smallest a-item at this pooled rank adds
            # (rank_pos - j) wins over b-items
            add = rank_pos - j
            dp[j, add:] += dp[j - 1, :max_u + 1 - add]
    return dp[n_a]


def mann_whitney_u(a, b) -> TestResult:
    """Two-sided Mann-Whitney U test.

    Small untied samples (pooled n <= 12) get an exact enumeration
    p-value; otherwise the normal approximation with tie and continuity
    corrections applies.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise EmptySample("both samples must be non-empty")
    u, ties = _u_statistic(a, b)
    n_a, n_b = a.size, b.size
    nm = n_a * n_b
    mu = nm / 2.0

    if not ties and n_a + n_b <= EXACT_MWU_MAX_N:
        counts = _exact_u_counts(n_a, n_b)
        u_min = min(u, nm - u)
        total = counts.sum()
        extreme = counts[:int(round(u_min)) + 1].sum() + counts[int(math.ceil(nm - u_min)):].sum()
        p = min(float(extreme / total), 1.0)
        return TestResult(u, p, TestKind.MANN_WHITNEY_U)

    n = n_a + n_b
    tie_term = sum(t ** 3 - t for t in ties) / (n * (n - 1)) if n > 1 else 0.0
    var = nm / 12.0 * ((n + 1) - tie_term)
    if var <= 0.0:
        return TestResult(u, 1.0, TestKind.MANN_WHITNEY_U)
    # continuity correction pulls the statistic toward the mean
    shift = u - mu
    cc = 0.5 if shift != 0 else 0.0
    z = (abs(shift) - cc) / math.sqrt(var)
    p = 2.0 * (1.0 - normal_cdf(z))
    return TestResult(u, min(max(p, 0.0), 1.0), TestKind.MANN_WHITNEY_U)


def cohens_d(a, b) -> float:
    """Standardized mean difference with the pooled (n-1) sd."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise TooFewValues("need >= 2 values per sample")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    pooled = ((a.size - 1) * va + (b.size - 1) * vb) / (a.size + b.size - 2)
    if pooled <= 0.0:
        raise ZeroPooledVariance("pooled variance is zero")
    return float((a.mean() - b.mean()) / math.sqrt(pooled))
