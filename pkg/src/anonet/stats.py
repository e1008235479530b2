"""Summary statistics and significance tests for comparing anonymizers."""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

ALGORITHM_ORDER = ("es", "ua", "ga", "uga")
UNDEFINED = "−"  # rendered in place of an undefined improvement factor
EXACT_LIMIT = 10


def mean_std(values) -> tuple[float, float]:
    """Arithmetic mean and sample standard deviation (0 for a single value)."""
    values = [float(v) for v in values]
    if not values:
        raise ValueError("mean_std of an empty sample")
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    return statistics.fmean(values), sd


@dataclass(frozen=True)
class RankSumResult:
    statistic: float  # rank sum of the first sample
    p_value: float
    exact: bool
    method: str = "wilcoxon rank-sum (unpaired, two-sided)"

    def significant(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha


def _exact_null(doubled_ranks: np.ndarray, n: int) -> dict[int, int]:
    """Count n-subsets of the pooled ranks by (doubled) rank sum.

    Midranks are half-integers at worst, so doubling keeps the sums integral
    and ties are handled by conditioning on the observed rank multiset.
    """
    # table[k] maps doubled sum -> number of k-subsets seen so far
    table = [dict() for _ in range(n + 1)]
    table[0][0] = 1
    for r in doubled_ranks.tolist():
        for k in range(min(n, len(table) - 1), 0, -1):
            below = table[k - 1]
            row = table[k]
            for s, c in below.items():
                row[s + r] = row.get(s + r, 0) + c
    return table[n]


def rank_sum_test(a, b) -> RankSumResult:
    """Two-sided Wilcoxon rank-sum test of two independent samples.

    Uses the exact permutation distribution (with midranks for ties) when
    both samples have at most ten values, otherwise the tie-corrected normal
    approximation.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("rank-sum test needs two non-empty samples")
    n1, n2 = a.size, b.size
    ranks = sps.rankdata(np.concatenate([a, b]))
    w = float(ranks[:n1].sum())
    mean = n1 * (n1 + n2 + 1) / 2
    if max(n1, n2) <= EXACT_LIMIT:
        doubled = np.rint(2 * ranks).astype(np.int64)
        null = _exact_null(doubled, n1)
        total = sum(null.values())
        dev = abs(2 * w - 2 * mean)
        extreme = sum(c for s, c in null.items() if abs(s - 2 * mean) >= dev - 1e-9)
        return RankSumResult(w, min(1.0, extreme / total), True)
    _, counts = np.unique(ranks, return_counts=True)
    n = n1 + n2
    var = n1 * n2 / 12 * ((n + 1) - (counts**3 - counts).sum() / (n * (n - 1)))
    if var <= 0:
        return RankSumResult(w, 1.0, False)
    z = (abs(w - mean) - 0.5) / math.sqrt(var)
    return RankSumResult(w, float(min(1.0, 2 * sps.norm.sf(max(z, 0.0)))), False)


def improvement_factor(worse, better) -> float | None:
    """Mean reduction of ``better`` over that of ``worse``; None if undefined."""
    base = statistics.fmean(float(x) for x in worse)
    if base <= 0:
        return None
    return statistics.fmean(float(x) for x in better) / base


def format_factor(factor: float | None) -> str:
    return UNDEFINED if factor is None else f"{factor:.2f}"


def algorithm_rank(name: str) -> tuple[int, str]:
    """Sort key putting algorithms in the usual es, ua, ga, uga order."""
    algo = name.split(":", 1)[0]
    pos = ALGORITHM_ORDER.index(algo) if algo in ALGORITHM_ORDER else len(ALGORITHM_ORDER)
    return pos, name
