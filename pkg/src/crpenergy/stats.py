"""Summary statistics and the Kruskal-Wallis / Dunn-Bonferroni pipeline.

Lower values are better throughout: in a relation matrix ``'>'`` means the
row method is significantly better (lower energy) than the column method.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

from crpenergy.errors import DegenerateGroups, EmptySample

ALPHA = 0.05


@dataclass(frozen=True)
class ResultSample:
    method: str
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise EmptySample(self.method)


def _values(group):
    return group.values if isinstance(group, ResultSample) else tuple(float(v) for v in group)


def summarize(sample):
    """Return ``(min, median, max, sd)`` with the sample (n - 1) standard deviation."""
    v = _values(sample)
    if not v:
        raise EmptySample("cannot summarise an empty sample")
    sd = statistics.stdev(v) if len(v) > 1 else 0.0
    return min(v), statistics.median(v), max(v), sd


def midranks(values):
    """1-based ranks with ties sharing their average rank, plus the tie-group sizes."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    ties = []
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        r = (i + j + 2) / 2.0
        for k in range(i, j + 1):
            ranks[order[k]] = r
        ties.append(j - i + 1)
        i = j + 1
    return ranks, ties


def _pooled(groups):
    vals = [_values(g) for g in groups]
    if len(vals) < 2:
        raise DegenerateGroups("need at least two groups")
    if any(not v for v in vals):
        raise EmptySample("every group needs at least one value")
    pooled = [x for v in vals for x in v]
    ranks, ties = midranks(pooled)
    mean_ranks, at = [], 0
    for v in vals:
        mean_ranks.append(sum(ranks[at : at + len(v)]) / len(v))
        at += len(v)
    return vals, mean_ranks, ties, len(pooled)


# -- regularised incomplete gamma ----------------------------------------------


def _gamma_series(a, x):
    # P(a, x) = e^-x x^a / Gamma(a+1) * sum x^n / ((a+1)...(a+n))
    term = total = 1.0 / a
    ap = a
    for _ in range(1000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cfrac(a, x):
    # Q(a, x) by the modified Lentz continued fraction.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        d = tiny if abs(d) < tiny else d
        c = b + an / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammaincc(a, x):
    """Regularised upper incomplete gamma ``Q(a, x)``."""
    if x <= 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cfrac(a, x)


def chi2_sf(x, dof):
    return gammaincc(dof / 2.0, x / 2.0)


def norm_sf(z):
    return 0.5 * math.erfc(z / math.sqrt(2.0))


# -- tests --------------------------------------------------------------------


def kruskal_wallis(groups):
    """Tie-corrected H statistic and its chi-square (k - 1 dof) p-value."""
    vals, mean_ranks, ties, n = _pooled(groups)
    correction = 1.0 - sum(t**3 - t for t in ties) / (n**3 - n) if n > 1 else 0.0
    if correction <= 0.0:
        return 0.0, 1.0
    h = 12.0 / (n * (n + 1)) * sum(len(v) * r * r for v, r in zip(vals, mean_ranks)) - 3.0 * (n + 1)
    h /= correction
    h = max(h, 0.0)
    return h, chi2_sf(h, len(vals) - 1)


@dataclass
class DunnResult:
    methods: list
    mean_ranks: list
    z: list
    p_raw: list
    p_adjusted: list
    relations: list

    def relation(self, a, b):
        return self.relations[self.methods.index(a)][self.methods.index(b)]


def dunn_bonferroni(groups, alpha=ALPHA, names=None):
    """Pairwise Dunn z-tests on mean ranks with Bonferroni-adjusted p-values."""
    vals, mean_ranks, ties, n = _pooled(groups)
    k = len(vals)
    if names is None:
        names = [g.method if isinstance(g, ResultSample) else f"g{i}" for i, g in enumerate(groups)]
    tie_term = sum(t**3 - t for t in ties) / (12.0 * (n - 1)) if n > 1 else 0.0
    spread = n * (n + 1) / 12.0 - tie_term
    m = k * (k - 1) // 2
    z = [[0.0] * k for _ in range(k)]
    p_raw = [[1.0] * k for _ in range(k)]
    p_adj = [[1.0] * k for _ in range(k)]
    rel = [["-"] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            diff = mean_ranks[i] - mean_ranks[j]
            se = math.sqrt(spread * (1.0 / len(vals[i]) + 1.0 / len(vals[j]))) if spread > 0 else 0.0
            zij = diff / se if se > 0 else 0.0
            p = 2.0 * norm_sf(abs(zij))
            z[i][j] = zij
            p_raw[i][j] = min(p, 1.0)
            p_adj[i][j] = min(p * m, 1.0)
            if p_adj[i][j] < alpha and diff != 0:
                rel[i][j] = ">" if diff < 0 else "<"
            else:
                rel[i][j] = "≈"
    return DunnResult(list(names), mean_ranks, z, p_raw, p_adj, rel)
