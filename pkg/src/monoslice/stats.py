"""Rank statistics for comparing result distributions.

Spearman correlation feeds weight calibration; Cliff's delta and the
Scott-Knott recursive bi-clustering rank competing configurations in
reports.  Scott-Knott splits a mean-sorted group list where the
between-part separation E[delta] is maximal and keeps the split only
when its Cliff's delta clears the negligible-effect threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

CLIFFS_NEGLIGIBLE = 0.147


@dataclass(frozen=True)
class RankedGroups:
    """Groups with their assigned ranks; rank 1 is the best group."""

    groups: dict[str, tuple[float, ...]]
    ranks: dict[str, int]


def _fractional_ranks(x: np.ndarray) -> np.ndarray:
    """Average ranks (1-based); tied values share the mean of their positions."""
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x), dtype=np.float64)
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average-tie fractional ranks."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"need equal-length 1-D samples, got {x.shape} and {y.shape}")
    if len(x) < 2:
        raise ValueError("need at least 2 observations")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ValueError("correlation undefined for a constant series")
    rx = _fractional_ranks(x)
    ry = _fractional_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    return float((rx * ry).sum() / np.sqrt((rx**2).sum() * (ry**2).sum()))


def cliffs_delta(a: Sequence[float], b: Sequence[float]) -> float:
    """Dominance effect size: P(a > b) - P(a < b) over all sample pairs."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("samples must be non-empty")
    greater = (a[:, None] > b[None, :]).sum()
    less = (a[:, None] < b[None, :]).sum()
    return float((int(greater) - int(less)) / (a.size * b.size))


def scott_knott(
    groups: Mapping[str, Sequence[float]],
    effect_threshold: float = CLIFFS_NEGLIGIBLE,
    lower_is_better: bool = True,
) -> RankedGroups:
    """Recursively partition mean-sorted groups into statistically distinct ranks."""
    if len(groups) < 1:
        raise ValueError("need at least one group")
    samples = {name: tuple(float(v) for v in vals) for name, vals in groups.items()}
    for name, vals in samples.items():
        if not vals:
            raise ValueError(f"group {name!r} has no samples")

    def mean(name: str) -> float:
        return float(np.mean(samples[name]))

    # best first; name tie-break keeps the ordering deterministic
    order = sorted(samples, key=lambda n: (mean(n) if lower_is_better else -mean(n), n))

    ranks: dict[str, int] = {}

    def pooled(names: list[str]) -> np.ndarray:
        return np.concatenate([samples[n] for n in names])

    def assign(sub: list[str], next_rank: int) -> int:
        if len(sub) == 1:
            ranks[sub[0]] = next_rank
            return next_rank + 1
        all_vals = pooled(sub)
        grand = all_vals.mean()
        best_cut, best_score = 1, -np.inf
        for cut in range(1, len(sub)):
            m = pooled(sub[:cut])
            n = pooled(sub[cut:])
            score = (
                m.size / all_vals.size * (m.mean() - grand) ** 2
                + n.size / all_vals.size * (n.mean() - grand) ** 2
            )
            if score > best_score:
                best_cut, best_score = cut, score
        delta = cliffs_delta(pooled(sub[:best_cut]), pooled(sub[best_cut:]))
        if abs(delta) >= effect_threshold:
            next_rank = assign(sub[:best_cut], next_rank)
            return assign(sub[best_cut:], next_rank)
        for name in sub:
            ranks[name] = next_rank
        return next_rank + 1

    assign(order, 1)
    return RankedGroups(groups=samples, ranks=ranks)
