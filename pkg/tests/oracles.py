"""Independent brute-force oracles for the partition metrics.

Deliberately written without numpy and without sharing any code with
the package: each function is a direct, slow transcription of the
metric definition, used to cross-check the production implementations.
"""

import math
from itertools import combinations


def set_partitions(items):
    """Yield every partition of `items` as a list of lists (Bell enumeration)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in set_partitions(rest):
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1:]
        yield [[first]] + sub


def oracle_icp(clusters, call_counts):
    where = {c: i for i, members in enumerate(clusters) for c in members}
    total = sum(call_counts.values())
    if total == 0:
        return 0.0
    cross = sum(n for (a, b), n in call_counts.items() if where[a] != where[b])
    return cross / total


def oracle_bcs(clusters, trace_sets):
    total_entropy = 0.0
    for members in clusters:
        counts = [len(set(members) & trace) for trace in trace_sets]
        denom = sum(counts)
        h = 0.0
        if denom > 0:
            for n in counts:
                if n > 0:
                    p = n / denom
                    h -= p * math.log2(p)
        total_entropy += h
    return total_entropy / len(clusters)


def oracle_sm(clusters, edges):
    where = {c: i for i, members in enumerate(clusters) for c in members}
    k = len(clusters)
    coh = 0.0
    for members in clusters:
        mu = sum(1 for a, b in edges if where[a] == where[b] and a in members)
        coh += mu / len(members) ** 2
    coh /= k
    if k == 1:
        return coh
    coup = 0.0
    for i, j in combinations(range(k), 2):
        sigma = sum(1 for a, b in edges if {where[a], where[b]} == {i, j})
        coup += sigma / (len(clusters[i]) * len(clusters[j]))
    return coh - coup / (k * (k - 1) / 2)


def oracle_mq(clusters, edges):
    where = {c: i for i, members in enumerate(clusters) for c in members}
    total = 0.0
    for i, members in enumerate(clusters):
        mu = sum(1 for a, b in edges if where[a] == i and where[b] == i)
        eps = sum(1 for a, b in edges if (where[a] == i) != (where[b] == i))
        if mu > 0:
            total += 2 * mu / (2 * mu + eps)
    return total


def oracle_ifn(clusters, call_counts):
    where = {c: i for i, members in enumerate(clusters) for c in members}
    targets = {b for (a, b), n in call_counts.items() if n > 0 and where[a] != where[b]}
    return len(targets) / len(clusters)


def oracle_ned(clusters, lo=5, hi=20):
    extreme = sum(1 for members in clusters if not lo <= len(members) <= hi)
    return extreme / len(clusters)


def adjusted_rand_index(labels_a, labels_b):
    """ARI between two labelings of the same items."""
    assert len(labels_a) == len(labels_b)
    n = len(labels_a)
    pairs = {}
    rows = {}
    cols = {}
    for a, b in zip(labels_a, labels_b):
        pairs[(a, b)] = pairs.get((a, b), 0) + 1
        rows[a] = rows.get(a, 0) + 1
        cols[b] = cols.get(b, 0) + 1

    def c2(x):
        return x * (x - 1) // 2

    index = sum(c2(v) for v in pairs.values())
    sum_rows = sum(c2(v) for v in rows.values())
    sum_cols = sum(c2(v) for v in cols.values())
    expected = sum_rows * sum_cols / c2(n)
    max_index = (sum_rows + sum_cols) / 2
    if max_index == expected:
        return 1.0
    return (index - expected) / (max_index - expected)
