"""Partition-quality metrics for candidate microservice decompositions.

Six metrics, each a pure function of a partition plus the trace model
or call graph.  Lower is better for bcs, icp, ifn and ned; higher is
better for sm and mq.  METRIC_NAMES fixes the canonical order used by
calibration, artifacts and reports.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .trace_model import ApplicationModel, CallGraph

log = logging.getLogger(__name__)

METRIC_NAMES = ("bcs", "icp", "sm", "mq", "ifn", "ned")

# +1 when smaller values are preferred, -1 when larger values are.
METRIC_DIRECTIONS = {"bcs": 1, "icp": 1, "sm": -1, "mq": -1, "ifn": 1, "ned": 1}

NED_SIZE_BOUNDS = (5, 20)


class PartitionError(ValueError):
    """The partition violates coverage or non-emptiness."""


@dataclass(frozen=True)
class Partition:
    """Assignment of every class to exactly one of k non-empty clusters."""

    assignment: Mapping[str, int]
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise PartitionError(f"k must be >= 1, got {self.k}")
        used = set(self.assignment.values())
        if not self.assignment:
            raise PartitionError("partition assigns no classes")
        if used != set(range(self.k)):
            raise PartitionError(
                f"cluster ids must be exactly 0..{self.k - 1} with no empty cluster, got {sorted(used)}"
            )

    @classmethod
    def from_labels(cls, nodes: Iterable[str], labels: Iterable[int]) -> "Partition":
        """Build from parallel sequences, compacting ids to 0..K-1."""
        nodes = tuple(nodes)
        labels = list(labels)
        if len(nodes) != len(labels):
            raise PartitionError(f"{len(nodes)} nodes but {len(labels)} labels")
        remap = {old: new for new, old in enumerate(sorted(set(labels)))}
        return cls(
            assignment={n: remap[l] for n, l in zip(nodes, labels)},
            k=len(remap),
        )

    def clusters(self) -> list[list[str]]:
        out: list[list[str]] = [[] for _ in range(self.k)]
        for name, cid in self.assignment.items():
            out[cid].append(name)
        return [sorted(members) for members in out]

    def sizes(self) -> list[int]:
        return [len(members) for members in self.clusters()]

    def cluster_of(self, name: str) -> int:
        try:
            return self.assignment[name]
        except KeyError:
            raise PartitionError(f"class {name!r} is not assigned to any cluster") from None


@dataclass(frozen=True)
class MetricVector:
    bcs: float
    icp: float
    sm: float
    mq: float
    ifn: float
    ned: float

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in METRIC_NAMES], dtype=np.float64)


def icp(partition: Partition, call_counts: Mapping[tuple[str, str], int]) -> float:
    """Fraction of runtime inter-class calls that cross cluster boundaries."""
    total = 0
    cross = 0
    for (caller, callee), count in call_counts.items():
        total += count
        if partition.cluster_of(caller) != partition.cluster_of(callee):
            cross += count
    return cross / total if total else 0.0


def bcs(partition: Partition, model: ApplicationModel) -> float:
    """Mean per-cluster entropy (bits) of business-use-case incidence."""
    trace_members = [
        {c for call in ep.calls for c in call} for ep in model.entry_points
    ]
    entropies = []
    for members in partition.clusters():
        cluster = set(members)
        counts = np.array([len(cluster & tm) for tm in trace_members], dtype=np.float64)
        total = counts.sum()
        if total == 0:
            log.warning("cluster %s appears in no entry-point trace; entropy set to 0", members)
            entropies.append(0.0)
            continue
        p = counts[counts > 0] / total
        entropies.append(float(-(p * np.log2(p)).sum()))
    return float(np.mean(entropies))


def _edge_tallies(partition: Partition, graph: CallGraph):
    """Intra-cluster edge counts and the cross-edge counts per cluster pair."""
    intra = [0] * partition.k
    cross: dict[tuple[int, int], int] = {}
    for a, b in graph.undirected_edges():
        ca, cb = partition.cluster_of(a), partition.cluster_of(b)
        if ca == cb:
            intra[ca] += 1
        else:
            key = (min(ca, cb), max(ca, cb))
            cross[key] = cross.get(key, 0) + 1
    return intra, cross


def sm(partition: Partition, graph: CallGraph) -> float:
    """Structural modularity: mean cohesion minus mean pairwise coupling."""
    intra, cross = _edge_tallies(partition, graph)
    sizes = partition.sizes()
    k = partition.k
    cohesion = sum(mu / n**2 for mu, n in zip(intra, sizes)) / k
    if k == 1:
        return cohesion
    coupling = sum(
        count / (sizes[i] * sizes[j]) for (i, j), count in cross.items()
    ) / (k * (k - 1) / 2)
    return cohesion - coupling


def mq(partition: Partition, graph: CallGraph) -> float:
    """Modular quality: sum of per-cluster factors 2mu/(2mu+eps)."""
    intra, cross = _edge_tallies(partition, graph)
    eps = [0] * partition.k
    for (i, j), count in cross.items():
        eps[i] += count
        eps[j] += count
    total = 0.0
    for mu, e in zip(intra, eps):
        if mu > 0:
            total += 2 * mu / (2 * mu + e)
    return total


def ifn(partition: Partition, graph: CallGraph) -> float:
    """Interface classes (cross-cluster call targets) per cluster."""
    interfaces = set()
    for (caller, callee), count in graph.call_counts.items():
        if count > 0 and partition.cluster_of(caller) != partition.cluster_of(callee):
            interfaces.add(callee)
    return len(interfaces) / partition.k


def ned(partition: Partition, lo: int = NED_SIZE_BOUNDS[0], hi: int = NED_SIZE_BOUNDS[1]) -> float:
    """Fraction of clusters whose size falls outside [lo, hi]."""
    sizes = partition.sizes()
    extreme = sum(1 for s in sizes if s < lo or s > hi)
    return extreme / partition.k


def metric_vector(partition: Partition, model: ApplicationModel, graph: CallGraph) -> MetricVector:
    """All six metrics of one partition against one application."""
    missing = [n for n in graph.nodes if n not in partition.assignment]
    if missing:
        raise PartitionError(f"partition does not cover graph nodes: {missing}")
    return MetricVector(
        bcs=bcs(partition, model),
        icp=icp(partition, graph.call_counts),
        sm=sm(partition, graph),
        mq=mq(partition, graph),
        ifn=ifn(partition, graph),
        ned=ned(partition),
    )


def is_finite_vector(vector: MetricVector) -> bool:
    return all(math.isfinite(v) for v in vector.as_dict().values())
