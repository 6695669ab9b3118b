"""Feature and propagation matrices for the class graph.

Three binary views are extracted per class: which entry points exercise
it (E), which classes it shares a trace with (C) and which classes it
inherits from or is inherited by (D).  Their concatenation, row
normalized, is the node feature matrix X.  The propagation matrix Â is
the self-loop-augmented, symmetrically degree-normalized adjacency.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .trace_model import ApplicationModel, CallGraph

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FeatureBundle:
    """All matrices derived from one application, indexed by ``nodes``."""

    nodes: tuple[str, ...]
    entry_point_names: tuple[str, ...]
    E: np.ndarray
    C: np.ndarray
    D: np.ndarray
    X: np.ndarray
    A_hat: np.ndarray


def entry_point_matrix(model: ApplicationModel, graph: CallGraph) -> np.ndarray:
    """Binary |V|x|P| matrix: (i,j)=1 iff class i appears in entry point j."""
    index = {name: i for i, name in enumerate(graph.nodes)}
    E = np.zeros((len(graph.nodes), len(model.entry_points)), dtype=np.float64)
    for j, ep in enumerate(model.entry_points):
        for caller, callee in ep.calls:
            E[index[caller], j] = 1.0
            E[index[callee], j] = 1.0
    return E


def cooccurrence_matrix(model: ApplicationModel, graph: CallGraph) -> np.ndarray:
    """Binary |V|x|V| matrix: 1 iff two classes share some trace; diagonal 1."""
    index = {name: i for i, name in enumerate(graph.nodes)}
    n = len(graph.nodes)
    C = np.eye(n, dtype=np.float64)
    for ep in model.entry_points:
        members = sorted({index[c] for call in ep.calls for c in call})
        for a in members:
            for b in members:
                C[a, b] = 1.0
    return C


def dependence_matrix(model: ApplicationModel, graph: CallGraph) -> np.ndarray:
    """Binary |V|x|V| matrix of direct inheritance pairs, zero diagonal.

    Pairs naming a pruned class cannot be represented; they are dropped
    and logged so ingestion reports can surface them.
    """
    index = {name: i for i, name in enumerate(graph.nodes)}
    D = np.zeros((len(graph.nodes), len(graph.nodes)), dtype=np.float64)
    for a, b in model.inheritance:
        if a not in index or b not in index:
            log.info("dropping inheritance pair (%s, %s): class not in call graph", a, b)
            continue
        D[index[a], index[b]] = 1.0
        D[index[b], index[a]] = 1.0
    return D


def feature_matrix(E: np.ndarray, C: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Concatenate [E | C | D] and L1-normalize each row; zero rows stay zero."""
    if not (E.shape[0] == C.shape[0] == D.shape[0]):
        raise ValueError(f"row counts disagree: E={E.shape[0]}, C={C.shape[0]}, D={D.shape[0]}")
    X = np.concatenate([E, C, D], axis=1).astype(np.float64)
    sums = X.sum(axis=1, keepdims=True)
    nonzero = sums[:, 0] != 0
    X[nonzero] /= sums[nonzero]
    return X


def normalized_adjacency(A: np.ndarray) -> np.ndarray:
    """Symmetric degree normalization of A with self-loops added first."""
    A = np.asarray(A, dtype=np.float64)
    A_tilde = A + np.eye(A.shape[0])
    inv_sqrt = 1.0 / np.sqrt(A_tilde.sum(axis=1))
    return A_tilde * inv_sqrt[:, None] * inv_sqrt[None, :]


def build_feature_bundle(model: ApplicationModel, graph: CallGraph) -> FeatureBundle:
    E = entry_point_matrix(model, graph)
    C = cooccurrence_matrix(model, graph)
    D = dependence_matrix(model, graph)
    return FeatureBundle(
        nodes=graph.nodes,
        entry_point_names=tuple(ep.name for ep in model.entry_points),
        E=E,
        C=C,
        D=D,
        X=feature_matrix(E, C, D),
        A_hat=normalized_adjacency(graph.adjacency),
    )
