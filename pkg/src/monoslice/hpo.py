"""Hyper-parameter search, weight calibration and frontier selection.

The search space covers the trainer's knobs (cluster count, loss
coefficients, hidden sizes, dropout).  tpe_suggest implements a
tree-of-Parzen-estimators step: after a uniform startup phase the trial
history is split at the 0.25 loss quantile, per-dimension Gaussian
kernel densities l (best) and g (rest) are fitted, and the candidate
maximizing l/g is proposed.  calibrate_weights derives metric weights
from Spearman correlations over many uniformly random runs; optimize
runs the budgeted search and marks the weighted-loss argmin trial.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .clustering import baseline_hierarchical
from .gcn import DivergenceError, TrainingConfig, train
from .metrics import METRIC_NAMES, MetricVector, Partition, metric_vector
from .stats import spearman
from .trace_model import ApplicationModel, build_call_graph

log = logging.getLogger(__name__)

TPE_N_STARTUP = 20
TPE_GAMMA = 0.25
TPE_N_CANDIDATES = 24


class CalibrationError(RuntimeError):
    """Correlations too weak or undefined to derive stable weights."""


@dataclass(frozen=True)
class Dimension:
    name: str
    lo: float
    hi: float
    integer: bool = False
    exclusive_hi: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"dimension {self.name!r}: need lo < hi, got [{self.lo}, {self.hi}]")

    def sample(self, rng: np.random.Generator):
        if self.integer:
            return int(rng.integers(int(self.lo), int(self.hi) + 1))
        return float(rng.uniform(self.lo, self.hi))

    def clip(self, value: float):
        hi = np.nextafter(self.hi, self.lo) if self.exclusive_hi else self.hi
        value = min(max(value, self.lo), hi)
        if self.integer:
            value = min(max(round(value), int(self.lo)), int(self.hi))
            return int(value)
        return float(value)


@dataclass(frozen=True)
class SearchSpace:
    dimensions: tuple[Dimension, ...]

    def __post_init__(self):
        if not self.dimensions:
            raise ValueError("search space needs at least one dimension")
        names = [d.name for d in self.dimensions]
        if len(set(names)) != len(names):
            raise ValueError("dimension names must be unique")

    @classmethod
    def gcn(cls) -> "SearchSpace":
        return cls(
            dimensions=(
                Dimension("k", 2, 13, integer=True),
                Dimension("alpha1", 0.0, 1.0),
                Dimension("alpha2", 0.0, 1.0),
                Dimension("alpha3", 0.0, 1.0),
                Dimension("h1", 4, 64, integer=True),
                Dimension("h2", 4, 64, integer=True),
                Dimension("dropout", 0.0, 1.0, exclusive_hi=True),
            )
        )

    def sample(self, rng: np.random.Generator) -> dict:
        return {d.name: d.sample(rng) for d in self.dimensions}


@dataclass(frozen=True)
class WeightVector:
    w_sm: float
    w_icp: float
    w_ned: float
    w_bcs: float

    @classmethod
    def uniform(cls) -> "WeightVector":
        """Unit weights: +1 for minimized metrics, -1 for maximized SM."""
        return cls(w_sm=-1.0, w_icp=1.0, w_ned=1.0, w_bcs=1.0)

    def as_dict(self) -> dict[str, float]:
        return {"w_sm": self.w_sm, "w_icp": self.w_icp, "w_ned": self.w_ned, "w_bcs": self.w_bcs}


def selection_loss(metrics: MetricVector, weights: WeightVector) -> float:
    """Weighted sum over the pruned metric set (bcs, icp, sm) plus ned."""
    return (
        weights.w_bcs * metrics.bcs
        + weights.w_icp * metrics.icp
        + weights.w_sm * metrics.sm
        + weights.w_ned * metrics.ned
    )


def weights_from_correlations(rho_sm_mq: float, rho_bcs_icp: float) -> WeightVector:
    """Turn the two calibration correlations into a WeightVector.

    Correlations with magnitude below 0.05 would blow the reciprocal
    up; that is treated as an under-sampled calibration.
    """
    for label, rho in (("SM,MQ", rho_sm_mq), ("BCS,ICP", rho_bcs_icp)):
        if not math.isfinite(rho) or abs(rho) < 0.05:
            raise CalibrationError(
                f"correlation({label}) = {rho!r} is too weak to calibrate; increase n_runs"
            )
    return WeightVector(w_sm=-1.0 / rho_sm_mq, w_icp=1.0 / rho_bcs_icp, w_ned=0.2, w_bcs=0.1)


@dataclass(frozen=True, eq=False)
class CalibrationResult:
    """Unpacks as (weights, correlations); samples kept for the artifact."""

    weights: WeightVector
    correlations: np.ndarray  # 6x6 in METRIC_NAMES order, nan where undefined
    samples: np.ndarray  # one row of METRIC_NAMES values per successful run
    n_failed: int

    def __iter__(self):
        return iter((self.weights, self.correlations))


def _metric_correlations(samples: np.ndarray) -> np.ndarray:
    m = len(METRIC_NAMES)
    corr = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            try:
                rho = spearman(samples[:, i], samples[:, j])
            except ValueError:
                rho = np.nan
            corr[i, j] = corr[j, i] = rho
    return corr


def calibrate_weights(
    model: ApplicationModel,
    bundle,
    n_runs: int = 1000,
    seed: int = 0,
    epochs: int = 300,
) -> CalibrationResult:
    """Monte-Carlo weight calibration over uniformly random settings."""
    if n_runs < 2:
        raise ValueError("n_runs must be at least 2")
    graph = build_call_graph(model)
    space = SearchSpace.gcn()
    sample_ss, seed_ss = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(sample_ss)
    run_seeds = np.random.default_rng(seed_ss).integers(0, 2**63, size=n_runs)

    rows = []
    n_failed = 0
    for i in range(n_runs):
        point = space.sample(rng)
        try:
            config = _training_config(point, epochs)
            _, partition = train(bundle, config, int(run_seeds[i]))
            rows.append(metric_vector(partition, model, graph).as_array())
        except (ValueError, DivergenceError) as exc:
            n_failed += 1
            log.info("calibration run %d failed: %s", i, exc)
    if len(rows) < 2:
        raise CalibrationError(
            f"only {len(rows)} of {n_runs} calibration runs succeeded; increase n_runs"
        )
    samples = np.vstack(rows)
    corr = _metric_correlations(samples)
    idx = {name: i for i, name in enumerate(METRIC_NAMES)}
    weights = weights_from_correlations(
        corr[idx["sm"], idx["mq"]], corr[idx["bcs"], idx["icp"]]
    )
    return CalibrationResult(weights=weights, correlations=corr, samples=samples, n_failed=n_failed)


def _log_density(x: float, values: np.ndarray, bandwidth: float) -> float:
    """Log-density of an equal-weight Gaussian kernel mixture."""
    z = (x - values) / bandwidth
    logs = -0.5 * z**2 - math.log(bandwidth) - 0.5 * math.log(2 * math.pi)
    peak = logs.max()
    return float(peak + np.log(np.exp(logs - peak).sum())) - math.log(len(values))


def _bandwidth(values: np.ndarray, dim: Dimension) -> float:
    spread = float(values.max() - values.min())
    spacing = spread / max(1, len(values) - 1)
    return max(spacing, 0.01 * (dim.hi - dim.lo))


def tpe_suggest(
    history: Sequence[tuple[Mapping[str, float], float]],
    space: SearchSpace,
    rng: np.random.Generator,
) -> dict:
    """Propose the next point: uniform during startup, then argmax l/g."""
    if len(history) < TPE_N_STARTUP:
        return space.sample(rng)

    losses = np.array([loss for _, loss in history], dtype=np.float64)
    order = np.argsort(losses, kind="stable")
    n_best = max(1, math.ceil(TPE_GAMMA * len(history)))
    best_idx, rest_idx = order[:n_best], order[n_best:]

    point: dict = {}
    per_dim: list[tuple[Dimension, np.ndarray, float, np.ndarray, float]] = []
    for dim in space.dimensions:
        best = np.array([float(history[i][0][dim.name]) for i in best_idx])
        rest = np.array([float(history[i][0][dim.name]) for i in rest_idx])
        per_dim.append((dim, best, _bandwidth(best, dim), rest, _bandwidth(rest, dim)))

    candidates = []
    scores = []
    for _ in range(TPE_N_CANDIDATES):
        cand = {}
        score = 0.0
        for dim, best, bw_l, rest, bw_g in per_dim:
            center = best[rng.integers(len(best))]
            x = dim.clip(center + rng.normal(0.0, bw_l))
            cand[dim.name] = x
            score += _log_density(float(x), best, bw_l) - _log_density(float(x), rest, bw_g)
        candidates.append(cand)
        scores.append(score)
    return candidates[int(np.argmax(scores))]


@dataclass(frozen=True, eq=False)
class Trial:
    id: int
    hyper_params: dict
    seed: int
    metrics: MetricVector | None
    partition: Partition | None
    wall_time: float
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True, eq=False)
class Frontier:
    trials: tuple[Trial, ...]
    weights: WeightVector
    selected_id: int | None

    def selected_trial(self) -> Trial | None:
        if self.selected_id is None:
            return None
        return next(t for t in self.trials if t.id == self.selected_id)

    def losses(self) -> list[tuple[int, float]]:
        return [(t.id, selection_loss(t.metrics, self.weights)) for t in self.trials if t.ok]


def _training_config(point: Mapping[str, float], epochs: int) -> TrainingConfig:
    return TrainingConfig(
        k=int(point["k"]),
        epochs=epochs,
        alpha1=float(point["alpha1"]),
        alpha2=float(point["alpha2"]),
        alpha3=float(point["alpha3"]),
        h1=int(point["h1"]),
        h2=int(point["h2"]),
        dropout_rate=float(point["dropout"]),
    )


def _gcn_runner(model: ApplicationModel, bundle, epochs: int) -> Callable:
    graph = build_call_graph(model)

    def run(point: Mapping[str, float], seed: int) -> tuple[Partition, MetricVector]:
        _, partition = train(bundle, _training_config(point, epochs), seed)
        return partition, metric_vector(partition, model, graph)

    return run


def _baseline_runner(model: ApplicationModel, bundle) -> Callable:
    graph = build_call_graph(model)

    def run(point: Mapping[str, float], seed: int) -> tuple[Partition, MetricVector]:
        partition = baseline_hierarchical(model, graph, int(point["k"]))
        return partition, metric_vector(partition, model, graph)

    return run


def optimize(
    model: ApplicationModel,
    bundle,
    weights: WeightVector,
    budget: int = 100,
    seed: int = 0,
    epochs: int = 300,
    jobs: int = 1,
    algorithm: str = "gcn",
) -> Frontier:
    """Budgeted search over the space; returns all trials with the argmin marked.

    `algorithm` is "gcn" (TPE over the full space) or "baseline"
    (hierarchical Jaccard partitioner, k sampled uniformly).  Failed
    trials stay in the frontier but never feed the TPE densities and
    never win selection.  Deterministic at jobs=1.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    if algorithm == "gcn":
        space = SearchSpace.gcn()
        runner = _gcn_runner(model, bundle, epochs)
    elif algorithm == "baseline":
        n = len(bundle.nodes)
        space = SearchSpace(dimensions=(Dimension("k", 2, max(2, min(13, n)), integer=True),))
        runner = _baseline_runner(model, bundle)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")

    tpe_ss, seed_ss = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(tpe_ss)
    trial_seeds = np.random.default_rng(seed_ss).integers(0, 2**63, size=budget)

    trials: list[Trial] = []
    history: list[tuple[dict, float]] = []

    def evaluate(trial_id: int, point: dict) -> Trial:
        start = time.perf_counter()
        try:
            partition, metrics = runner(point, int(trial_seeds[trial_id]))
            return Trial(
                id=trial_id, hyper_params=point, seed=int(trial_seeds[trial_id]),
                metrics=metrics, partition=partition,
                wall_time=time.perf_counter() - start,
            )
        except (ValueError, DivergenceError) as exc:
            log.info("trial %d failed: %s", trial_id, exc)
            return Trial(
                id=trial_id, hyper_params=point, seed=int(trial_seeds[trial_id]),
                metrics=None, partition=None,
                wall_time=time.perf_counter() - start, error=str(exc),
            )

    next_id = 0
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        while next_id < budget:
            wave = []
            for _ in range(min(jobs, budget - next_id)):
                point = tpe_suggest(history, space, rng)
                wave.append((next_id, point))
                next_id += 1
            done = list(pool.map(lambda args: evaluate(*args), wave)) if jobs > 1 else [
                evaluate(tid, p) for tid, p in wave
            ]
            for trial in sorted(done, key=lambda t: t.id):
                trials.append(trial)
                if trial.ok:
                    history.append((trial.hyper_params, selection_loss(trial.metrics, weights)))

    return reselect(tuple(trials), weights)


def reselect(trials: Sequence[Trial], weights: WeightVector) -> Frontier:
    """Frontier over the given trials with the weighted-loss argmin marked.

    Failed trials never win; ties keep the earliest trial id.
    """
    selected_id = None
    best = math.inf
    for trial in trials:
        if trial.ok:
            loss = selection_loss(trial.metrics, weights)
            if loss < best:
                best, selected_id = loss, trial.id
    return Frontier(trials=tuple(trials), weights=weights, selected_id=selected_id)
