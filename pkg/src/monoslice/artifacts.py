"""Deterministic, human-diffable JSON artifact files.

Every run artifact (normalized model, calibrated weights, frontier,
run manifest) is a JSON document with a schema-version field, a kind
tag, and the SHA-256 of the raw input trace file it descends from.
Serialization is canonical — sorted keys, two-space indent, trailing
newline, no NaN tokens — so identical runs produce byte-identical
files and distinct runs diff cleanly.  NaN/inf values (only possible
in the correlation matrix, where a metric was constant) are stored
as null.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .hpo import (
    CalibrationResult,
    Frontier,
    SearchSpace,
    Trial,
    WeightVector,
)
from .metrics import METRIC_NAMES, MetricVector, Partition
from .trace_model import (
    ApplicationModel,
    CallGraph,
    model_from_payload,
    model_to_payload,
)

SCHEMA_VERSION = 1
KINDS = ("model", "weights", "frontier", "manifest")


class ArtifactError(ValueError):
    """Malformed, mismatched, or unreadable artifact document."""


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str) -> str:
    with open(path, "rb") as fh:
        return sha256_bytes(fh.read())


def jsonable(value):
    """Map numpy scalars/arrays to plain Python; non-finite floats to None."""
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        value = float(value)
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def canonical_json(doc: dict) -> str:
    return json.dumps(jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_artifact(path: str, doc: dict) -> str:
    """Write the document canonically; returns the serialized text."""
    text = canonical_json(doc)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text


def make_artifact(kind: str, input_sha256: str, body: dict) -> dict:
    if kind not in KINDS:
        raise ArtifactError(f"unknown artifact kind {kind!r}")
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, "input_sha256": input_sha256}
    overlap = set(doc) & set(body)
    if overlap:
        raise ArtifactError(f"body redefines envelope fields {sorted(overlap)}")
    doc.update(body)
    return doc


def read_artifact(path: str, expect_kind: str | None = None) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ArtifactError(f"cannot read artifact {path}: {exc}") from exc
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"artifact {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ArtifactError(f"artifact {path} must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ArtifactError(
            f"artifact {path}: unsupported schema_version {doc.get('schema_version')!r}"
        )
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ArtifactError(f"artifact {path}: unknown kind {kind!r}")
    if expect_kind is not None and kind != expect_kind:
        raise ArtifactError(f"artifact {path}: expected kind {expect_kind!r}, found {kind!r}")
    if not isinstance(doc.get("input_sha256"), str):
        raise ArtifactError(f"artifact {path}: missing input_sha256")
    return doc


def check_same_input(*docs: dict) -> str:
    """All artifacts must descend from the same ingested input file."""
    hashes = {doc["input_sha256"] for doc in docs}
    if len(hashes) != 1:
        raise ArtifactError(
            "artifacts descend from different inputs: " + ", ".join(sorted(hashes))
        )
    return hashes.pop()


# ----------------------------------------------------------------- model


def model_doc(model: ApplicationModel, input_sha256: str) -> dict:
    return make_artifact("model", input_sha256, {"model": model_to_payload(model)})


def model_from_doc(doc: dict) -> ApplicationModel:
    try:
        return model_from_payload(doc["model"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"bad model artifact: {exc}") from exc


# --------------------------------------------------------------- weights


def weights_doc(
    result: CalibrationResult,
    input_sha256: str,
    n_runs: int,
    seed: int,
) -> dict:
    return make_artifact(
        "weights",
        input_sha256,
        {
            "weights": result.weights.as_dict(),
            "metric_order": list(METRIC_NAMES),
            "correlations": result.correlations,
            "samples": result.samples,
            "n_runs": n_runs,
            "n_failed": result.n_failed,
            "seed": seed,
        },
    )


def weights_from_doc(doc: dict) -> WeightVector:
    try:
        return WeightVector(**doc["weights"])
    except (KeyError, TypeError) as exc:
        raise ArtifactError(f"bad weights artifact: {exc}") from exc


# -------------------------------------------------------------- frontier


def _trial_entry(trial: Trial, selected_id: int | None) -> dict:
    entry = {
        "id": trial.id,
        "hyper_params": dict(trial.hyper_params),
        "seed": trial.seed,
        "ok": trial.ok,
        "selected": trial.id == selected_id,
        "error": trial.error,
        "metrics": trial.metrics.as_dict() if trial.metrics is not None else None,
        "partition": (
            {"assignment": dict(trial.partition.assignment), "k": trial.partition.k}
            if trial.partition is not None
            else None
        ),
    }
    return entry


def graph_doc(graph: CallGraph) -> dict:
    edges = sorted(
        [caller, callee, int(count)]
        for (caller, callee), count in graph.call_counts.items()
    )
    return {"nodes": list(graph.nodes), "edges": edges}


def frontier_doc(
    frontier: Frontier,
    graph: CallGraph,
    input_sha256: str,
    algorithm: str,
    budget: int,
    seed: int,
    correlations: Sequence | None = None,
) -> dict:
    return make_artifact(
        "frontier",
        input_sha256,
        {
            "weights": frontier.weights.as_dict(),
            "metric_order": list(METRIC_NAMES),
            "correlations": correlations,
            "selected_id": frontier.selected_id,
            "algorithm": algorithm,
            "budget": budget,
            "seed": seed,
            "trials": [_trial_entry(t, frontier.selected_id) for t in frontier.trials],
            "graph": graph_doc(graph),
        },
    )


def _trial_from_entry(entry: Mapping) -> Trial:
    metrics = entry.get("metrics")
    partition = entry.get("partition")
    return Trial(
        id=int(entry["id"]),
        hyper_params=dict(entry["hyper_params"]),
        seed=int(entry["seed"]),
        metrics=MetricVector(**metrics) if metrics is not None else None,
        partition=(
            Partition(assignment=dict(partition["assignment"]), k=int(partition["k"]))
            if partition is not None
            else None
        ),
        wall_time=0.0,
        error=entry.get("error"),
    )


def frontier_from_doc(doc: dict) -> Frontier:
    try:
        trials = tuple(_trial_from_entry(entry) for entry in doc["trials"])
        weights = WeightVector(**doc["weights"])
        selected_id = doc["selected_id"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"bad frontier artifact: {exc}") from exc
    if selected_id is not None:
        selected_id = int(selected_id)
        ids = [t.id for t in trials]
        if selected_id not in ids:
            raise ArtifactError(f"bad frontier artifact: selected_id {selected_id} not present")
    return Frontier(trials=trials, weights=weights, selected_id=selected_id)


# -------------------------------------------------------------- manifest


def space_doc(space: SearchSpace) -> list[dict]:
    return [
        {
            "name": d.name,
            "lo": d.lo,
            "hi": d.hi,
            "integer": d.integer,
            "exclusive_hi": d.exclusive_hi,
        }
        for d in space.dimensions
    ]


def manifest_doc(
    input_path: str,
    input_sha256: str,
    command: str,
    seed: int,
    space: SearchSpace | None,
    out_dir: str,
    budget: int | None = None,
    n_runs: int | None = None,
) -> dict:
    return make_artifact(
        "manifest",
        input_sha256,
        {
            "input_path": input_path,
            "command": command,
            "seed": seed,
            "space": space_doc(space) if space is not None else None,
            "budget": budget,
            "n_runs": n_runs,
            "out_dir": out_dir,
            "tool_version": __version__,
        },
    )
