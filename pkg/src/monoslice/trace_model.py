"""Runtime-trace ingestion and the pruned class-level call graph.

A trace file describes one monolithic application: its classes, the
entry points (business use cases / published APIs) that were exercised,
and the ordered class-to-class call events each entry point produced.
This module parses and validates those files and turns a validated
model into the undirected call graph the rest of the pipeline runs on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

TRACE_FORMAT_VERSION = 1


class TraceParseError(ValueError):
    """The trace file is not syntactically valid."""


class TraceValidationError(ValueError):
    """The trace file parsed but violates the model invariants."""


class EmptyGraphError(ValueError):
    """No class is reachable through any entry-point trace."""


@dataclass(frozen=True)
class EntryPointTrace:
    """One entry point and the ordered (caller, callee) events it produced."""

    name: str
    calls: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class ApplicationModel:
    """Validated view of one application's trace file.

    ``classes`` keeps declaration order first, then first-appearance
    order for classes that only show up inside calls or inheritance.
    ``inheritance`` stores unordered pairs canonically sorted so the
    model serializes deterministically.
    """

    classes: tuple[str, ...]
    entry_points: tuple[EntryPointTrace, ...]
    inheritance: tuple[tuple[str, str], ...]

    def inheritance_pairs(self) -> set[frozenset[str]]:
        return {frozenset(p) for p in self.inheritance}


@dataclass(frozen=True, eq=False)
class CallGraph:
    """Undirected binary adjacency over trace-reachable classes.

    ``call_counts`` keeps the directed multiplicities (caller, callee) ->
    count for the runtime-call-percentage and interface metrics; the
    adjacency collapses them to one symmetric edge per pair.
    """

    nodes: tuple[str, ...]
    adjacency: np.ndarray
    call_counts: dict[tuple[str, str], int]

    def __post_init__(self):
        self.adjacency.flags.writeable = False

    @property
    def n(self) -> int:
        return len(self.nodes)

    def index(self, name: str) -> int:
        return self.nodes.index(name)

    def undirected_edges(self) -> list[tuple[str, str]]:
        """All edges as (node_i, node_j) pairs with i < j in node order."""
        ii, jj = np.nonzero(np.triu(self.adjacency, k=1))
        return [(self.nodes[i], self.nodes[j]) for i, j in zip(ii, jj)]


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise TraceValidationError(message)


def _check_class_name(name: object, context: str) -> str:
    _require(isinstance(name, str) and name != "", f"{context}: class names must be non-empty strings")
    return name  # type: ignore[return-value]


def parse_trace_file(data: bytes) -> ApplicationModel:
    """Parse raw trace-file bytes into a validated ApplicationModel.

    The file is a UTF-8 JSON document with top-level keys ``format``
    (must equal 1), ``classes``, ``entrypoints`` and ``inheritance``.
    Unknown top-level keys (e.g. method-level statistics) are ignored.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise TraceParseError(f"trace file is not valid UTF-8: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TraceParseError(f"malformed trace file at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None

    if not isinstance(doc, dict):
        raise TraceValidationError("trace file must be a JSON object")
    version = doc.get("format")
    _require(version is not None, "missing required 'format' field")
    _require(version == TRACE_FORMAT_VERSION, f"unsupported trace format {version!r} (expected {TRACE_FORMAT_VERSION})")
    for key in ("classes", "entrypoints", "inheritance"):
        _require(key in doc, f"missing required '{key}' field")
        _require(isinstance(doc[key], list), f"'{key}' must be an array")

    classes: list[str] = []
    seen: set[str] = set()
    for name in doc["classes"]:
        _check_class_name(name, "classes")
        _require(name not in seen, f"duplicate class name {name!r}")
        classes.append(name)
        seen.add(name)

    def register(name: str) -> None:
        if name not in seen:
            classes.append(name)
            seen.add(name)

    entry_points: list[EntryPointTrace] = []
    ep_names: set[str] = set()
    for i, ep in enumerate(doc["entrypoints"]):
        _require(isinstance(ep, dict), f"entrypoints[{i}] must be an object")
        name = ep.get("name")
        _require(isinstance(name, str) and name != "", f"entrypoints[{i}]: missing or empty name")
        _require(name not in ep_names, f"duplicate entry-point name {name!r}")
        ep_names.add(name)
        raw_calls = ep.get("calls")
        _require(isinstance(raw_calls, list) and len(raw_calls) > 0, f"entry point {name!r} has an empty trace")
        calls: list[tuple[str, str]] = []
        for call in raw_calls:
            _require(
                isinstance(call, list) and len(call) == 2,
                f"entry point {name!r}: each call must be a [caller, callee] pair",
            )
            caller = _check_class_name(call[0], f"entry point {name!r}")
            callee = _check_class_name(call[1], f"entry point {name!r}")
            register(caller)
            register(callee)
            calls.append((caller, callee))
        entry_points.append(EntryPointTrace(name=name, calls=tuple(calls)))

    pairs: set[tuple[str, str]] = set()
    for i, pair in enumerate(doc["inheritance"]):
        _require(isinstance(pair, list) and len(pair) == 2, f"inheritance[{i}] must be a 2-element array")
        a = _check_class_name(pair[0], "inheritance")
        b = _check_class_name(pair[1], "inheritance")
        _require(a != b, f"inheritance pair ({a!r}, {a!r}) relates a class to itself")
        register(a)
        register(b)
        pairs.add((min(a, b), max(a, b)))

    return ApplicationModel(
        classes=tuple(classes),
        entry_points=tuple(entry_points),
        inheritance=tuple(sorted(pairs)),
    )


def model_to_payload(model: ApplicationModel) -> dict:
    """Serialize a model back to the trace-file document shape."""
    return {
        "format": TRACE_FORMAT_VERSION,
        "classes": list(model.classes),
        "entrypoints": [{"name": ep.name, "calls": [list(c) for c in ep.calls]} for ep in model.entry_points],
        "inheritance": [list(p) for p in model.inheritance],
    }


def model_from_payload(payload: dict) -> ApplicationModel:
    """Validate an in-memory trace document (same schema as the file)."""
    return parse_trace_file(json.dumps(payload).encode("utf-8"))


def reachable_classes(model: ApplicationModel) -> set[str]:
    """Classes that appear in at least one entry-point trace."""
    out: set[str] = set()
    for ep in model.entry_points:
        for caller, callee in ep.calls:
            out.add(caller)
            out.add(callee)
    return out


def build_call_graph(model: ApplicationModel) -> CallGraph:
    """Build the pruned, undirected call graph from a validated model.

    Classes absent from every entry-point trace are dropped.  Self-call
    events keep a class reachable but contribute no edge and no count.
    """
    reachable = reachable_classes(model)
    nodes = tuple(c for c in model.classes if c in reachable)
    if not nodes:
        raise EmptyGraphError("no class is reachable through any entry-point trace")

    index = {name: i for i, name in enumerate(nodes)}
    counts: dict[tuple[str, str], int] = {}
    adjacency = np.zeros((len(nodes), len(nodes)), dtype=np.int64)
    for ep in model.entry_points:
        for caller, callee in ep.calls:
            if caller == callee:
                continue
            counts[(caller, callee)] = counts.get((caller, callee), 0) + 1
            adjacency[index[caller], index[callee]] = 1
            adjacency[index[callee], index[caller]] = 1

    return CallGraph(nodes=nodes, adjacency=adjacency, call_counts=counts)


def pruned_classes(model: ApplicationModel, graph: CallGraph) -> tuple[str, ...]:
    """Classes retained in the model but absent from the graph."""
    kept = set(graph.nodes)
    return tuple(c for c in model.classes if c not in kept)
