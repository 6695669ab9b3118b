"""Synthetic trace generators for tests and demos.

two_community_app builds a monolith with two planted 5-class
communities plus a bench of standalone utility classes.  Each
community carries one hot caller/callee pair, a hub that the hot pair
and the leaf classes route through, and side-wide maintenance traces,
so its classes co-occur densely in traces while all call events stay
inside the community.  One extra entry point replays a B-side call
together with an A-side self-call, making the two communities co-occur
in a single trace without sharing any call edge.

The utility classes appear only through self-calls (an ops endpoint
per utility), so they are isolated call-graph nodes: grouping them
with either community, splitting them apart, or clustering them on
their own never crosses a call edge.  Every partition that keeps each
community intact therefore has zero cross-cluster traffic, at any
cluster count — the planted structure is recoverable across the whole
k range rather than at one magic k.
"""

from __future__ import annotations

import json
import sys

from .trace_model import ApplicationModel, model_from_payload

UTILITIES = (
    "LogShipper", "MetricsAgent", "HealthProbe", "ConfigWatcher",
    "CacheJanitor", "SessionReaper", "TokenRotator", "BackupRunner",
    "QueueDrainer", "SchemaPinger", "TraceSampler",
)


def _selfs(names):
    return [[c, c] for c in names]


def _side_entrypoints(prefix: str, cls: list[str], hot_calls: int) -> list[dict]:
    """Entry points for one community: hot pair, hub fan, side-wide sweeps."""
    hot_a, hot_b, hub = cls[0], cls[1], cls[2]
    leaves = cls[3:]
    fan = [[hot_a, hub], [hot_b, hub]] + [[hub, leaf] for leaf in leaves]
    return [
        {"name": f"{prefix}Pay", "calls": [[hot_a, hot_b]] * hot_calls + _selfs(cls[2:])},
        {"name": f"{prefix}Browse", "calls": fan},
        {"name": f"{prefix}Sync", "calls": _selfs(cls)},
    ]


def two_community_payload(
    n_per_side: int = 5,
    bridge: bool = True,
    hot_a: int = 40,
    hot_b: int = 28,
    n_utilities: int = len(UTILITIES),
) -> dict:
    """Raw trace-file document for the planted two-community monolith."""
    if n_per_side < 3:
        raise ValueError("need at least 3 classes per side")
    if n_utilities < 0:
        raise ValueError("n_utilities must be non-negative")
    a = [f"Alpha{i}" for i in range(n_per_side)]
    b = [f"Beta{i}" for i in range(n_per_side)]
    utils = [
        UTILITIES[i] if i < len(UTILITIES) else f"Utility{i}"
        for i in range(n_utilities)
    ]

    entrypoints = _side_entrypoints("alpha", a, hot_a)
    entrypoints += _side_entrypoints("beta", b, hot_b)
    if bridge:
        # the single cross-community trace: a B-side call replayed next
        # to an A-side self-call (no new call-graph edge, no cross event)
        entrypoints.append({"name": "betaBridge", "calls": [[b[0], b[1]], [a[2], a[2]]]})
    entrypoints += [{"name": f"ops{u}", "calls": _selfs([u])} for u in utils]
    return {
        "format": 1,
        "classes": a + b + utils,
        "entrypoints": entrypoints,
        "inheritance": [],
    }


def two_community_app(
    n_per_side: int = 5,
    bridge: bool = True,
    hot_a: int = 40,
    hot_b: int = 28,
    n_utilities: int = len(UTILITIES),
) -> ApplicationModel:
    return model_from_payload(
        two_community_payload(n_per_side, bridge, hot_a, hot_b, n_utilities)
    )


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    out = argv[0] if argv else "two_community.json"
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(two_community_payload(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
