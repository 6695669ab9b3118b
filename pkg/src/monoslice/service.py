"""Read-only HTTP result service over a frontier artifact.

The artifact is loaded once, before the socket binds, and never
mutated; every handler thread reads the same immutable snapshot, so
concurrent identical requests produce identical responses.  Bodies are
JSON fragments of the frontier artifact schema — the UI and the
artifact share one data model.

Endpoints:
  GET  /frontier              all trials with hyper-params, metrics, selected flag
  GET  /trial/{id}/partition  class->cluster map of one successful trial
  GET  /weights               selection weights + calibration correlation matrix
  GET  /graph                 call-graph nodes and weighted edges
  POST /reselect              weight overrides -> selected id + per-trial losses

Weight overrides are merged over the artifact's stored weights; an
empty override therefore reproduces the stored selection.  All
responses carry permissive CORS headers so a browser UI served from
another origin can read them.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .artifacts import frontier_from_doc, read_artifact
from .hpo import Frontier, WeightVector, reselect

log = logging.getLogger(__name__)

WEIGHT_FIELDS = ("w_sm", "w_icp", "w_ned", "w_bcs")


@dataclass(frozen=True)
class ServiceState:
    """Immutable snapshot of the served artifact."""

    doc: dict
    frontier: Frontier


def load_state(path: str) -> ServiceState:
    """Parse and validate the artifact; raises ArtifactError when unusable."""
    doc = read_artifact(path, "frontier")
    return ServiceState(doc=doc, frontier=frontier_from_doc(doc))


def merge_weights(stored: WeightVector, overrides: dict) -> WeightVector:
    """Overlay finite per-field overrides onto the stored weights.

    Raises ValueError on unknown fields or non-finite/non-numeric values.
    """
    if not isinstance(overrides, dict):
        raise ValueError("weight overrides must be a JSON object")
    merged = stored.as_dict()
    for key, value in overrides.items():
        if key not in WEIGHT_FIELDS:
            raise ValueError(f"unknown weight field {key!r}")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"weight {key} must be a number")
        if not math.isfinite(value):
            raise ValueError(f"weight {key} must be finite")
        merged[key] = float(value)
    return WeightVector(**merged)


class FrontierHandler(BaseHTTPRequestHandler):
    state: ServiceState  # set on the subclass by make_server

    protocol_version = "HTTP/1.1"

    # ------------------------------------------------------------ plumbing

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        log.debug("%s - %s", self.address_string(), format % args)

    def _send(self, status: int, payload) -> None:
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self._cors()
        self.end_headers()
        self.wfile.write(body)

    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def _error(self, status: int, message: str) -> None:
        self._send(status, {"error": message})

    # ------------------------------------------------------------- routes

    def do_OPTIONS(self):  # noqa: N802 - stdlib naming
        self.send_response(204)
        self.send_header("Content-Length", "0")
        self._cors()
        self.end_headers()

    def do_GET(self):  # noqa: N802 - stdlib naming
        doc = self.state.doc
        path = self.path.split("?", 1)[0].rstrip("/") or "/"
        if path == "/frontier":
            self._send(
                200,
                {
                    "trials": doc["trials"],
                    "weights": doc["weights"],
                    "selected_id": doc["selected_id"],
                    "metric_order": doc["metric_order"],
                },
            )
        elif path == "/weights":
            self._send(
                200,
                {
                    "weights": doc["weights"],
                    "correlations": doc.get("correlations"),
                    "metric_order": doc["metric_order"],
                },
            )
        elif path == "/graph":
            self._send(200, doc["graph"])
        elif path.startswith("/trial/") and path.endswith("/partition"):
            self._get_partition(path)
        else:
            self._error(404, f"no such resource {path!r}")

    def _get_partition(self, path: str) -> None:
        raw_id = path[len("/trial/") : -len("/partition")]
        try:
            trial_id = int(raw_id)
        except ValueError:
            self._error(404, f"bad trial id {raw_id!r}")
            return
        entry = next((t for t in self.state.doc["trials"] if t["id"] == trial_id), None)
        if entry is None:
            self._error(404, f"no trial {trial_id}")
        elif entry["partition"] is None:
            self._error(404, f"trial {trial_id} failed; no partition")
        else:
            self._send(200, entry["partition"])

    def do_POST(self):  # noqa: N802 - stdlib naming
        path = self.path.split("?", 1)[0].rstrip("/")
        if path != "/reselect":
            self._error(404, f"no such resource {path!r}")
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            overrides = json.loads(self.rfile.read(length) or b"{}")
            weights = merge_weights(self.state.frontier.weights, overrides)
        except (ValueError, json.JSONDecodeError) as exc:
            self._error(400, str(exc))
            return
        frontier = reselect(self.state.frontier.trials, weights)
        self._send(
            200,
            {
                "selected_id": frontier.selected_id,
                "weights": weights.as_dict(),
                "losses": [[trial_id, loss] for trial_id, loss in frontier.losses()],
            },
        )


def make_server(path: str, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Load the artifact (failing before any socket exists), then bind."""
    state = load_state(path)
    handler = type("BoundFrontierHandler", (FrontierHandler,), {"state": state})
    return ThreadingHTTPServer((host, port), handler)


def serve(path: str, host: str = "127.0.0.1", port: int = 8177) -> int:
    server = make_server(path, host, port)
    bound_host, bound_port = server.server_address[:2]
    # flush so wrappers reading a pipe see the bound port immediately
    print(f"serving {path} on http://{bound_host}:{bound_port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0
