"""monoslice: recommend microservice partitions for a monolith from runtime traces."""

__version__ = "0.1.0"

from .trace_model import (  # noqa: F401
    ApplicationModel,
    CallGraph,
    EmptyGraphError,
    EntryPointTrace,
    TraceParseError,
    TraceValidationError,
    build_call_graph,
    parse_trace_file,
)
