"""granex: explore the granularity of discovered object-centric process models.

Discovery produces an object-centric Petri net from an object-centric event
log; aggregations (complete lifecycle/subprocess/artifact and sequence, xor,
and, loop control-flow structures) coarsen it step by step. Every applied
aggregation is traced in the log as an abstraction object, so the abstracted
model is always the overlay of the original model with the augmented log, and
the whole analysis journey survives export and re-import.
"""

__version__ = "0.1.0"

from .abstraction import (
    AbstractionRecord,
    admissible,
    apply_abstraction,
    default_repository,
    is_sese,
    overlay,
)
from .discovery import ProcessTree, compile_tree, discover, extract_traces, mine_tree
from .nets import (
    AcceptingOCPN,
    Place,
    ReplayResult,
    Transition,
    check_soundness,
    project_type,
    replay,
    size,
    to_dot,
    to_graph_payload,
)
from .ocel import (
    Event,
    EventLog,
    generate_id,
    parse_log,
    project_workflow,
    serialize_log,
    st_abs,
    st_abs_inverse,
)
from .session import AbstractionTree, Session, build_tree, initialize

__all__ = [
    "AbstractionRecord",
    "AbstractionTree",
    "AcceptingOCPN",
    "Event",
    "EventLog",
    "Place",
    "ProcessTree",
    "ReplayResult",
    "Session",
    "Transition",
    "admissible",
    "apply_abstraction",
    "build_tree",
    "check_soundness",
    "compile_tree",
    "default_repository",
    "discover",
    "extract_traces",
    "generate_id",
    "initialize",
    "is_sese",
    "mine_tree",
    "overlay",
    "parse_log",
    "project_type",
    "project_workflow",
    "replay",
    "serialize_log",
    "size",
    "st_abs",
    "st_abs_inverse",
    "to_dot",
    "to_graph_payload",
]
