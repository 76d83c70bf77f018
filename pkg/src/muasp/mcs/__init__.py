"""Multi-context semantics for systems of services: bridge rules, equilibria, timed runs."""

from .bridge import (
    BridgeRule,
    BridgeSyntaxError,
    Designator,
    McsError,
    applicable,
    head_instances,
    parse_bridge_rule,
    parse_bridge_rules,
    resolve_designators,
)
from .context import (
    MNG_OPS,
    MONOTONE_OPS,
    Consequences,
    Context,
    FactContext,
    ServiceContext,
    Update,
    add_facts,
    query_atom,
    remove_facts,
    replace_facts,
)
from .distributed import DistributedRun, TranscriptLine, run_distributed
from .loader import SystemFile, load_system, system_from_dict
from .system import (
    DataState,
    NonConvergenceError,
    System,
    TimedRun,
    app,
    compute_equilibrium,
    step,
    timed_run,
    timed_run_detailed,
)

__all__ = [
    "MNG_OPS",
    "MONOTONE_OPS",
    "BridgeRule",
    "BridgeSyntaxError",
    "Consequences",
    "Context",
    "DataState",
    "Designator",
    "DistributedRun",
    "FactContext",
    "McsError",
    "NonConvergenceError",
    "ServiceContext",
    "System",
    "SystemFile",
    "TimedRun",
    "TranscriptLine",
    "Update",
    "add_facts",
    "app",
    "applicable",
    "compute_equilibrium",
    "head_instances",
    "load_system",
    "parse_bridge_rule",
    "parse_bridge_rules",
    "query_atom",
    "remove_facts",
    "replace_facts",
    "resolve_designators",
    "run_distributed",
    "step",
    "system_from_dict",
    "timed_run",
    "timed_run_detailed",
]
