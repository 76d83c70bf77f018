"""Service descriptors and the activate / tick / stop lifecycle around an inner program."""

from .descriptor import (
    SENSOR,
    STATELESS,
    DescriptorError,
    Retention,
    ServiceDescriptor,
    Violation,
    compute_heads,
    compute_undef,
    descriptor_from_dict,
    load_descriptor,
    matches,
    stateful,
    validate_descriptor,
)
from .runtime import (
    FIRST,
    Arrival,
    Evaluation,
    IoEntry,
    Maximize,
    Phase,
    SelectionPolicy,
    Shell,
    ShellError,
    ShellState,
    TickResult,
    activate,
    evaluate,
    first,
    initial_state,
    output_atoms,
    retention_filter,
    select_answer_set,
    stop,
    tick,
)
from .service import MicroService, PollReport

__all__ = [
    "FIRST",
    "SENSOR",
    "STATELESS",
    "Arrival",
    "DescriptorError",
    "Evaluation",
    "IoEntry",
    "Maximize",
    "MicroService",
    "Phase",
    "PollReport",
    "Retention",
    "SelectionPolicy",
    "ServiceDescriptor",
    "Shell",
    "ShellError",
    "ShellState",
    "TickResult",
    "Violation",
    "activate",
    "compute_heads",
    "compute_undef",
    "descriptor_from_dict",
    "evaluate",
    "first",
    "initial_state",
    "load_descriptor",
    "matches",
    "output_atoms",
    "retention_filter",
    "select_answer_set",
    "stateful",
    "stop",
    "tick",
    "validate_descriptor",
]
