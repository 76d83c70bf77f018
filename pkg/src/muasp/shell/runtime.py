"""The shell lifecycle as pure transitions over immutable state.

``activate``, ``tick`` and ``stop`` each return a fresh :class:`ShellState`;
the caller drives the tick period.  :class:`Shell` wraps them for callers
that prefer a mutable object.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence, Union

from ..asp import AnswerSet, Atom, solve
from ..query import Query, QueryResult, run_query
from .descriptor import SENSOR, Retention, ServiceDescriptor, matches


class ShellError(RuntimeError):
    pass


class Phase(enum.Enum):
    NO_OPERATION = "no-operation"
    ACTIVE = "active"
    STOPPED = "stopped"


@dataclass(frozen=True)
class IoEntry:
    """One row of the input/output table.

    ``input`` is None for query entries.  ``expected_output`` is a tuple of
    output schemas for requests, the query for query entries, and None for
    sensor inputs and for retained inputs that were already answered.
    """

    input: Atom | None
    requester: str = SENSOR
    expected_output: tuple[Atom, ...] | Query | None = None
    retain: bool = False
    message_id: str = ""

    def __post_init__(self) -> None:
        if self.requester == SENSOR and self.expected_output is not None:
            raise ValueError("sensor inputs expect no answer")

    @property
    def pending(self) -> bool:
        return self.expected_output is not None


class Arrival(NamedTuple):
    item: Union[Atom, Query]
    requester: str = SENSOR
    message_id: str = ""


@dataclass(frozen=True)
class ShellState:
    phase: Phase = Phase.NO_OPERATION
    current_facts: frozenset = frozenset()
    io_table: tuple[IoEntry, ...] = ()
    tick_count: int = 0
    frequency: int = 1


def initial_state(d: ServiceDescriptor) -> ShellState:
    return ShellState(frequency=d.frequency)


# -- answer-set selection --------------------------------------------------

SelectionPolicy = Callable[[Sequence[AnswerSet]], AnswerSet]


def first(sets: Sequence[AnswerSet]) -> AnswerSet:
    return sets[0]


@dataclass(frozen=True)
class Maximize:
    """Pick the answer set of largest total weight; ties go to the earliest."""

    weights: Mapping[Atom, int]

    def score(self, s: AnswerSet) -> int:
        return sum(w for a, w in self.weights.items() if a in s)

    def __call__(self, sets: Sequence[AnswerSet]) -> AnswerSet:
        return max(sets, key=self.score)

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.weights.items())))


FIRST: SelectionPolicy = first


def select_answer_set(sets: Sequence[AnswerSet], policy: SelectionPolicy = first) -> AnswerSet:
    if not sets:
        raise ValueError("cannot select from an empty list of answer sets")
    chosen = policy(sets)
    if chosen not in sets:
        raise ShellError("selection policy returned a set outside the candidates")
    return chosen


# -- evaluation ---------------------------------------------------------------


@dataclass(frozen=True)
class Evaluation:
    answer_sets: tuple[AnswerSet, ...]
    selected: AnswerSet | None
    query_results: tuple[QueryResult, ...]

    @property
    def consistent(self) -> bool:
        return bool(self.answer_sets)


def evaluate(d: ServiceDescriptor, facts: Iterable[Atom], policy: SelectionPolicy = first) -> Evaluation:
    """Solve the inner program plus ``facts`` and read off selection and queries."""
    sets = tuple(solve(d.program.with_facts(sorted(set(facts)))))
    if not sets:
        return Evaluation((), None, ())
    return Evaluation(sets, select_answer_set(sets, policy), tuple(run_query(q, sets) for q in d.queries))


def output_atoms(d: ServiceDescriptor, s: AnswerSet) -> list[Atom]:
    return [a for a in s.sorted() if d.is_output(a)]


# -- lifecycle ----------------------------------------------------------------


def activate(state: ShellState, d: ServiceDescriptor) -> ShellState:
    if state.phase is Phase.STOPPED:
        raise ShellError("a stopped shell cannot be activated again")
    if state.phase is Phase.ACTIVE:
        return state
    facts = state.current_facts | ({d.activation} if d.activation is not None else set())
    return replace(state, phase=Phase.ACTIVE, current_facts=frozenset(facts))


def stop(state: ShellState, d: ServiceDescriptor) -> ShellState:
    """Enter the terminal phase; the stop atom (if declared) joins the facts."""
    if state.phase is not Phase.ACTIVE:
        raise ShellError(f"stop requires an active shell, phase is {state.phase.value}")
    facts = state.current_facts | ({d.stop} if d.stop is not None else set())
    return replace(state, phase=Phase.STOPPED, current_facts=frozenset(facts))


def retention_filter(entries: Sequence[IoEntry], mode: Retention) -> list[IoEntry]:
    """Entries whose inputs are retracted at the end of a tick."""
    return [e for e in entries if e.input is None or not mode.keeps(e.input)]


@dataclass(frozen=True)
class TickResult:
    state: ShellState
    evaluation: Evaluation
    outputs: tuple[tuple[IoEntry, Atom], ...] = ()
    answers: tuple[tuple[IoEntry, QueryResult], ...] = ()
    failures: tuple[IoEntry, ...] = ()

    @property
    def query_results(self) -> tuple[QueryResult, ...]:
        return self.evaluation.query_results

    @property
    def consistent(self) -> bool:
        return self.evaluation.consistent


def _entry(d: ServiceDescriptor, arrival: Arrival) -> IoEntry:
    item, requester, mid = arrival
    if isinstance(item, Query):
        if item not in d.queries:
            raise ShellError(f"query {item} is not declared by the service")
        if requester == SENSOR:
            raise ShellError("queries need a requester")
        return IoEntry(None, requester, item, False, mid)
    if not item.is_ground() or not d.is_input(item):
        raise ShellError(f"{item} does not match any input schema")
    expected = None if requester == SENSOR else d.outputs
    return IoEntry(item, requester, expected, d.retention.keeps(item), mid)


def tick(
    state: ShellState,
    d: ServiceDescriptor,
    arrivals: Sequence[Arrival] = (),
    policy: SelectionPolicy = first,
) -> TickResult:
    """Run one pass of the loop: ingest, solve, select, answer, retract."""
    if state.phase is not Phase.ACTIVE:
        raise ShellError(f"tick requires an active shell, phase is {state.phase.value}")
    new = [_entry(d, Arrival(*a)) for a in arrivals]
    table = state.io_table + tuple(new)
    facts = state.current_facts | {e.input for e in new if e.input is not None}

    ev = evaluate(d, facts, policy)
    pending = [e for e in table if e.pending]
    outputs: list[tuple[IoEntry, Atom]] = []
    answers: list[tuple[IoEntry, QueryResult]] = []
    failures: list[IoEntry] = []
    if ev.consistent:
        results = dict(zip(d.queries, ev.query_results))
        produced = output_atoms(d, ev.selected)
        for e in pending:
            if isinstance(e.expected_output, Query):
                answers.append((e, results[e.expected_output]))
            else:
                outputs += [(e, a) for a in produced if any(matches(s, a) for s in e.expected_output)]
    else:
        failures = pending

    removed = retention_filter(table, d.retention)
    gone = set(map(id, removed))
    kept = tuple(replace(e, expected_output=None) if e.pending else e for e in table if id(e) not in gone)
    still_held = {e.input for e in kept}
    drop = {e.input for e in removed if e.input is not None} - still_held - _signals(d)
    new_state = replace(
        state,
        current_facts=frozenset(facts - drop),
        io_table=kept,
        tick_count=state.tick_count + 1,
    )
    return TickResult(new_state, ev, tuple(outputs), tuple(answers), tuple(failures))


def _signals(d: ServiceDescriptor) -> set[Atom]:
    return {a for a in (d.activation, d.stop) if a is not None}


class Shell:
    """Mutable convenience wrapper around the pure lifecycle functions."""

    def __init__(self, descriptor: ServiceDescriptor, policy: SelectionPolicy = first):
        self.descriptor = descriptor
        self.policy = policy
        self.state = initial_state(descriptor)

    @property
    def phase(self) -> Phase:
        return self.state.phase

    def activate(self) -> None:
        self.state = activate(self.state, self.descriptor)

    def stop(self) -> None:
        self.state = stop(self.state, self.descriptor)

    def tick(self, arrivals: Sequence[Arrival] = ()) -> TickResult:
        result = tick(self.state, self.descriptor, arrivals, self.policy)
        self.state = result.state
        return result
