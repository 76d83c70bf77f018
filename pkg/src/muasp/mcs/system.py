"""Data states, bridge-rule application, equilibria and timed runs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from ..asp import Atom
from ..messaging import Registry, RegistryEntry
from .bridge import BridgeRule, McsError, head_instances, resolve_designators
from .context import KB, Context, Update

Heads = dict[str, list[tuple[str, Atom]]]
Schedule = Mapping[int, Sequence[tuple[str, Update]]]
SystemTrigger = Callable[[int, BridgeRule, KB], bool]


@dataclass(frozen=True)
class DataState:
    """One consequence set per context, in declaration order, plus failures."""

    items: tuple[tuple[str, frozenset], ...]
    failures: frozenset = frozenset()

    @classmethod
    def of(cls, sets: Mapping[str, Iterable[Atom]], failures: Iterable[str] = ()) -> DataState:
        return cls(tuple((n, frozenset(s)) for n, s in sets.items()), frozenset(failures))

    def __getitem__(self, name: str) -> frozenset:
        for n, s in self.items:
            if n == name:
                return s
        raise KeyError(name)

    def __contains__(self, name: object) -> bool:
        return any(n == name for n, _ in self.items)

    def __iter__(self) -> Iterator[str]:
        return (n for n, _ in self.items)

    def as_dict(self) -> dict[str, frozenset]:
        return dict(self.items)

    def to_json(self) -> dict:
        return {
            "sets": {n: [str(a) for a in sorted(s)] for n, s in self.items},
            "failures": sorted(self.failures),
        }

    def __str__(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


class NonConvergenceError(McsError):
    def __init__(self, message: str, previous: DataState, last: DataState, time: int | None = None):
        super().__init__(message if time is None else f"{message} at time {time}")
        self.previous = previous
        self.last = last
        self.time = time


class System:
    """Contexts plus bridge rules; holds the current knowledge bases.

    Rules may use designators; they are resolved against ``registry``, which
    defaults to one built from the contexts' roles.
    """

    def __init__(self, contexts: Sequence[Context], bridge_rules: Sequence[BridgeRule] = (), registry: Registry | None = None):
        self.contexts: dict[str, Context] = {}
        for c in contexts:
            if c.name in self.contexts:
                raise McsError(f"duplicate context name {c.name}")
            self.contexts[c.name] = c
        if registry is None:
            registry = Registry()
            for c in contexts:
                registry.register(RegistryEntry(c.name, c.roles, f"ctx:{c.name}"))
        self.registry = registry
        self.bridge_rules = list(bridge_rules)
        self.kbs: dict[str, KB] = {n: c.initial_kb() for n, c in self.contexts.items()}
        self.iterations = 0
        self._check_rules()

    def _check_rules(self) -> None:
        for r in self.concrete_rules():
            if r.dest not in self.contexts:
                raise McsError(f"rule {r} targets unknown context {r.dest}")
            if r.op not in self.contexts[r.dest].ops:
                raise McsError(f"context {r.dest} has no management behaviour for {r.op!r}")
            for c in r.sources():
                if c not in self.contexts:
                    raise McsError(f"rule {r} reads unknown context {c}")

    def concrete_rules(self) -> list[BridgeRule]:
        return [cr for r in self.bridge_rules for cr in resolve_designators(r, self.registry)]

    def isolated_state(self) -> DataState:
        """Each context's consequences of its own knowledge base, no bridge rules."""
        sets, failures = {}, []
        for n, c in self.contexts.items():
            cons = c.acc(self.kbs[n])
            sets[n] = cons.atoms
            if cons.failed:
                failures.append(n)
        return DataState.of(sets, failures)

    initial_state = isolated_state

    def apply_updates(self, updates: Iterable[tuple[str, Update]]) -> None:
        for name, u in updates:
            if name not in self.contexts:
                raise McsError(f"update for unknown context {name}")
            self.kbs[name] = self.contexts[name].update(self.kbs[name], u)

    def triggered_rules(self, time: int | None, trigger: SystemTrigger | None = None) -> list[BridgeRule]:
        rules = self.concrete_rules()
        if time is None:
            return rules
        return [
            r
            for r in rules
            if self.contexts[r.dest].triggered(time, r, self.kbs[r.dest])
            and (trigger is None or trigger(time, r, self.kbs[r.dest]))
        ]

    def snapshot(self) -> dict[str, KB]:
        return dict(self.kbs)


def app(s: DataState, rules: Sequence[BridgeRule]) -> Heads:
    """Heads of applicable rules, grouped by destination, in declaration order."""
    sets = s.as_dict()
    out: Heads = {n: [] for n in sets}
    for r in rules:
        if not r.is_concrete:
            raise McsError(f"resolve designators before applying {r}")
        for h in head_instances(r, sets):
            out.setdefault(r.dest, []).append((r.op, h))
    return out


def step(M: System, s: DataState, time: int | None = None, trigger: SystemTrigger | None = None) -> DataState:
    """``S_i = acc_i(mng_i(app(S), kb_i))`` for every context; kbs keep the mng result."""
    for name in M.contexts:
        if name not in s:
            raise McsError(f"data state lacks context {name}")
    heads = app(s, M.triggered_rules(time, trigger))
    sets, failures = {}, []
    for name, c in M.contexts.items():
        kb = c.mng(heads.get(name, []), M.kbs[name])
        M.kbs[name] = kb
        cons = c.acc(kb)
        sets[name] = cons.atoms
        if cons.failed:
            failures.append(name)
    return DataState.of(sets, failures)


def compute_equilibrium(
    M: System,
    initial: DataState | None = None,
    max_iter: int = 1000,
    time: int | None = None,
    trigger: SystemTrigger | None = None,
) -> DataState:
    """Iterate :func:`step` to a fixpoint.

    ``M.iterations`` records how many steps were applied, counting the one
    that confirmed the fixpoint.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    s = M.isolated_state() if initial is None else initial
    prev = s
    for n in range(1, max_iter + 1):
        nxt = step(M, s, time, trigger)
        if nxt == s:
            M.iterations = n
            return s
        prev, s = s, nxt
    M.iterations = max_iter
    raise NonConvergenceError(f"no equilibrium within {max_iter} steps", prev, s, time)


@dataclass
class TimedRun:
    trace: list[tuple[int, DataState]] = field(default_factory=list)
    iterations: list[int] = field(default_factory=list)

    def at(self, t: int) -> DataState:
        return dict(self.trace)[t]


def timed_run(
    M: System,
    schedule: Schedule,
    horizon: int,
    max_iter: int = 1000,
    trigger: SystemTrigger | None = None,
) -> list[tuple[int, DataState]]:
    return timed_run_detailed(M, schedule, horizon, max_iter, trigger).trace


def timed_run_detailed(
    M: System,
    schedule: Schedule,
    horizon: int,
    max_iter: int = 1000,
    trigger: SystemTrigger | None = None,
) -> TimedRun:
    """At each time: apply updates, then run triggered rules to an equilibrium."""
    run = TimedRun()
    s: DataState | None = None
    for t in range(horizon + 1):
        M.apply_updates(schedule.get(t, ()))
        start = M.isolated_state() if s is None else s
        s = compute_equilibrium(M, start, max_iter, time=t, trigger=trigger)
        run.trace.append((t, s))
        run.iterations.append(M.iterations)
    return run
