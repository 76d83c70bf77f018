"""Contexts: a knowledge base, a consequence function and a management function.

Every context here keeps its knowledge base as a frozenset of ground atoms.
For a fact store that set is also its consequence set; for a service
context it is the set of facts injected into the inner program.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

from ..asp import Atom
from ..query import QueryResult
from ..shell import ServiceDescriptor, evaluate, first
from ..shell.runtime import SelectionPolicy
from .bridge import BridgeRule, McsError

KB = frozenset
OpFn = Callable[[KB, Sequence[Atom]], KB]
TriggerFn = Callable[[int, BridgeRule, KB], bool]


def add_facts(kb: KB, atoms: Sequence[Atom]) -> KB:
    return kb | frozenset(atoms)


def replace_facts(kb: KB, atoms: Sequence[Atom]) -> KB:
    """Overwrite every fact sharing a predicate signature with ``atoms``."""
    sigs = {a.signature for a in atoms}
    return frozenset(a for a in kb if a.signature not in sigs) | frozenset(atoms)


def remove_facts(kb: KB, atoms: Sequence[Atom]) -> KB:
    return kb - frozenset(atoms)


MNG_OPS: Mapping[str, OpFn] = {"add": add_facts, "replace": replace_facts}
MONOTONE_OPS = frozenset({"add"})
UPDATE_OPS: Mapping[str, OpFn] = {**MNG_OPS, "remove": remove_facts}


@dataclass(frozen=True)
class Update:
    op: str
    atoms: tuple[Atom, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.atoms, tuple):
            object.__setattr__(self, "atoms", tuple(self.atoms))
        if any(not a.is_ground() for a in self.atoms):
            raise McsError(f"updates carry ground atoms only: {self}")

    def __str__(self) -> str:
        return f"{self.op}({', '.join(map(str, self.atoms))})"


def apply_ops(kb: KB, heads: Iterable[tuple[str, Atom]], ops: Mapping[str, OpFn]) -> KB:
    """Apply heads grouped by operator, operators in order of first use."""
    grouped: dict[str, list[Atom]] = {}
    for op, a in heads:
        grouped.setdefault(op, []).append(a)
    for op, atoms in grouped.items():
        if op not in ops:
            raise McsError(f"no management behaviour registered for {op!r}")
        kb = ops[op](kb, atoms)
    return kb


@dataclass(frozen=True)
class Consequences:
    atoms: frozenset
    failed: bool = False


@dataclass(eq=False)
class Context:
    name: str
    roles: frozenset = field(default_factory=frozenset)
    ops: Mapping[str, OpFn] = field(default_factory=lambda: dict(MNG_OPS))
    trigger_fn: TriggerFn | None = None
    update_op: Callable[[KB, Update], KB] | None = None

    def __post_init__(self) -> None:
        self.roles = frozenset(self.roles)
        if not self.name or not self.name[0].islower():
            raise McsError(f"context names must start with a lowercase letter: {self.name!r}")

    def initial_kb(self) -> KB:
        raise NotImplementedError

    def acc(self, kb: KB) -> Consequences:
        raise NotImplementedError

    def mng(self, heads: Sequence[tuple[str, Atom]], kb: KB) -> KB:
        return apply_ops(kb, heads, self.ops)

    def update(self, kb: KB, u: Update) -> KB:
        if self.update_op is not None:
            return self.update_op(kb, u)
        return apply_ops(kb, [(u.op, a) for a in u.atoms], UPDATE_OPS)

    def triggered(self, time: int, r: BridgeRule, kb: KB) -> bool:
        return self.trigger_fn is None or self.trigger_fn(time, r, kb)


@dataclass(eq=False)
class FactContext(Context):
    """A scripted fact store: its consequences are its facts."""

    facts: frozenset = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        super().__post_init__()
        self.facts = frozenset(self.facts)

    def initial_kb(self) -> KB:
        return self.facts

    def acc(self, kb: KB) -> Consequences:
        return Consequences(frozenset(kb))


def query_atom(r: QueryResult) -> Atom:
    """Encode a true query result as an atom, e.g. ``known_go(c1,t1,ns,3)``."""
    return Atom(f"{r.mode.name.lower()}_{r.atom.predicate}", r.atom.args)


@dataclass(eq=False)
class ServiceContext(Context):
    """A service whose consequences are its selected answer set plus true query results.

    The knowledge base is the set of injected facts; it starts with ``facts``
    and, when ``activated``, the activation atom.  An inconsistent program
    yields no consequences and sets the failure flag.
    """

    descriptor: ServiceDescriptor | None = None
    facts: frozenset = field(default_factory=frozenset)
    activated: bool = True
    policy: SelectionPolicy = first

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.descriptor is None:
            raise McsError(f"service context {self.name} needs a descriptor")
        self.facts = frozenset(self.facts)
        self._acc = lru_cache(maxsize=256)(self._compute)

    def initial_kb(self) -> KB:
        d = self.descriptor
        signal = {d.activation} if self.activated and d.activation is not None else set()
        return self.facts | signal

    def _compute(self, kb: KB) -> Consequences:
        ev = evaluate(self.descriptor, kb, self.policy)
        if not ev.consistent:
            return Consequences(frozenset(), True)
        extra = {query_atom(r) for r in ev.query_results if r.value}
        return Consequences(frozenset(ev.selected.atoms) | extra)

    def acc(self, kb: KB) -> Consequences:
        return self._acc(frozenset(kb))
