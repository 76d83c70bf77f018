"""Answer-set computation for ground normal programs.

The search branches over ground atoms in lexicographic order, trying
"false" before "true", and narrows every partial assignment with two
fixpoints: atoms that must be true (derivable using only rules whose
negative body is already false) and atoms that may be true (derivable using
rules not blocked by a true atom).  Answer sets therefore come out ordered
by their characteristic vectors over the sorted atoms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .grounding import ground
from .syntax import Atom, Program, Rule

_HIDDEN_PREFIX = "_constraint"


@dataclass(frozen=True)
class AnswerSet:
    atoms: frozenset

    def __post_init__(self) -> None:
        if not isinstance(self.atoms, frozenset):
            object.__setattr__(self, "atoms", frozenset(self.atoms))

    def __contains__(self, a: object) -> bool:
        return a in self.atoms

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self.atoms)

    def sorted(self) -> list[Atom]:
        return sorted(self.atoms, key=Atom.sort_key)

    def __str__(self) -> str:
        return "{" + ", ".join(map(str, self.sorted())) + "}"


def constraint_atom(k: int) -> Atom:
    return Atom(f"{_HIDDEN_PREFIX}{k}")


def is_hidden(a: Atom) -> bool:
    return a.predicate.startswith(_HIDDEN_PREFIX)


def rewrite_constraints(gp: Program) -> Program:
    """``:- B.`` becomes ``f_k :- not f_k, B.`` with a fresh hidden ``f_k``."""
    out = []
    k = 0
    for r in gp.rules:
        if r.head is None:
            f = constraint_atom(k)
            k += 1
            out.append(Rule(f, r.pos_body, (f,) + r.neg_body))
        else:
            out.append(r)
    return Program(tuple(out))


def reduct(gp: Program, i: Iterable[Atom]) -> Program:
    """Gelfond-Lifschitz reduct of ground ``gp`` relative to ``i``."""
    i = set(i)
    out = []
    for r in rewrite_constraints(gp).rules:
        if any(a in i for a in r.neg_body):
            continue
        out.append(Rule(r.head, r.pos_body))
    return Program(tuple(out))


def least_model(dp: Program) -> set[Atom]:
    """Least model of a definite ground program; constraints are ignored."""
    watch: dict[Atom, list[int]] = {}
    missing = []
    heads = []
    derived: set[Atom] = set()
    queue = []
    for idx, r in enumerate(dp.rules):
        if r.neg_body:
            raise ValueError(f"rule is not definite: {r}")
        heads.append(r.head)
        body = set(r.pos_body)
        missing.append(len(body))
        for a in body:
            watch.setdefault(a, []).append(idx)
        if not body and r.head is not None and r.head not in derived:
            derived.add(r.head)
            queue.append(r.head)
    while queue:
        a = queue.pop()
        for idx in watch.get(a, ()):
            missing[idx] -= 1
            h = heads[idx]
            if missing[idx] == 0 and h is not None and h not in derived:
                derived.add(h)
                queue.append(h)
    return derived


def violated_constraints(gp: Program, i: set[Atom]) -> list[Rule]:
    return [
        r
        for r in gp.rules
        if r.head is None
        and all(a in i for a in r.pos_body)
        and not any(a in i for a in r.neg_body)
    ]


def is_answer_set(gp: Program, i: Iterable[Atom]) -> bool:
    i = set(i)
    return least_model(reduct(gp, i)) == i and not violated_constraints(gp, i)


class _Compiled:
    """Integer-indexed form of a ground program used by the search."""

    def __init__(self, gp: Program):
        atoms = set()
        for r in gp.rules:
            atoms.update(r.atoms())
        self.atoms = sorted(atoms, key=Atom.sort_key)
        index = {a: n for n, a in enumerate(self.atoms)}
        self.heads: list[int] = []
        self.pos: list[tuple[int, ...]] = []
        self.neg: list[tuple[int, ...]] = []
        self.constraints: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
        for r in gp.rules:
            pos = tuple(sorted({index[a] for a in r.pos_body}))
            neg = tuple(sorted({index[a] for a in r.neg_body}))
            if r.head is None:
                self.constraints.append((pos, neg))
            else:
                self.heads.append(index[r.head])
                self.pos.append(pos)
                self.neg.append(neg)
        self.watch: list[list[int]] = [[] for _ in self.atoms]
        for ridx, pos in enumerate(self.pos):
            for a in pos:
                self.watch[a].append(ridx)

    def closure(self, enabled: list[bool], seed: Iterable[int]) -> list[bool]:
        n = len(self.atoms)
        inside = [False] * n
        queue = []
        for a in seed:
            if not inside[a]:
                inside[a] = True
                queue.append(a)
        missing = [len(p) for p in self.pos]
        for ridx, ok in enumerate(enabled):
            if ok and missing[ridx] == 0:
                h = self.heads[ridx]
                if not inside[h]:
                    inside[h] = True
                    queue.append(h)
        while queue:
            a = queue.pop()
            for ridx in self.watch[a]:
                missing[ridx] -= 1
                if missing[ridx] == 0 and enabled[ridx]:
                    h = self.heads[ridx]
                    if not inside[h]:
                        inside[h] = True
                        queue.append(h)
        return inside

    def propagate(self, val: list) -> bool:
        """Narrow ``val`` in place; False on conflict."""
        while True:
            lower = self.closure(
                [all(val[a] is False for a in neg) for neg in self.neg],
                [a for a, v in enumerate(val) if v is True],
            )
            if any(lower[a] and v is False for a, v in enumerate(val)):
                return False
            upper = self.closure([not any(lower[a] for a in neg) for neg in self.neg], ())
            if any(v is True and not upper[a] for a, v in enumerate(val)):
                return False
            for pos, neg in self.constraints:
                if all(lower[a] for a in pos) and not any(upper[a] for a in neg):
                    return False
            changed = False
            for a, v in enumerate(val):
                if v is None:
                    if lower[a]:
                        val[a] = True
                        changed = True
                    elif not upper[a]:
                        val[a] = False
                        changed = True
            if not changed:
                return True

    def search(self) -> Iterator[frozenset[int]]:
        stack = [[None] * len(self.atoms)]
        while stack:
            val = stack.pop()
            if not self.propagate(val):
                continue
            try:
                nxt = val.index(None)
            except ValueError:
                yield frozenset(a for a, v in enumerate(val) if v)
                continue
            # LIFO: push "true" first so "false" is explored first
            for choice in (True, False):
                branch = list(val)
                branch[nxt] = choice
                stack.append(branch)


def solve_ground(gp: Program, limit: int | None = None) -> list[AnswerSet]:
    compiled = _Compiled(gp)
    out = []
    for model in compiled.search():
        atoms = {compiled.atoms[a] for a in model}
        # the search is exact; this re-check guards the invariant cheaply
        if not is_answer_set(gp, atoms):
            raise AssertionError(f"search produced a non-stable model {sorted(map(str, atoms))}")
        out.append(AnswerSet(frozenset(a for a in atoms if not is_hidden(a))))
        if limit is not None and len(out) >= limit:
            break
    return out


def solve(p: Program, limit: int | None = None) -> list[AnswerSet]:
    """All answer sets of ``p`` in deterministic order; ``[]`` if inconsistent."""
    return solve_ground(ground(p), limit)


def is_consistent(p: Program) -> bool:
    return bool(solve(p, limit=1))
