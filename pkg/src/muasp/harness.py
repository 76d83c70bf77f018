"""Randomized self-check: the solver against exhaustive enumeration."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .asp import Atom, Program, Rule, is_answer_set, solve


def random_program(rng: random.Random, max_rules: int = 6, max_atoms: int = 4) -> Program:
    """A small ground program over atoms a, b, c, ... with random negation."""
    pool = [Atom(chr(ord("a") + i)) for i in range(rng.randint(1, max_atoms))]
    rules = []
    for _ in range(rng.randint(1, max_rules)):
        head = None if rng.random() < 0.15 else rng.choice(pool)
        pos = tuple(a for a in pool if rng.random() < 0.3)
        neg = tuple(a for a in pool if rng.random() < 0.35)
        if head is None and not (pos or neg):
            neg = (rng.choice(pool),)
        rules.append(Rule(head, pos, neg))
    return Program(tuple(rules))


def enumerate_answer_sets(gp: Program) -> set[frozenset]:
    """Every subset of the program's atoms that passes the stability check."""
    atoms = sorted({a for r in gp for a in r.atoms()}, key=Atom.sort_key)
    return {
        frozenset(c)
        for n in range(len(atoms) + 1)
        for c in itertools.combinations(atoms, n)
        if is_answer_set(gp, c)
    }


@dataclass
class CheckResult:
    count: int = 0
    mismatches: list[Program] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def check(seed: int, count: int) -> CheckResult:
    rng = random.Random(seed)
    result = CheckResult()
    for _ in range(count):
        p = random_program(rng)
        got = {s.atoms for s in solve(p)}
        if got != enumerate_answer_sets(p):
            result.mismatches.append(p)
        result.count += 1
    return result
