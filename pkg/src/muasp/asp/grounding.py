"""Range expansion, Herbrand universe and grounding.

Grounding instantiates each rule over the Herbrand universe, evaluating
builtins as soon as their variables are bound.  Instances whose positive
body mentions an atom that can never be derived are skipped: an atom of a
predicate that has defining rules is kept only if it belongs to the
over-approximation of derivable atoms (negation ignored).  Predicates with
no defining rule at all are open inputs and range over the whole universe,
so ``p(X) :- q(X).`` with universe ``{a}`` still yields ``p(a) :- q(a).``.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from typing import Iterator

from .parser import check_rule_safety
from .syntax import (
    INT_MAX,
    INT_MIN,
    Atom,
    BinOp,
    Builtin,
    Constant,
    GroundingError,
    Integer,
    Program,
    Range,
    Rule,
    Signature,
    Variable,
    expr_variables,
    term_key,
)


def expand_ranges(p: Program) -> Program:
    """Replace every fact containing ``lo..hi`` terms by one fact per value."""
    rules = []
    for rule in p.rules:
        ranged = [r for a in rule.atoms() for r in a.args if isinstance(r, Range)]
        ranged += [r for b in rule.builtins for r in (b.lhs, b.rhs) if isinstance(r, Range)]
        if not ranged:
            rules.append(rule)
            continue
        if not rule.is_fact:
            raise GroundingError(f"range outside a fact: {rule}")
        choices = []
        for t in rule.head.args:
            if isinstance(t, Range):
                if t.lo > t.hi:
                    raise GroundingError(f"empty range {t} in {rule}")
                choices.append([Integer(v) for v in range(t.lo, t.hi + 1)])
            else:
                choices.append([t])
        for combo in itertools.product(*choices):
            rules.append(Rule(Atom(rule.head.predicate, combo)))
    return Program(tuple(rules))


def _expr_terms(e) -> Iterator:
    if isinstance(e, BinOp):
        yield from _expr_terms(e.left)
        yield from _expr_terms(e.right)
    else:
        yield e


def herbrand_universe(p: Program) -> set:
    """Constants and integers written anywhere in ``p``."""
    out = set()
    for rule in p.rules:
        for a in rule.atoms():
            out.update(t for t in a.args if isinstance(t, (Constant, Integer)))
        for b in rule.builtins:
            for side in (b.lhs, b.rhs):
                out.update(t for t in _expr_terms(side) if isinstance(t, (Constant, Integer)))
    return out


def _check_int(v: int) -> Integer:
    if not INT_MIN <= v <= INT_MAX:
        raise GroundingError(f"integer overflow: {v}")
    return Integer(v)


def evaluate(e, subst: dict):
    """Value of a term or arithmetic expression under ``subst``."""
    if isinstance(e, Variable):
        return subst[e.name]
    if isinstance(e, BinOp):
        left, right = evaluate(e.left, subst), evaluate(e.right, subst)
        if not (isinstance(left, Integer) and isinstance(right, Integer)):
            raise GroundingError(f"arithmetic on non-integers: {left}{e.op}{right}")
        v = left.value + right.value if e.op == "+" else left.value - right.value
        return _check_int(v)
    return e


def compare(op: str, left, right) -> bool:
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if not (isinstance(left, Integer) and isinstance(right, Integer)):
        raise GroundingError(f"ordering comparison on non-integers: {left}{op}{right}")
    a, b = left.value, right.value
    return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


def _bindable(b: Builtin, bound: set[str]) -> bool:
    return (
        b.op == "="
        and isinstance(b.lhs, Variable)
        and b.lhs.name not in bound
        and expr_variables(b.rhs) <= bound
    )


class _RulePlan:
    """Evaluation order for one rule: atoms first, builtins as soon as ready."""

    def __init__(self, rule: Rule):
        self.rule = rule
        self.steps: list[tuple[str, object]] = []
        bound: set[str] = set()
        pending = list(rule.builtins)
        atoms = list(rule.pos_body)
        while atoms or pending:
            progressed = True
            while progressed:
                progressed = False
                for b in list(pending):
                    if b.variables() <= bound:
                        self.steps.append(("test", b))
                        pending.remove(b)
                        progressed = True
                    elif _bindable(b, bound):
                        self.steps.append(("bind", b))
                        bound.add(b.lhs.name)
                        pending.remove(b)
                        progressed = True
            if not atoms:
                if pending:
                    missing = sorted(set().union(*(b.variables() for b in pending)) - bound)
                    raise GroundingError(f"unsafe variable {missing[0]} in rule {rule}")
                break
            # prefer the atom with most already-bound variables
            best = max(atoms, key=lambda a: len(a.variables() & bound) - 0.01 * len(a.variables()))
            atoms.remove(best)
            self.steps.append(("atom", best))
            bound |= best.variables()
        self.free = sorted(rule.variables() - bound)


def _substitute(a: Atom, subst: dict) -> Atom:
    return Atom(a.predicate, tuple(subst[t.name] if isinstance(t, Variable) else t for t in a.args))


class _Grounder:
    def __init__(self, p: Program):
        self.program = p
        self.universe = sorted(herbrand_universe(p), key=term_key)
        self.defined = {r.head.signature for r in p.rules if r.head is not None}
        self.plans = []
        for r in p.rules:
            check_rule_safety(r)
            self.plans.append(_RulePlan(r))
        self.possible: dict[Signature, list[Atom]] = defaultdict(list)
        self.possible_set: set[Atom] = set()

    def candidates(self, a: Atom, subst: dict) -> Iterator[dict]:
        sig = a.signature
        if sig in self.defined:
            for cand in self.possible[sig]:
                ext = _match(a, cand, subst)
                if ext is not None:
                    yield ext
            return
        # open predicate: every universe value for each unbound variable
        unbound = []
        for t in a.args:
            if isinstance(t, Variable) and t.name not in subst and t.name not in unbound:
                unbound.append(t.name)
        for values in itertools.product(self.universe, repeat=len(unbound)):
            ext = dict(subst)
            ext.update(zip(unbound, values))
            yield ext

    def substitutions(self, plan: _RulePlan) -> Iterator[dict]:
        def walk(i: int, subst: dict) -> Iterator[dict]:
            if i == len(plan.steps):
                yield subst
                return
            kind, item = plan.steps[i]
            if kind == "atom":
                for ext in self.candidates(item, subst):
                    yield from walk(i + 1, ext)
            elif kind == "bind":
                ext = dict(subst)
                ext[item.lhs.name] = evaluate(item.rhs, subst)
                yield from walk(i + 1, ext)
            else:
                if compare(item.op, evaluate(item.lhs, subst), evaluate(item.rhs, subst)):
                    yield from walk(i + 1, subst)

        if plan.free:
            raise GroundingError(f"unsafe variable {plan.free[0]} in rule {plan.rule}")
        yield from walk(0, {})

    def add_possible(self, a: Atom) -> bool:
        if a in self.possible_set:
            return False
        self.possible_set.add(a)
        self.possible[a.signature].append(a)
        return True

    def run(self) -> Program:
        changed = True
        while changed:
            changed = False
            for plan in self.plans:
                if plan.rule.head is None:
                    continue
                for subst in list(self.substitutions(plan)):
                    if self.add_possible(_substitute(plan.rule.head, subst)):
                        changed = True
        out: list[Rule] = []
        seen: set[Rule] = set()
        for plan in self.plans:
            r = plan.rule
            for subst in self.substitutions(plan):
                g = Rule(
                    _substitute(r.head, subst) if r.head is not None else None,
                    tuple(_substitute(a, subst) for a in r.pos_body),
                    tuple(_substitute(a, subst) for a in r.neg_body),
                )
                if g not in seen:
                    seen.add(g)
                    out.append(g)
        return Program(tuple(out))


def _match(pattern: Atom, cand: Atom, subst: dict) -> dict | None:
    ext = subst
    for t, v in zip(pattern.args, cand.args):
        if isinstance(t, Variable):
            bound = ext.get(t.name)
            if bound is None:
                if ext is subst:
                    ext = dict(subst)
                ext[t.name] = v
            elif bound != v:
                return None
        elif t != v:
            return None
    return ext


def ground(p: Program) -> Program:
    """Variable-free program equivalent to ``p`` (ranges expanded first)."""
    p = expand_ranges(p)
    if all(r.is_ground() for r in p.rules):
        return p
    return _Grounder(p).run()
