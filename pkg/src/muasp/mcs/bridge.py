"""Bridge rules, context designators and their textual form.

Textual form::

    t1: add(want_go(C,TL,L,T)) <- (anycar(C): want_go(C,TL,L,T)).
    anycar(C): add(go(C,TL,L,T)) <- (a_traffic_light(TL): go(C,TL,L,T)).

A reference is either a context name or ``role(Var)``; the variable is
replaced by each registered context name carrying that role, and the same
substitution applies to every atom of the rule.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol, Sequence, Union

from ..asp import Atom, Constant, ParseError, Variable, match_atom, parse_atom, substitute


class McsError(Exception):
    pass


class BridgeSyntaxError(McsError):
    pass


@dataclass(frozen=True)
class Designator:
    role: str
    var: str

    def __str__(self) -> str:
        return f"{self.role}({self.var})"


Ref = Union[str, Designator]


class RoleLookup(Protocol):
    def lookup(self, role: str) -> list[str]: ...


@dataclass(frozen=True)
class BridgeRule:
    dest: Ref
    op: str
    head: Atom
    body: tuple[tuple[Ref, Atom], ...]

    def __post_init__(self) -> None:
        if not isinstance(self.body, tuple):
            object.__setattr__(self, "body", tuple(self.body))
        if not self.body:
            raise McsError(f"bridge rule for {self.head} needs a nonempty body")
        bound = {v for _, a in self.body for v in a.variables()} | {d.var for d in self.designators()}
        free = self.head.variables() - bound
        if free:
            raise McsError(f"head variables {', '.join(sorted(free))} of {self} do not occur in the body")

    def designators(self) -> list[Designator]:
        refs = [self.dest] + [ref for ref, _ in self.body]
        return [r for r in refs if isinstance(r, Designator)]

    @property
    def is_concrete(self) -> bool:
        return not self.designators()

    def sources(self) -> list[str]:
        return [ref for ref, _ in self.body if isinstance(ref, str)]

    def __str__(self) -> str:
        body = ", ".join(f"({ref}: {a})" for ref, a in self.body)
        return f"{self.dest}: {self.op}({self.head}) <- {body}."


def resolve_designators(r: BridgeRule, registry: RoleLookup) -> list[BridgeRule]:
    """One concrete rule per combination of registrants; [] if a role is empty."""
    roles: dict[str, str] = {}
    for d in r.designators():
        if roles.setdefault(d.var, d.role) != d.role:
            raise McsError(f"variable {d.var} designates two roles in {r}")
    if not roles:
        return [r]
    names = [registry.lookup(role) for role in roles.values()]
    out = []
    for combo in itertools.product(*names):
        binding = {v: Constant(n) for v, n in zip(roles, combo)}

        def ref(x: Ref) -> str:
            return binding[x.var].name if isinstance(x, Designator) else x

        out.append(
            BridgeRule(
                ref(r.dest),
                r.op,
                substitute(r.head, binding),
                tuple((ref(c), substitute(a, binding)) for c, a in r.body),
            )
        )
    return out


def head_instances(r: BridgeRule, sets: Mapping[str, Iterable[Atom]]) -> list[Atom]:
    """Ground heads obtained from every way the body matches ``sets``."""
    missing = [c for c in r.sources() if c not in sets]
    if missing:
        raise McsError(f"rule {r} refers to unknown contexts {', '.join(missing)}")
    pools = [(a, sorted(sets[c])) for c, a in r.body]
    found: set[Atom] = set()

    def join(i: int, binding: dict) -> None:
        if i == len(pools):
            found.add(substitute(r.head, binding))
            return
        pattern, pool = pools[i]
        for atom in pool:
            b = match_atom(pattern, atom, binding)
            if b is not None:
                join(i + 1, b)

    join(0, {})
    return sorted(found)


def applicable(r: BridgeRule, sets: Mapping[str, Iterable[Atom]]) -> bool:
    if not r.is_concrete:
        raise McsError(f"resolve designators before checking {r}")
    return bool(head_instances(r, sets))


# -- text form ----------------------------------------------------------------

_RULE = re.compile(r"^\s*(?P<dest>.+?)\s*:\s*(?P<op>[a-z]\w*)\s*\((?P<head>.*)\)\s*<-\s*(?P<body>.*?)\s*\.?\s*$", re.S)


def _ref(text: str) -> Ref:
    try:
        a = parse_atom(text.strip())
    except ParseError as e:
        raise BridgeSyntaxError(f"bad context reference {text!r}: {e}") from None
    if not a.args:
        return a.predicate
    if len(a.args) == 1 and isinstance(a.args[0], Variable):
        return Designator(a.predicate, a.args[0].name)
    raise BridgeSyntaxError(f"context reference must be a name or role(Var), got {text!r}")


def _split_body(text: str) -> list[str]:
    items, depth, start = [], 0, None
    for i, ch in enumerate(text):
        if ch == "(":
            if depth == 0:
                start = i + 1
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise BridgeSyntaxError(f"unbalanced parentheses in {text!r}")
            if depth == 0:
                items.append(text[start:i])
        elif depth == 0 and not (ch.isspace() or ch == ","):
            raise BridgeSyntaxError(f"unexpected {ch!r} in bridge rule body {text!r}")
    if depth:
        raise BridgeSyntaxError(f"unbalanced parentheses in {text!r}")
    return items


def parse_bridge_rule(text: str) -> BridgeRule:
    m = _RULE.match(text)
    if not m:
        raise BridgeSyntaxError(f"expected 'dest: op(head) <- (ref: atom), ...', got {text!r}")
    body = []
    for item in _split_body(m["body"]):
        ref, sep, atom = item.partition(":")
        if not sep:
            raise BridgeSyntaxError(f"body element {item!r} lacks 'ref: atom'")
        body.append((_ref(ref), _parse(atom)))
    return BridgeRule(_ref(m["dest"]), m["op"], _parse(m["head"]), tuple(body))


def _parse(text: str) -> Atom:
    try:
        return parse_atom(text.strip())
    except ParseError as e:
        raise BridgeSyntaxError(str(e)) from None


def parse_bridge_rules(lines: Sequence[str] | str) -> list[BridgeRule]:
    if isinstance(lines, str):
        lines = [ln for ln in lines.splitlines() if ln.strip() and not ln.strip().startswith("%")]
    return [parse_bridge_rule(ln) for ln in lines]
