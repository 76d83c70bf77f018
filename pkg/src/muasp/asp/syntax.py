"""Terms, atoms, rules and programs of the normal-logic-program language."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

INT_MIN = -(2**31)
INT_MAX = 2**31 - 1

COMPARISONS = ("=", "!=", "<", "<=", ">", ">=")


class AspError(Exception):
    """Base class for all errors raised by the ASP layer."""


class GroundingError(AspError):
    pass


class SafetyError(GroundingError):
    """A rule variable cannot be bound by its positive body."""

    def __init__(self, variable: str, rule, line: int | None = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"unsafe variable {variable} in rule {rule}{where}")
        self.variable = variable
        self.rule = rule
        self.line = line


@dataclass(frozen=True, order=True)
class Constant:
    name: str

    def __post_init__(self) -> None:
        if not self.name or not (self.name[0].islower() or self.name[0].isdigit()):
            raise ValueError(f"invalid constant name {self.name!r}")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Integer:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, order=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Range:
    """``lo..hi`` inside a fact; removed by :func:`expand_ranges`."""

    lo: int
    hi: int

    def __str__(self) -> str:
        return f"{self.lo}..{self.hi}"


GroundTerm = Union[Constant, Integer]
Term = Union[Constant, Integer, Variable]


def term_key(t) -> tuple:
    # integers sort before symbolic constants
    if isinstance(t, Integer):
        return (0, t.value, "")
    if isinstance(t, Constant):
        return (1, 0, t.name)
    if isinstance(t, Variable):
        return (2, 0, t.name)
    return (3, t.lo, str(t.hi))


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple = ()

    def __post_init__(self) -> None:
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def signature(self) -> Signature:
        return Signature(self.predicate, len(self.args))

    def is_ground(self) -> bool:
        return all(isinstance(a, (Constant, Integer)) for a in self.args)

    def variables(self) -> set[str]:
        return {a.name for a in self.args if isinstance(a, Variable)}

    def sort_key(self) -> tuple:
        return (self.predicate, tuple(term_key(a) for a in self.args))

    def __lt__(self, other: Atom) -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(map(str, self.args))})"


@dataclass(frozen=True, order=True)
class Signature:
    """Predicate name and arity; the unit Heads/Undef are computed over."""

    predicate: str
    arity: int

    def __str__(self) -> str:
        return self.predicate if self.arity == 0 else f"{self.predicate}/{self.arity}"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    negated: bool = False

    def __str__(self) -> str:
        return f"not {self.atom}" if self.negated else str(self.atom)


@dataclass(frozen=True)
class BinOp:
    """Integer arithmetic ``left op right`` with op in ``+``/``-``."""

    op: str
    left: object
    right: object

    def __str__(self) -> str:
        right = f"({self.right})" if isinstance(self.right, BinOp) else str(self.right)
        return f"{self.left}{self.op}{right}"


def expr_variables(e) -> set[str]:
    if isinstance(e, Variable):
        return {e.name}
    if isinstance(e, BinOp):
        return expr_variables(e.left) | expr_variables(e.right)
    return set()


@dataclass(frozen=True)
class Builtin:
    op: str
    lhs: object
    rhs: object

    def __post_init__(self) -> None:
        if self.op not in COMPARISONS:
            raise ValueError(f"unknown comparison {self.op!r}")

    def variables(self) -> set[str]:
        return expr_variables(self.lhs) | expr_variables(self.rhs)

    def __str__(self) -> str:
        return f"{self.lhs}{self.op}{self.rhs}"


@dataclass(frozen=True)
class Rule:
    head: Atom | None
    pos_body: tuple[Atom, ...] = ()
    neg_body: tuple[Atom, ...] = ()
    builtins: tuple[Builtin, ...] = ()

    def __post_init__(self) -> None:
        for name in ("pos_body", "neg_body", "builtins"):
            value = getattr(self, name)
            if not isinstance(value, tuple):
                object.__setattr__(self, name, tuple(value))

    @property
    def is_constraint(self) -> bool:
        return self.head is None

    @property
    def is_fact(self) -> bool:
        return self.head is not None and not (self.pos_body or self.neg_body or self.builtins)

    @property
    def body(self) -> tuple[Literal, ...]:
        return tuple(Literal(a) for a in self.pos_body) + tuple(
            Literal(a, True) for a in self.neg_body
        )

    def atoms(self) -> Iterator[Atom]:
        if self.head is not None:
            yield self.head
        yield from self.pos_body
        yield from self.neg_body

    def is_ground(self) -> bool:
        return not self.builtins and all(a.is_ground() for a in self.atoms())

    def variables(self) -> set[str]:
        out: set[str] = set()
        for a in self.atoms():
            out |= a.variables()
        for b in self.builtins:
            out |= b.variables()
        return out

    def __str__(self) -> str:
        body = [str(a) for a in self.pos_body]
        body += [f"not {a}" for a in self.neg_body]
        body += [str(b) for b in self.builtins]
        if self.head is None:
            return f":- {', '.join(body)}."
        if not body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(body)}."


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not isinstance(self.rules, tuple):
            object.__setattr__(self, "rules", tuple(self.rules))

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def __add__(self, other: Program) -> Program:
        return Program(self.rules + other.rules)

    def with_facts(self, atoms: Iterable[Atom]) -> Program:
        return Program(self.rules + tuple(Rule(a) for a in atoms))

    def __str__(self) -> str:
        return "\n".join(map(str, self.rules))


def fact(atom: Atom) -> Rule:
    return Rule(atom)


def match_atom(pattern: Atom, atom: Atom, binding: dict | None = None) -> dict | None:
    """One-way match of ``pattern`` (may contain variables) against a ground atom.

    Returns the extended binding, or None when they do not match.  Repeated
    variables must bind to the same term.
    """
    if pattern.predicate != atom.predicate or len(pattern.args) != len(atom.args):
        return None
    out = dict(binding) if binding else {}
    for p, t in zip(pattern.args, atom.args):
        if isinstance(p, Variable):
            if p.name == "_":
                continue
            bound = out.setdefault(p.name, t)
            if bound != t:
                return None
        elif p != t:
            return None
    return out


def substitute(atom: Atom, binding: dict) -> Atom:
    return Atom(atom.predicate, tuple(binding.get(a.name, a) if isinstance(a, Variable) else a for a in atom.args))
