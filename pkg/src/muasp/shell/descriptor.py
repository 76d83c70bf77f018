"""Service descriptors: the inner program plus its signals and I/O interface."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import yaml

from ..asp import Atom, Program, Signature, match_atom, parse_atom, parse_ground_atom, parse_program
from ..query import Query

SENSOR = "<sensor>"


class DescriptorError(ValueError):
    pass


@dataclass(frozen=True)
class Retention:
    """Which inputs survive the end of a tick.

    ``retain`` holds predicate names; an empty set is the stateless mode.
    """

    retain: frozenset = frozenset()

    def __post_init__(self) -> None:
        if not isinstance(self.retain, frozenset):
            object.__setattr__(self, "retain", frozenset(self.retain))

    @property
    def stateless(self) -> bool:
        return not self.retain

    def keeps(self, a: Atom) -> bool:
        return a.predicate in self.retain

    def __str__(self) -> str:
        return "stateless" if self.stateless else f"stateful({', '.join(sorted(self.retain))})"


STATELESS = Retention()


def stateful(*predicates: str) -> Retention:
    return Retention(frozenset(predicates))


@dataclass(frozen=True)
class ServiceDescriptor:
    program: Program
    activation: Atom | None = None
    stop: Atom | None = None
    inputs: tuple[Atom, ...] = ()
    outputs: tuple[Atom, ...] = ()
    queries: tuple[Query, ...] = ()
    retention: Retention = STATELESS
    frequency: int = 1

    def __post_init__(self) -> None:
        for name in ("inputs", "outputs", "queries"):
            value = getattr(self, name)
            if not isinstance(value, tuple):
                object.__setattr__(self, name, tuple(value))
        for signal in (self.activation, self.stop):
            if signal is not None and not signal.is_ground():
                raise DescriptorError(f"signal atoms must be ground, got {signal}")
        if self.frequency < 1:
            raise DescriptorError("frequency must be a positive tick period")

    def input_schema(self, a: Atom) -> Atom | None:
        return _first_match(self.inputs, a)

    def output_schema(self, a: Atom) -> Atom | None:
        return _first_match(self.outputs, a)

    def is_input(self, a: Atom) -> bool:
        return self.input_schema(a) is not None

    def is_output(self, a: Atom) -> bool:
        return self.output_schema(a) is not None


def _first_match(schemas: Iterable[Atom], a: Atom) -> Atom | None:
    for s in schemas:
        if match_atom(s, a) is not None:
            return s
    return None


def matches(schema: Atom, a: Atom) -> bool:
    return match_atom(schema, a) is not None


def compute_heads(p: Program) -> set[Signature]:
    return {r.head.signature for r in p if r.head is not None}


def compute_undef(p: Program) -> set[Signature]:
    """Signatures used in some rule body but defined by no rule."""
    body = {a.signature for r in p for a in r.pos_body + r.neg_body}
    return body - compute_heads(p)


@dataclass(frozen=True)
class Violation:
    field: str
    atom: Atom
    reason: str

    def __str__(self) -> str:
        return f"{self.field} {self.atom}: {self.reason}"


def validate_descriptor(d: ServiceDescriptor) -> list[Violation]:
    """Check the two subset conditions on the interface; empty list means valid."""
    heads, undef = compute_heads(d.program), compute_undef(d.program)
    out: list[Violation] = []

    def need_undef(name: str, a: Atom) -> None:
        if a.signature in heads:
            out.append(Violation(name, a, f"{a.signature} is defined by a rule head"))
        elif a.signature not in undef:
            out.append(Violation(name, a, f"{a.signature} does not occur in any rule body"))

    if d.activation is not None:
        need_undef("activation", d.activation)
    if d.stop is not None:
        need_undef("stop", d.stop)
    for a in d.inputs:
        need_undef("input", a)
    for a in d.outputs:
        if a.signature not in heads:
            out.append(Violation("output", a, f"{a.signature} is not a rule head"))
    for q in d.queries:
        if q.atom.signature not in heads:
            out.append(Violation("query", q.atom, f"{q.atom.signature} is not a rule head"))
    return out


# -- descriptor files --------------------------------------------------------


def _atom_list(value, key: str) -> tuple[Atom, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, list):
        raise DescriptorError(f"{key}: expected a list of atoms")
    return tuple(parse_atom(str(v)) for v in value)


def _load_program(value: str, base: Path) -> Program:
    text = str(value)
    if "\n" not in text.strip():
        candidate = base / text.strip()
        if candidate.is_file():
            return parse_program(candidate.read_text())
    return parse_program(text)


def _retention(value) -> Retention:
    if value is None or value == "stateless":
        return STATELESS
    if isinstance(value, dict) and set(value) == {"stateful"}:
        return stateful(*map(str, value["stateful"] or ()))
    raise DescriptorError(f"retention: expected 'stateless' or {{stateful: [predicates]}}, got {value!r}")


def descriptor_from_dict(data: dict, base: Path | str = ".") -> ServiceDescriptor:
    if not isinstance(data, dict) or "program" not in data:
        raise DescriptorError("descriptor needs a 'program' section")
    unknown = set(data) - {"program", "activation", "stop", "inputs", "outputs", "queries", "retention", "frequency"}
    if unknown:
        raise DescriptorError(f"unknown descriptor sections: {', '.join(sorted(unknown))}")
    queries = data.get("queries") or []
    return ServiceDescriptor(
        program=_load_program(data["program"], Path(base)),
        activation=parse_ground_atom(str(data["activation"])) if data.get("activation") else None,
        stop=parse_ground_atom(str(data["stop"])) if data.get("stop") else None,
        inputs=_atom_list(data.get("inputs"), "inputs"),
        outputs=_atom_list(data.get("outputs"), "outputs"),
        queries=tuple(Query.parse(str(q)) for q in queries),
        retention=_retention(data.get("retention")),
        frequency=int(data.get("frequency", 1)),
    )


def load_descriptor(path: Path | str) -> ServiceDescriptor:
    """Read a YAML descriptor; ``program`` is inline source or a path relative to the file."""
    path = Path(path)
    return descriptor_from_dict(yaml.safe_load(path.read_text()), path.parent)
