"""The five query modes evaluated over the full list of answer sets."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .asp import AnswerSet, AspError, Atom, parse_atom


class InconsistentProgramError(AspError):
    """Queries are undefined when the program has no answer sets."""


class QueryMode(enum.Enum):
    BRAVE = "brave"  # ?A
    NAF_SOME = "some-not"  # ? not A
    POSSIBLE = "M"  # ?M A
    KNOWN = "K"  # ?K A
    NOT_ALL = "NOT"  # ?NOT A

    @classmethod
    def parse(cls, text: str) -> QueryMode:
        for mode in cls:
            if text == mode.value or text.upper() == mode.name:
                return mode
        raise ValueError(f"unknown query mode {text!r}")


@dataclass(frozen=True)
class Query:
    mode: QueryMode
    atom: Atom

    def __post_init__(self) -> None:
        if not self.atom.is_ground():
            raise ValueError(f"queries range over ground atoms only, got {self.atom}")

    @classmethod
    def parse(cls, text: str) -> Query:
        """``"K go(c1,t1,ns,3)"`` -> Query(KNOWN, go(c1,t1,ns,3))."""
        mode, _, atom = text.strip().partition(" ")
        return cls(QueryMode.parse(mode), parse_atom(atom.strip()))

    def __str__(self) -> str:
        return f"{self.mode.value} {self.atom}"


@dataclass(frozen=True)
class QueryResult:
    mode: QueryMode
    atom: Atom
    value: bool

    @property
    def query(self) -> Query:
        return Query(self.mode, self.atom)

    def __str__(self) -> str:
        return f"{self.mode.value} {self.atom} = {'true' if self.value else 'false'}"


def eval_query(mode: QueryMode, a: Atom, answer_sets: Sequence[AnswerSet]) -> bool:
    if not a.is_ground():
        raise ValueError(f"queries range over ground atoms only, got {a}")
    if not answer_sets:
        raise InconsistentProgramError(f"cannot evaluate {mode.value} {a}: program is inconsistent")
    if mode in (QueryMode.BRAVE, QueryMode.POSSIBLE):
        return any(a in s for s in answer_sets)
    if mode is QueryMode.NAF_SOME:
        return any(a not in s for s in answer_sets)
    if mode is QueryMode.KNOWN:
        return all(a in s for s in answer_sets)
    return all(a not in s for s in answer_sets)


def run_query(q: Query, answer_sets: Sequence[AnswerSet]) -> QueryResult:
    return QueryResult(q.mode, q.atom, eval_query(q.mode, q.atom, answer_sets))
