"""Parsing, grounding and solving of normal logic programs."""

from .grounding import expand_ranges, ground, herbrand_universe
from .parser import ParseError, check_rule_safety, parse_atom, parse_ground_atom, parse_program
from .solver import (
    AnswerSet,
    is_answer_set,
    is_consistent,
    least_model,
    reduct,
    solve,
    solve_ground,
)
from .syntax import (
    AspError,
    Atom,
    BinOp,
    Builtin,
    Constant,
    GroundingError,
    Integer,
    Literal,
    Program,
    Range,
    Rule,
    SafetyError,
    Signature,
    Variable,
    match_atom,
    substitute,
)

__all__ = [
    "AnswerSet",
    "AspError",
    "Atom",
    "BinOp",
    "Builtin",
    "Constant",
    "GroundingError",
    "Integer",
    "Literal",
    "ParseError",
    "Program",
    "Range",
    "Rule",
    "SafetyError",
    "Signature",
    "Variable",
    "check_rule_safety",
    "expand_ranges",
    "ground",
    "herbrand_universe",
    "is_answer_set",
    "is_consistent",
    "least_model",
    "match_atom",
    "parse_atom",
    "parse_ground_atom",
    "parse_program",
    "reduct",
    "solve",
    "solve_ground",
    "substitute",
]
