"""Recursive-descent parser for the program text grammar.

Statements end with ``.``; ``:-`` separates head and body; ``not`` marks
default negation; ``%`` starts a line comment.  Identifiers written with an
escaped underscore (``want\\_go``) are normalised to ``want_go``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    COMPARISONS,
    AspError,
    Atom,
    BinOp,
    Builtin,
    Constant,
    Integer,
    Program,
    Range,
    Rule,
    SafetyError,
    Variable,
    expr_variables,
)


class ParseError(AspError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<op>:-|\.\.|!=|<=|>=|<|>|=|\+|-|\(|\)|,|\.)
  | (?P<int>[0-9]+)
  | (?P<id>[a-z](?:[A-Za-z0-9_]|\\_)*)
  | (?P<var>[A-Z](?:[A-Za-z0-9_]|\\_)*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            value = chunk.replace("\\_", "_") if kind in ("id", "var") else chunk
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column)

    def advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind not in ("op",):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    # -- program level -------------------------------------------------

    def program(self) -> Program:
        rules = []
        while self.tok.kind != "eof":
            start = self.tok
            rule = self.statement()
            check_rule_safety(rule, line=start.line)
            rules.append(rule)
        return Program(tuple(rules))

    def statement(self) -> Rule:
        head = None
        if not self.at(":-"):
            head = self.atom()
        pos, neg, builtins = [], [], []
        if self.at(":-"):
            self.advance()
            self.body(pos, neg, builtins)
        elif head is None:
            raise self.error("expected a rule")
        self.expect(".")
        return Rule(head, tuple(pos), tuple(neg), tuple(builtins))

    def body(self, pos: list, neg: list, builtins: list) -> None:
        while True:
            if self.tok.kind == "id" and self.tok.text == "not" and self.peek().kind == "id":
                self.advance()
                neg.append(self.atom())
            elif self.tok.kind == "id" and self.peek().text == "(":
                pos.append(self.atom())
            elif self.tok.kind == "id" and not (
                self.peek().kind == "op" and self.peek().text in COMPARISONS + ("+", "-")
            ):
                pos.append(self.atom())
            else:
                builtins.append(self.builtin())
            if self.at(","):
                self.advance()
                continue
            return

    # -- atoms and terms ---------------------------------------------

    def atom(self) -> Atom:
        if self.tok.kind != "id":
            found = self.tok.text or "end of input"
            raise self.error(f"expected an atom, found {found!r}")
        name = self.advance().text
        args = []
        if self.at("("):
            self.advance()
            args.append(self.argument())
            while self.at(","):
                self.advance()
                args.append(self.argument())
            self.expect(")")
        return Atom(name, tuple(args))

    def integer(self) -> int:
        sign = 1
        if self.at("-"):
            self.advance()
            sign = -1
        if self.tok.kind != "int":
            raise self.error("expected an integer")
        return sign * int(self.advance().text)

    def argument(self):
        tok = self.tok
        if tok.kind == "var":
            self.advance()
            return Variable(tok.text)
        if tok.kind == "id":
            self.advance()
            if self.at("("):
                raise self.error("function terms are not supported")
            return Constant(tok.text)
        if tok.kind == "int" or self.at("-"):
            lo = self.integer()
            if self.at(".."):
                self.advance()
                return Range(lo, self.integer())
            return Integer(lo)
        found = tok.text or "end of input"
        raise self.error(f"expected a term, found {found!r}")

    def builtin(self) -> Builtin:
        lhs = self.expression()
        if not (self.tok.kind == "op" and self.tok.text in COMPARISONS):
            raise self.error("expected a comparison operator")
        op = self.advance().text
        rhs = self.expression()
        return Builtin(op, lhs, rhs)

    def expression(self):
        left = self.primary()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            left = BinOp(op, left, self.primary())
        return left

    def primary(self):
        tok = self.tok
        if tok.kind == "var":
            self.advance()
            return Variable(tok.text)
        if tok.kind == "int" or (self.at("-") and self.peek().kind == "int"):
            return Integer(self.integer())
        if tok.kind == "id":
            self.advance()
            return Constant(tok.text)
        if self.at("("):
            self.advance()
            e = self.expression()
            self.expect(")")
            return e
        found = tok.text or "end of input"
        raise self.error(f"expected an expression, found {found!r}")


def check_rule_safety(rule: Rule, line: int | None = None) -> None:
    """Raise :class:`SafetyError` unless every variable can be bound.

    A variable is bound when it occurs in a positive body atom, or when it is
    the lone left side of an ``=`` whose right side is already bound.
    """
    bound: set[str] = set()
    for a in rule.pos_body:
        bound |= a.variables()
    changed = True
    while changed:
        changed = False
        for b in rule.builtins:
            if (
                b.op == "="
                and isinstance(b.lhs, Variable)
                and b.lhs.name not in bound
                and expr_variables(b.rhs) <= bound
            ):
                bound.add(b.lhs.name)
                changed = True
    ordered = []
    for a in rule.atoms():
        ordered += [t.name for t in a.args if isinstance(t, Variable)]
    for b in rule.builtins:
        ordered += sorted(b.variables())
    for name in ordered:
        if name not in bound:
            raise SafetyError(name, rule, line)


def parse_program(text: str) -> Program:
    """Parse program text; raises :class:`ParseError` or :class:`SafetyError`."""
    return _Parser(text).program()


def parse_atom(text: str) -> Atom:
    """Parse a single atom such as ``want_go(c1,t1,ns,2)``; variables allowed."""
    p = _Parser(text)
    a = p.atom()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after atom")
    if any(isinstance(t, Range) for t in a.args):
        raise ParseError("ranges are not allowed here", 1, 1)
    return a


def parse_ground_atom(text: str) -> Atom:
    a = parse_atom(text)
    if not a.is_ground():
        raise ParseError(f"atom {a} is not ground", 1, 1)
    return a
