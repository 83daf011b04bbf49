"""Small Pratt-style parser shared by every textual syntax in the package.

The grammar is the usual ``+ - * / ^`` with parentheses.  What a number, a
bare identifier, or a call such as ``S[1,-2](N)`` / ``F(N+1)`` means is
decided by a :class:`Grammar` object, so polynomials, nested-sum
expressions, series and operators all reuse the same front end.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .poly import Polynomial, RationalFunction

__all__ = ["ParseError", "Grammar", "parse", "parse_rational", "parse_polynomial", "split_top_level"]


class ParseError(ValueError):
    """Syntax error carrying a 1-based line and column."""

    def __init__(self, message: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.column = col


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<id>[A-Za-z_ε][A-Za-z0-9_]*)|(?P<op>[-+*/^(),\[\]{}=;]))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", n))
    return toks


def split_top_level(text: str, sep: str = ",") -> list:
    """Split on ``sep`` outside any bracket nesting."""
    out, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        elif ch == sep and depth == 0:
            out.append(text[start:i])
            start = i + 1
    out.append(text[start:])
    return [s.strip() for s in out]


class Grammar:
    """Hooks mapping leaves of the syntax tree to algebra values."""

    def number(self, value: Fraction):
        raise NotImplementedError

    def symbol(self, name: str):
        raise NotImplementedError

    def call(self, name: str, bracket: str | None, args: str | None):
        raise ValueError(f"unknown function {name!r}")

    def power(self, base, exponent):
        if isinstance(exponent, int):
            return base**exponent
        raise ValueError(f"symbolic exponent {exponent!r} not supported here")


class _Parser:
    def __init__(self, text: str, grammar: Grammar):
        self.text = text
        self.g = grammar
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.take()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", self.text, t.pos)
        return t

    def fail(self, msg: str, tok: _Tok):
        raise ParseError(msg, self.text, tok.pos)

    def wrap(self, fn, tok: _Tok, *args):
        try:
            return fn(*args)
        except ParseError:
            raise
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise ParseError(str(exc), self.text, tok.pos) from exc

    def parse(self):
        if self.peek().kind == "end":
            self.fail("empty expression", self.peek())
        v = self.expr()
        t = self.peek()
        if t.kind != "end":
            self.fail(f"unexpected {t.text!r}", t)
        return v

    def expr(self):
        v = self.term()
        while self.peek().text in ("+", "-"):
            t = self.take()
            rhs = self.term()
            v = self.wrap((lambda a, b: a + b) if t.text == "+" else (lambda a, b: a - b), t, v, rhs)
        return v

    def term(self):
        v = self.unary()
        while self.peek().text in ("*", "/"):
            t = self.take()
            rhs = self.unary()
            v = self.wrap((lambda a, b: a * b) if t.text == "*" else (lambda a, b: a / b), t, v, rhs)
        return v

    def unary(self):
        t = self.peek()
        if t.text == "-":
            self.take()
            v = self.unary()
            return self.wrap(lambda a: -a, t, v)
        if t.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def exponent(self):
        t = self.peek()
        sign = 1
        if t.text == "(":
            raw = self._raw_group("(", ")").strip()
            try:
                return int(raw)
            except ValueError:
                return raw
        if t.text in ("-", "+"):
            self.take()
            sign = -1 if t.text == "-" else 1
            t = self.peek()
        if t.kind == "num":
            self.take()
            return sign * int(t.text)
        if t.kind == "id" and sign == 1:
            self.take()
            return t.text
        self.fail("bad exponent", t)

    def power(self):
        base = self.atom()
        if self.peek().text == "^":
            t = self.take()
            e = self.exponent()
            return self.wrap(self.g.power, t, base, e)
        return base

    def _raw_group(self, open_: str, close: str) -> str:
        start_tok = self.expect(open_)
        depth = 1
        while True:
            t = self.take()
            if t.kind == "end":
                self.fail(f"unbalanced {open_!r}", start_tok)
            if t.text in ("(", "[", "{"):
                depth += 1
            elif t.text in (")", "]", "}"):
                depth -= 1
                if depth == 0:
                    if t.text != close:
                        self.fail(f"expected {close!r}", t)
                    return self.text[start_tok.pos + 1:t.pos]

    def atom(self):
        t = self.peek()
        if t.kind == "num":
            self.take()
            return self.wrap(self.g.number, t, Fraction(int(t.text)))
        if t.text == "(":
            self.take()
            v = self.expr()
            self.expect(")")
            return v
        if t.kind == "id":
            self.take()
            bracket = args = None
            if self.peek().text == "[":
                bracket = self._raw_group("[", "]")
            if self.peek().text == "(" and (bracket is not None or self._callable(t.text)):
                args = self._raw_group("(", ")")
            if bracket is None and args is None:
                return self.wrap(self.g.symbol, t, t.text)
            return self.wrap(self.g.call, t, t.text, bracket, args)
        self.fail(f"unexpected {t.text or 'end of input'!r}", t)

    def _callable(self, name: str) -> bool:
        probe = getattr(self.g, "is_function", None)
        return bool(probe and probe(name))


def parse(text: str, grammar: Grammar):
    """Parse ``text`` with the given grammar hooks."""
    return _Parser(text, grammar).parse()


class RationalGrammar(Grammar):
    """Rational functions in ``N k x ep`` with integer constants."""

    def number(self, value):
        return RationalFunction(value)

    def symbol(self, name):
        return RationalFunction.var(name)


def parse_rational(text: str) -> RationalFunction:
    """Parse e.g. ``(2*ep - N - 1)*(ep + 2*N + 6)/(N+1)``."""
    return parse(text, RationalGrammar())


def parse_polynomial(text: str) -> Polynomial:
    r = parse_rational(text)
    if not r.is_polynomial():
        raise ValueError(f"{text!r} is not a polynomial")
    return r.num
