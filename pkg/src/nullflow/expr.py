"""Text form of differential polynomials: parsing and rendering.

The plain syntax is exactly what DiffPoly.__str__ emits, so parse and render
are mutually inverse on canonical text.  Grammar, loosest to tightest:

    expr   :=  term (('+' | '-') term)*
    term   :=  unary (('*' | '/') unary)*
    unary  :=  '-' unary | power
    power  :=  atom ('^' ['-'] INT)?
    atom   :=  INT | '(' expr ')' | 'D' '(' expr ')' | 'Dinv' '(' expr ')'
            |  IDENT                      -- parameter, eps sign, or generator
            |  GEN ('\'')+                -- primes mark derivative orders 1..3
            |  GEN '^' '(' INT ')'        -- explicit derivative order

Primes bind tighter than '^', so k1'^2 is the square of k1'.  A power suffix
may follow an explicit derivative order (k1^(4)^2).  Division is restricted
to invertible coefficient monomials (rationals, powers of a, eps signs);
everything else is a parse error.  D evaluates the total derivative and Dinv
the exact anti-derivative, so Dinv of a non-derivative raises NotExact from
the algebra layer rather than a ParseError.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from .diffalg import (
    DiffAlgError,
    DiffPoly,
    FlowPair,
    ParamCoeff,
    anti_derivative,
    const,
    gen,
    one,
    param,
    total_derivative,
)


class ParseError(ValueError):
    """Syntax or symbol error, with the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__("%s (offset %d)" % (message, offset))
        self.offset = offset


_ONE_CHAR = set("+-*/^()'")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        if ch in _ONE_CHAR:
            tokens.append((ch, ch, i))
            i += 1
            continue
        raise ParseError("unexpected character %r" % (ch,), i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: tuple[str, ...]):
        self.text = text
        self.variables = variables
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(
                "expected %r, found %r" % (kind, tok[1] or "end of input"), tok[2]
            )
        return tok

    # ----- grammar ---------------------------------------------------------

    def parse(self) -> DiffPoly:
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError("trailing input %r" % (tok[1],), tok[2])
        return value

    def expr(self) -> DiffPoly:
        value = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.next()[0]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> DiffPoly:
        value = self.unary()
        while self.peek()[0] in ("*", "/"):
            op, _, offset = self.next()
            rhs = self.unary()
            if op == "*":
                value = value * rhs
            else:
                value = value * _inverted(rhs, offset)
        return value

    def unary(self) -> DiffPoly:
        if self.peek()[0] == "-":
            self.next()
            return -self.unary()
        return self.power()

    def power(self) -> DiffPoly:
        value = self.atom()
        if self.peek()[0] == "^":
            _, _, offset = self.next()
            exponent = self.signed_int()
            if exponent >= 0:
                value = value**exponent
            else:
                value = _inverted(value, offset) ** (-exponent)
        return value

    def signed_int(self) -> int:
        sign = 1
        if self.peek()[0] == "-":
            self.next()
            sign = -1
        tok = self.expect("int")
        return sign * int(tok[1])

    def atom(self) -> DiffPoly:
        kind, text, offset = self.next()
        if kind == "int":
            return const(int(text))
        if kind == "(":
            value = self.expr()
            self.expect(")")
            return value
        if kind == "ident":
            if text in ("D", "Dinv"):
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return total_derivative(inner) if text == "D" else anti_derivative(inner)
            if text in self.variables:
                return self.generator_suffix(text)
            try:
                return param(text)
            except DiffAlgError:
                raise ParseError("unknown symbol %r" % (text,), offset) from None
        raise ParseError("unexpected %r" % (text or "end of input"), offset)

    def generator_suffix(self, variable: str) -> DiffPoly:
        order = 0
        while self.peek()[0] == "'":
            self.next()
            order += 1
        if order == 0 and self.peek()[0] == "^" and self.tokens[self.pos + 1][0] == "(":
            self.next()
            self.expect("(")
            order = int(self.expect("int")[1])
            self.expect(")")
        return gen(variable, order)


def _inverted(value: DiffPoly, offset: int) -> DiffPoly:
    """Invert a coefficient monomial; ParseError when not invertible."""
    terms = value.canonical_terms()
    if len(terms) != 1 or terms[0][0]:
        raise ParseError("divisor must be a coefficient monomial", offset)
    coeff = terms[0][1]
    try:
        flipped = ParamCoeff(
            1 / coeff.rational,
            tuple((name, -exp) for name, exp in coeff.powers),
            coeff.eps1,
            coeff.eps2,
        )
    except DiffAlgError:
        raise ParseError("divisor is not invertible here", offset) from None
    return DiffPoly.from_coeff(flipped)


def parse_expr(text: str, variables: tuple[str, ...] = ("k1", "k2")) -> DiffPoly:
    """Parse text to a canonical DiffPoly; D and Dinv are evaluated eagerly."""
    return _Parser(text, variables).parse()


def parse_flow(text: str, variables: tuple[str, str] = ("k1", "k2")) -> FlowPair:
    """Parse 'expr , expr' (top-level comma) into a FlowPair."""
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            left = parse_expr(text[:i], variables)
            right = parse_expr(text[i + 1 :], variables)
            return FlowPair(left, right, variables)
    raise ParseError("expected two comma-separated components", len(text))


# ----- rendering ------------------------------------------------------------


def render(value: Union[DiffPoly, FlowPair], fmt: str = "plain") -> str:
    """Render to canonical text ('plain', parseable) or LaTeX ('latex')."""
    if fmt == "plain":
        if isinstance(value, FlowPair):
            return "%s, %s" % (value.p1, value.p2)
        return str(value)
    if fmt == "latex":
        if isinstance(value, FlowPair):
            return "\\left( %s,\\; %s \\right)" % (
                _latex_poly(value.p1),
                _latex_poly(value.p2),
            )
        return _latex_poly(value)
    raise ValueError("unknown render format %r" % (fmt,))


_GREEK = {"eps1": "\\varepsilon_1", "eps2": "\\varepsilon_2"}


def _latex_name(name: str) -> str:
    if name in _GREEK:
        return _GREEK[name]
    if len(name) > 1 and name[1:].isdigit():
        sub = name[1:]
        if len(sub) == 1:
            return "%s_%s" % (name[0], sub)
        return "%s_{%s}" % (name[0], sub)
    return name


def _latex_gen(variable: str, order: int, exp: int) -> str:
    base = _latex_name(variable)
    if 1 <= order <= 3:
        base += "'" * order
    elif order > 3:
        base += "^{(%d)}" % (order,)
    if exp == 1:
        return base
    if order >= 1:
        return "\\left(%s\\right)^{%d}" % (base, exp)
    return "%s^{%d}" % (base, exp)


def _latex_poly(poly: DiffPoly) -> str:
    terms = poly.canonical_terms()
    if not terms:
        return "0"
    chunks = []
    for gens, coeff in terms:
        pieces = []
        magnitude = abs(coeff.rational)
        if magnitude.denominator != 1:
            pieces.append(
                "\\frac{%d}{%d}" % (magnitude.numerator, magnitude.denominator)
            )
        elif magnitude != 1 or (not coeff.powers and not gens and not coeff.eps1 and not coeff.eps2):
            pieces.append(str(magnitude.numerator))
        for name, exp in coeff.powers:
            base = _latex_name(name)
            pieces.append(base if exp == 1 else "%s^{%d}" % (base, exp))
        if coeff.eps1:
            pieces.append(_GREEK["eps1"])
        if coeff.eps2:
            pieces.append(_GREEK["eps2"])
        for (variable, order), exp in gens:
            pieces.append(_latex_gen(variable, order, exp))
        body = " ".join(pieces)
        if not chunks:
            chunks.append(("-" if coeff.rational < 0 else "") + body)
        else:
            chunks.append((" - " if coeff.rational < 0 else " + ") + body)
    return "".join(chunks)
