"""Exact differential polynomial algebra over curvature generators.

The objects here are polynomials in the derivatives of a finite family of
curvature functions (k1, k2 by default), with coefficients that are exact
rationals times monomials in a fixed set of scalar parameters (a, b, c, G,
c1, c2, ... and the signs eps1, eps2, which square to one).  Everything is
exact: no floats, no simplification heuristics, one canonical form.

The total derivative D treats parameters as constants and bumps generator
orders.  On top of D the module provides the variational tools the rest of
the package needs: Euler operators, anti-derivatives on the image of D,
Frechet derivatives of flow pairs, and the Lie bracket of evolution flows.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Union


def _read_max_order() -> int:
    raw = os.environ.get("NULLFLOW_MAX_ORDER", "")
    try:
        value = int(raw)
    except ValueError:
        return 12
    return value if value >= 1 else 12


#: Hard cap on derivative orders.  Creating a generator beyond this raises
#: OrderLimitError.  Overridable through the NULLFLOW_MAX_ORDER env var.
MAX_ORDER = _read_max_order()


class DiffAlgError(Exception):
    """Base class for errors raised by the exact algebra."""


class NotExact(DiffAlgError):
    """An anti-derivative was requested of something outside the image of D."""


class NonZeroConstantTerm(DiffAlgError):
    """The operation needs a polynomial with zero constant term."""


class OrderLimitError(DiffAlgError):
    """A derivative order would exceed MAX_ORDER."""


_NAMED_PARAM_RANK = {"a": (0, 0), "b": (1, 0), "c": (2, 0), "G": (3, 0)}


def _param_rank(name: str) -> tuple[int, int]:
    """Sort rank of a parameter symbol; raises for unknown names."""
    rank = _NAMED_PARAM_RANK.get(name)
    if rank is not None:
        return rank
    if len(name) > 1 and name[0] == "c" and name[1] != "0" and name[1:].isdigit():
        return (4, int(name[1:]))
    raise DiffAlgError("unknown parameter symbol %r" % (name,))


def _validate_powers(powers: tuple[tuple[str, int], ...]) -> None:
    seen = set()
    for name, exp in powers:
        _param_rank(name)
        if name in seen:
            raise DiffAlgError("repeated parameter %r in coefficient" % (name,))
        seen.add(name)
        if exp == 0:
            raise DiffAlgError("zero exponent on parameter %r" % (name,))
        if exp < 0 and name != "a":
            raise DiffAlgError("negative power only allowed on 'a', got %r" % (name,))


@dataclass(frozen=True, order=True)
class Generator:
    """One jet coordinate: a curvature variable differentiated `order` times."""

    variable: str
    order: int

    def __post_init__(self) -> None:
        if not self.variable or not self.variable.isidentifier():
            raise DiffAlgError("bad generator variable %r" % (self.variable,))
        if self.order < 0:
            raise DiffAlgError("negative derivative order")
        if self.order > MAX_ORDER:
            raise OrderLimitError(
                "derivative order %d exceeds MAX_ORDER=%d" % (self.order, MAX_ORDER)
            )


@dataclass(frozen=True)
class ParamCoeff:
    """Coefficient of one term: rational * parameter powers * sign symbols.

    `powers` maps parameter names to integer exponents (as a sorted tuple of
    pairs); only 'a' may carry a negative exponent.  eps1/eps2 are exponents
    mod 2 since the signs square to one.
    """

    rational: Fraction
    powers: tuple[tuple[str, int], ...] = ()
    eps1: int = 0
    eps2: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "rational", Fraction(self.rational))
        object.__setattr__(self, "eps1", self.eps1 % 2)
        object.__setattr__(self, "eps2", self.eps2 % 2)
        if self.rational == 0:
            object.__setattr__(self, "powers", ())
            object.__setattr__(self, "eps1", 0)
            object.__setattr__(self, "eps2", 0)
            return
        powers = tuple(sorted(self.powers, key=lambda it: _param_rank(it[0])))
        _validate_powers(powers)
        object.__setattr__(self, "powers", powers)

    def mul(self, other: "ParamCoeff") -> "ParamCoeff":
        merged: dict[str, int] = dict(self.powers)
        for name, exp in other.powers:
            merged[name] = merged.get(name, 0) + exp
        powers = tuple((n, e) for n, e in merged.items() if e != 0)
        return ParamCoeff(
            self.rational * other.rational,
            powers,
            self.eps1 + other.eps1,
            self.eps2 + other.eps2,
        )


# Internal term keys are (gens, powers, eps1, eps2) where gens is a sorted
# tuple of ((variable, order), exponent) pairs and powers is a sorted tuple
# of (name, exponent) pairs.  Values are nonzero Fractions.
_GenPart = tuple[tuple[tuple[str, int], int], ...]
_TermKey = tuple[_GenPart, tuple[tuple[str, int], ...], int, int]


def _merge_factors(items: Iterable[tuple], extra: Iterable[tuple]) -> dict:
    merged: dict = {}
    for key, exp in items:
        merged[key] = merged.get(key, 0) + exp
    for key, exp in extra:
        merged[key] = merged.get(key, 0) + exp
    return {k: e for k, e in merged.items() if e != 0}


def _accumulate(acc: dict, key: _TermKey, value: Fraction) -> None:
    total = acc.get(key, _ZERO_FRAC) + value
    if total == 0:
        acc.pop(key, None)
    else:
        acc[key] = total


_ZERO_FRAC = Fraction(0)


class DiffPoly:
    """Immutable differential polynomial in canonical form.

    Terms live in a dict keyed by (generator monomial, parameter monomial,
    eps1 bit, eps2 bit) with exact rational values; no zero coefficients are
    stored, so structural equality is dict equality.  str() renders the
    canonical serialization (terms ordered by total generator degree, then
    lexicographically), which the expression parser maps back bit-for-bit.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: dict | None = None):
        clean: dict[_TermKey, Fraction] = {}
        if terms:
            for key, value in terms.items():
                value = Fraction(value)
                if value != 0:
                    clean[key] = value
        self._terms = clean

    # -- construction helpers -------------------------------------------

    @staticmethod
    def from_coeff(coeff: ParamCoeff, gens: _GenPart = ()) -> "DiffPoly":
        if coeff.rational == 0:
            return DiffPoly()
        key = (tuple(sorted(gens)), coeff.powers, coeff.eps1, coeff.eps2)
        return DiffPoly({key: coeff.rational})

    # -- queries ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        """True when no generator appears (a pure parameter expression)."""
        return all(not gens for (gens, _, _, _) in self._terms)

    def terms(self) -> Iterator[tuple[_GenPart, ParamCoeff]]:
        for (gens, pows, e1, e2), q in self._terms.items():
            yield gens, ParamCoeff(q, pows, e1, e2)

    def generators(self) -> set[Generator]:
        out = set()
        for (gens, _, _, _) in self._terms:
            for (var, order), _exp in gens:
                out.add(Generator(var, order))
        return out

    def variables(self) -> set[str]:
        return {g.variable for g in self.generators()}

    def parameters(self) -> set[str]:
        out = set()
        for (_, pows, e1, e2) in self._terms:
            out.update(name for name, _ in pows)
            if e1:
                out.add("eps1")
            if e2:
                out.add("eps2")
        return out

    def constant_part(self) -> "DiffPoly":
        return DiffPoly(
            {k: v for k, v in self._terms.items() if not k[0]}
        )

    def canonical_terms(self) -> list[tuple[_GenPart, ParamCoeff]]:
        """Terms in canonical order (total degree, then lexicographic)."""
        out = []
        for key in self._sorted_keys():
            gens, pows, e1, e2 = key
            out.append((gens, ParamCoeff(self._terms[key], pows, e1, e2)))
        return out

    def coefficient_of(self, gens: _GenPart) -> "DiffPoly":
        """The parameter-level coefficient standing in front of a monomial."""
        gens = tuple(sorted(gens))
        picked = {}
        for (g, pows, e1, e2), q in self._terms.items():
            if g == gens:
                picked[((), pows, e1, e2)] = q
        return DiffPoly(picked)

    # -- arithmetic -------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self._terms == other._terms

    def __add__(self, other: "Polylike") -> "DiffPoly":
        other = _as_poly(other)
        acc = dict(self._terms)
        for key, value in other._terms.items():
            _accumulate(acc, key, value)
        return DiffPoly(acc)

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        return DiffPoly({k: -v for k, v in self._terms.items()})

    def __sub__(self, other: "Polylike") -> "DiffPoly":
        return self + (-_as_poly(other))

    def __rsub__(self, other: "Polylike") -> "DiffPoly":
        return _as_poly(other) + (-self)

    def __mul__(self, other: "Polylike") -> "DiffPoly":
        other = _as_poly(other)
        acc: dict[_TermKey, Fraction] = {}
        for (g1, p1, a1, b1), q1 in self._terms.items():
            for (g2, p2, a2, b2), q2 in other._terms.items():
                gens = tuple(sorted(_merge_factors(g1, g2).items()))
                pows = _merge_factors(p1, p2)
                key = (
                    gens,
                    tuple(sorted(pows.items(), key=lambda it: _param_rank(it[0]))),
                    (a1 + a2) % 2,
                    (b1 + b2) % 2,
                )
                _accumulate(acc, key, q1 * q2)
        return DiffPoly(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "DiffPoly":
        if n < 0:
            raise DiffAlgError("negative polynomial power")
        out = one()
        for _ in range(n):
            out = out * self
        return out

    # -- rendering ---------------------------------------------------------

    def _sorted_keys(self) -> list[_TermKey]:
        def sort_key(key: _TermKey):
            gens, pows, e1, e2 = key
            degree = sum(exp for _, exp in gens)
            pow_rank = tuple((_param_rank(n), e) for n, e in pows)
            return (degree, gens, pow_rank, e1, e2)

        return sorted(self._terms, key=sort_key)

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        chunks = []
        for key in self._sorted_keys():
            q = self._terms[key]
            body = _format_term(key, abs(q))
            if not chunks:
                chunks.append(("-" if q < 0 else "") + body)
            else:
                chunks.append((" - " if q < 0 else " + ") + body)
        return "".join(chunks)

    def __repr__(self) -> str:
        return "DiffPoly(%s)" % (self,)


Polylike = Union[DiffPoly, int, Fraction]


def _as_poly(value: Polylike) -> DiffPoly:
    if isinstance(value, DiffPoly):
        return value
    if isinstance(value, (int, Fraction)):
        return const(value)
    raise TypeError("cannot coerce %r to DiffPoly" % (value,))


def _format_term(key: _TermKey, magnitude: Fraction) -> str:
    gens, pows, e1, e2 = key
    factors = []
    if magnitude != 1 or (not gens and not pows and not e1 and not e2):
        factors.append(str(magnitude))
    for name, exp in pows:
        factors.append(name if exp == 1 else "%s^%d" % (name, exp))
    if e1:
        factors.append("eps1")
    if e2:
        factors.append("eps2")
    for (var, order), exp in gens:
        if order <= 3:
            base = var + "'" * order
        else:
            base = "%s^(%d)" % (var, order)
        if exp != 1:
            base += "^%d" % (exp,)
        factors.append(base)
    return "*".join(factors)


# -- public constructors ---------------------------------------------------


def const(value: Union[int, Fraction]) -> DiffPoly:
    """The constant polynomial with the given exact rational value."""
    q = Fraction(value)
    if q == 0:
        return DiffPoly()
    return DiffPoly({((), (), 0, 0): q})


def zero() -> DiffPoly:
    return DiffPoly()


def one() -> DiffPoly:
    return const(1)


def gen(variable: str, order: int = 0) -> DiffPoly:
    """The polynomial consisting of a single generator."""
    g = Generator(variable, order)
    return DiffPoly({((((g.variable, g.order), 1),), (), 0, 0): Fraction(1)})


def param(name: str, exp: int = 1) -> DiffPoly:
    """A parameter symbol (a, b, c, G, c1, c2, ..., eps1, eps2) to a power."""
    if name == "eps1":
        return DiffPoly({((), (), exp % 2, 0): Fraction(1)})
    if name == "eps2":
        return DiffPoly({((), (), 0, exp % 2): Fraction(1)})
    if exp == 0:
        return one()
    _validate_powers(((name, exp),))
    return DiffPoly({((), ((name, exp),), 0, 0): Fraction(1)})


def add(f: Polylike, g: Polylike) -> DiffPoly:
    return _as_poly(f) + _as_poly(g)


def mul(f: Polylike, g: Polylike) -> DiffPoly:
    return _as_poly(f) * _as_poly(g)


def scale(f: Polylike, coeff: ParamCoeff) -> DiffPoly:
    return _as_poly(f) * DiffPoly.from_coeff(coeff)


# -- flow pairs -------------------------------------------------------------


@dataclass(frozen=True)
class FlowPair:
    """An evolution right-hand side (one polynomial per curvature variable)."""

    p1: DiffPoly
    p2: DiffPoly
    variables: tuple[str, str] = ("k1", "k2")

    def __post_init__(self) -> None:
        allowed = set(self.variables)
        for comp in (self.p1, self.p2):
            stray = comp.variables() - allowed
            if stray:
                raise DiffAlgError(
                    "flow component uses variables %s outside %s"
                    % (sorted(stray), self.variables)
                )

    def components(self) -> tuple[DiffPoly, DiffPoly]:
        return (self.p1, self.p2)

    def is_zero(self) -> bool:
        return self.p1.is_zero() and self.p2.is_zero()

    def __str__(self) -> str:
        return "(%s, %s)" % (self.p1, self.p2)


# -- derivations ------------------------------------------------------------


def total_derivative(f: Polylike, n: int = 1) -> DiffPoly:
    """Apply the total derivative D (parameters are constants) n times."""
    out = _as_poly(f)
    for _ in range(n):
        out = _d_once(out)
    return out


def _d_once(f: DiffPoly) -> DiffPoly:
    acc: dict[_TermKey, Fraction] = {}
    for (gens, pows, e1, e2), q in f._terms.items():
        for idx, ((var, order), exp) in enumerate(gens):
            if order + 1 > MAX_ORDER:
                raise OrderLimitError(
                    "total derivative would exceed MAX_ORDER=%d on %s"
                    % (MAX_ORDER, var)
                )
            bumped = _merge_factors(
                gens, (((var, order), -1), ((var, order + 1), 1))
            )
            key = (tuple(sorted(bumped.items())), pows, e1, e2)
            _accumulate(acc, key, q * exp)
    return DiffPoly(acc)


def partial_derivative(f: Polylike, generator) -> DiffPoly:
    """Partial derivative with respect to one jet coordinate."""
    if isinstance(generator, Generator):
        target = (generator.variable, generator.order)
    else:
        target = (generator[0], generator[1])
    acc: dict[_TermKey, Fraction] = {}
    for (gens, pows, e1, e2), q in _as_poly(f)._terms.items():
        for (var_order, exp) in gens:
            if var_order == target:
                reduced = _merge_factors(gens, ((var_order, -1),))
                key = (tuple(sorted(reduced.items())), pows, e1, e2)
                _accumulate(acc, key, q * exp)
                break
    return DiffPoly(acc)


def euler_operator(f: Polylike, variable: str) -> DiffPoly:
    """Variational derivative: sum over m of (-D)^m applied to df/dv^(m).

    The result is zero exactly on (constants plus) total derivatives, which
    makes this the exactness oracle behind anti_derivative.
    """
    f = _as_poly(f)
    orders = sorted({g.order for g in f.generators() if g.variable == variable})
    total = zero()
    for m in orders:
        part = partial_derivative(f, (variable, m))
        part = total_derivative(part, m)
        if m % 2:
            part = -part
        total = total + part
    return total


def order_of(f: Polylike) -> int:
    """Highest derivative order present; -1 for constants (and zero)."""
    f = _as_poly(f)
    orders = [g.order for g in f.generators()]
    return max(orders) if orders else -1


def _max_generator(f: DiffPoly) -> tuple[str, int]:
    # Lexicographic on (order, variable): the pivot for integration by parts.
    best = None
    for g in f.generators():
        key = (g.order, g.variable)
        if best is None or key > best:
            best = key
    assert best is not None
    return (best[1], best[0])


def _integrate_in(f: DiffPoly, var: str, order: int) -> DiffPoly:
    """Polynomial integration in the single jet coordinate (var, order)."""
    target = (var, order)
    acc: dict[_TermKey, Fraction] = {}
    for (gens, pows, e1, e2), q in f._terms.items():
        exp = dict(gens).get(target, 0)
        raised = _merge_factors(gens, ((target, 1),))
        key = (tuple(sorted(raised.items())), pows, e1, e2)
        _accumulate(acc, key, q / (exp + 1))
    return DiffPoly(acc)


def anti_derivative(f: Polylike) -> DiffPoly:
    """The unique g with zero constant term and D(g) = f, if one exists.

    Raises NonZeroConstantTerm when f has a constant part and NotExact when
    f is not a total derivative.  Strategy: fail fast with the Euler
    operator, then integrate by parts from the highest generator downward;
    each step integrates the coefficient of the lex-maximal jet coordinate
    and subtracts a total derivative, which strictly lowers that coordinate.
    """
    f = _as_poly(f)
    if f.is_zero():
        return zero()
    if not f.constant_part().is_zero():
        raise NonZeroConstantTerm("anti-derivative needs zero constant term")
    for variable in sorted(f.variables()):
        if not euler_operator(f, variable).is_zero():
            raise NotExact("Euler operator in %s is nonzero" % (variable,))

    result = zero()
    work = f
    while not work.is_zero():
        var, m = _max_generator(work)
        if m == 0:
            raise NotExact("residual of order zero after integration by parts")
        coeff = partial_derivative(work, (var, m))
        for g in coeff.generators():
            if (g.order, g.variable) > (m - 1, var):
                raise NotExact(
                    "coefficient of %s^(%d) is not of lower order" % (var, m)
                )
        piece = _integrate_in(coeff, var, m - 1)
        result = result + piece
        work = work - total_derivative(piece)
    return result


# -- flow calculus ----------------------------------------------------------


def frechet(a: FlowPair, b: FlowPair) -> FlowPair:
    """Directional (Frechet) derivative of A along B: A'[B].

    Component j is the sum over jet coordinates (v_i, m) of
    dA_j/dv_i^(m) * D^m(B_i).
    """
    if a.variables != b.variables:
        raise DiffAlgError("flow pairs over different variables")
    variables = a.variables
    b_comps = b.components()
    dcache: dict[tuple[int, int], DiffPoly] = {}

    def d_m(i: int, m: int) -> DiffPoly:
        if (i, 0) not in dcache:
            dcache[(i, 0)] = b_comps[i]
        top = max(mm for (ii, mm) in dcache if ii == i)
        while top < m:
            dcache[(i, top + 1)] = total_derivative(dcache[(i, top)])
            top += 1
        return dcache[(i, m)]

    out = []
    for j in range(2):
        comp = a.components()[j]
        total = zero()
        for g in sorted(comp.generators()):
            i = variables.index(g.variable)
            total = total + partial_derivative(comp, g) * d_m(i, g.order)
        out.append(total)
    return FlowPair(out[0], out[1], variables)


def lie_bracket_flows(a: FlowPair, b: FlowPair) -> FlowPair:
    """Lie bracket [A, B] of evolution flows: applying A to B minus B to A.

    Equal to frechet(B, A) - frechet(A, B); the flows commute when this
    vanishes identically.
    """
    left = frechet(b, a)
    right = frechet(a, b)
    return FlowPair(left.p1 - right.p1, left.p2 - right.p2, a.variables)


def is_symmetry(flow: FlowPair, candidate: FlowPair) -> bool:
    """True when the candidate flow commutes with the given flow."""
    return lie_bracket_flows(flow, candidate).is_zero()
