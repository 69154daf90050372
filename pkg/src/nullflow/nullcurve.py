"""Vector fields along a null curve and their action on the curvatures.

A local field is written in the moving frame as V = f T + h W1 + g N + l W2
with differential-polynomial components.  The admissible classes are nested:

    X_P        all fields with polynomial components,
    X*_P       those preserving the causal character of the tangent
               (g' = -eps1 a h),
    T_PLambda  those additionally preserving the pseudo arc-length
               normalization; these are exactly the fields produced by
               make_X and exactly the X*_P fields with rho = 0.

The derivative d_v differentiates one field along the flow of another.  Its
scalar part is not the plain evolution derivation: parameter flows that do
not preserve arc length pick up the correction V(f)' + rho/(2a) f' when
differentiating f', and scalar_action implements that corrected derivation.
On T_PLambda (rho = 0) it coincides with the evolution derivation of the
field's curvature flow, which is what makes the flow-level bracket identity
of gamma_bracket hold there with the plain Lie bracket.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .diffalg import (
    DiffAlgError,
    DiffPoly,
    FlowPair,
    NotExact,
    anti_derivative,
    const,
    gen,
    one,
    param,
    partial_derivative,
    total_derivative,
    zero,
)

_K1 = gen("k1")
_K2 = gen("k2")
_A = param("a")
_A_INV = param("a", -1)
_HALF = Fraction(1, 2)


def _default_eps1() -> DiffPoly:
    return param("eps1")


def _default_eps2() -> DiffPoly:
    return param("eps2")


def _default_a() -> DiffPoly:
    return param("a")


def _default_g() -> DiffPoly:
    return param("G")


@dataclass(frozen=True)
class FrameMetric:
    """Ambient data: the signs eps1, eps2, the arc normalization a, and G.

    All fields are polynomials so the geometry can be run fully symbolically;
    eps1/eps2 may also be the constants +-1 and G any constant (set G to 0
    for the flat ambient space).  `a` must stay the symbol: the formulas
    divide by it.
    """

    eps1: DiffPoly = field(default_factory=_default_eps1)
    eps2: DiffPoly = field(default_factory=_default_eps2)
    a: DiffPoly = field(default_factory=_default_a)
    G: DiffPoly = field(default_factory=_default_g)

    def __post_init__(self) -> None:
        if self.a != param("a"):
            raise DiffAlgError("metric field a must be the symbol a")
        for eps in (self.eps1, self.eps2):
            if not eps.is_constant() or eps * eps != one():
                raise DiffAlgError("eps1/eps2 must square to one")
        if not self.G.is_constant():
            raise DiffAlgError("metric G must be constant")

    @property
    def eps12(self) -> DiffPoly:
        return self.eps1 * self.eps2


@dataclass(frozen=True)
class LocalVectorField:
    """V = f T + h W1 + g N + l W2 in the moving frame."""

    f: DiffPoly
    h: DiffPoly
    g: DiffPoly
    l: DiffPoly

    def components(self) -> tuple[DiffPoly, DiffPoly, DiffPoly, DiffPoly]:
        return (self.f, self.h, self.g, self.l)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components())

    def __add__(self, other: "LocalVectorField") -> "LocalVectorField":
        return LocalVectorField(
            self.f + other.f, self.h + other.h, self.g + other.g, self.l + other.l
        )

    def __sub__(self, other: "LocalVectorField") -> "LocalVectorField":
        return LocalVectorField(
            self.f - other.f, self.h - other.h, self.g - other.g, self.l - other.l
        )

    def __neg__(self) -> "LocalVectorField":
        return LocalVectorField(-self.f, -self.h, -self.g, -self.l)

    def scale(self, factor: DiffPoly) -> "LocalVectorField":
        return LocalVectorField(
            factor * self.f, factor * self.h, factor * self.g, factor * self.l
        )

    def __str__(self) -> str:
        return "(%s; %s; %s; %s)" % self.components()


class Projections(NamedTuple):
    phi: DiffPoly
    psi: DiffPoly
    rho: DiffPoly


class FrameCoeffs(NamedTuple):
    alpha: DiffPoly
    beta: DiffPoly
    delta: DiffPoly


def projections(v: LocalVectorField, metric: FrameMetric = FrameMetric()) -> Projections:
    """Normal projections phi, psi and the arc-length defect rho of a field."""
    phi = metric.a * v.f + total_derivative(v.h) - metric.eps1 * _K1 * v.g
    psi = total_derivative(v.l) + metric.eps2 * _K2 * v.g
    rho = (
        -metric.a * total_derivative(v.f)
        + 2 * metric.a * _K1 * v.h
        - metric.a * _K2 * v.l
        - total_derivative(phi)
        + metric.eps1 * _K1 * total_derivative(v.g)
    )
    return Projections(phi, psi, rho)


def frame_derivative_coeffs(
    v: LocalVectorField, metric: FrameMetric = FrameMetric()
) -> FrameCoeffs:
    """The alpha, beta, delta coefficients of the frame transport along v."""
    phi, psi, rho = projections(v, metric)
    alpha = _A_INV * (total_derivative(phi) + _HALF * rho)
    beta = _A_INV * (
        total_derivative(alpha) + _K1 * phi - _K2 * psi - metric.G * v.g
    )
    delta = (
        _A_INV * total_derivative(psi, 2)
        + _K1 * psi
        + metric.eps12 * _K2 * phi
    )
    return FrameCoeffs(alpha, beta, delta)


def variational_flow(
    v: LocalVectorField, metric: FrameMetric = FrameMetric()
) -> FlowPair:
    """The induced curvature evolution (V(k1), V(k2)) of a field in X*_P."""
    phi, psi, rho = projections(v, metric)
    a2 = param("a", -2)

    def sym(weight: DiffPoly, f: DiffPoly) -> DiffPoly:
        return total_derivative(weight * f) + weight * total_derivative(f)

    vk1 = (
        a2 * total_derivative(phi, 3)
        + _A_INV * sym(_K1, phi)
        - _A_INV * sym(_K2, psi)
        + _A_INV
        * (
            _HALF * _A_INV * total_derivative(rho, 2)
            + _K1 * rho
            - 2 * metric.G * total_derivative(v.g)
        )
    )
    vk2 = (
        metric.eps12 * a2 * total_derivative(psi, 3)
        + metric.eps12 * _A_INV * sym(_K1, psi)
        + _A_INV * sym(_K2, phi)
        + _A_INV * _K2 * rho
        - metric.eps2 * metric.G * v.l
    )
    return FlowPair(vk1, vk2)


def make_X(
    h: DiffPoly,
    l: DiffPoly,
    c1: DiffPoly | int = 0,
    c2: DiffPoly | int = 0,
    metric: FrameMetric = FrameMetric(),
) -> LocalVectorField:
    """Arc-length preserving field with tangential data (h, l).

    Requires h and k1*h - k2*l to be exact; the two integration constants
    pick the member of the two-parameter family.  Every field returned here
    classifies as T_PLambda and has rho identically zero.
    """
    c1 = c1 if isinstance(c1, DiffPoly) else const(c1)
    c2 = c2 if isinstance(c2, DiffPoly) else const(c2)
    for name, value in (("c1", c1), ("c2", c2)):
        if not value.is_constant():
            raise DiffAlgError("%s must be a constant" % (name,))
    p = anti_derivative(h)
    q = anti_derivative(_K1 * h - _K2 * l)
    g = -metric.eps1 * metric.a * p + c1
    f = (
        -_HALF
        * _A_INV
        * (
            total_derivative(h)
            + metric.a * _K1 * p
            - metric.a * q
            - metric.eps1 * c1 * _K1
        )
        + c2
    )
    return LocalVectorField(f, h, g, l)


def _xi_table(
    flow: FlowPair, rho: DiffPoly, needed: dict[str, int]
) -> dict[tuple[str, int], DiffPoly]:
    correction = _HALF * _A_INV * rho
    table: dict[tuple[str, int], DiffPoly] = {}
    for var, top in needed.items():
        idx = flow.variables.index(var)
        table[(var, 0)] = flow.components()[idx]
        for m in range(1, top + 1):
            table[(var, m)] = total_derivative(table[(var, m - 1)]) + correction * gen(
                var, m
            )
    return table


def scalar_action(
    v: LocalVectorField, target: DiffPoly, metric: FrameMetric = FrameMetric()
) -> DiffPoly:
    """Corrected derivation of a scalar along the flow of v.

    Acts as the evolution derivation of variational_flow(v) plus the
    arc-length correction rho/(2a) on each derivative slot; the two agree
    exactly when rho vanishes.
    """
    flow = variational_flow(v, metric)
    rho = projections(v, metric).rho
    return _apply_xi(target, flow, rho)


def _apply_xi(target: DiffPoly, flow: FlowPair, rho: DiffPoly) -> DiffPoly:
    needed: dict[str, int] = {}
    for g in target.generators():
        needed[g.variable] = max(needed.get(g.variable, -1), g.order)
    table = _xi_table(flow, rho, needed)
    out = zero()
    for g in sorted(target.generators()):
        out = out + partial_derivative(target, g) * table[(g.variable, g.order)]
    return out


def d_v(
    v: LocalVectorField, u: LocalVectorField, metric: FrameMetric = FrameMetric()
) -> LocalVectorField:
    """Derivative of the field u along the flow of v (v must be in X*_P)."""
    phi, psi, rho = projections(v, metric)
    alpha, beta, delta = frame_derivative_coeffs(v, metric)
    flow = variational_flow(v, metric)
    psi1 = total_derivative(psi)
    e12 = metric.eps12

    def xi(component: DiffPoly) -> DiffPoly:
        return _apply_xi(component, flow, rho)

    new_f = xi(u.f) - alpha * u.f - beta * u.h + e12 * _A_INV * delta * u.l
    new_h = xi(u.h) + phi * u.f - metric.eps1 * beta * u.g - e12 * _A_INV * psi1 * u.l
    new_g = xi(u.g) + metric.eps1 * phi * u.h + alpha * u.g + metric.eps2 * psi * u.l
    new_l = xi(u.l) + psi * u.f + _A_INV * psi1 * u.h + metric.eps1 * _A_INV * delta * u.g
    return LocalVectorField(new_f, new_h, new_g, new_l)


def gamma_bracket(
    v1: LocalVectorField, v2: LocalVectorField, metric: FrameMetric = FrameMetric()
) -> LocalVectorField:
    """Bracket of fields along the curve: d_v(v1, v2) - d_v(v2, v1).

    Closed on X*_P and on T_PLambda; its induced curvature flow is the
    commutator of the corrected scalar actions, and for rho-free fields the
    plain Lie bracket of the induced flows.
    """
    return d_v(v1, v2, metric) - d_v(v2, v1, metric)


def inner(
    v: LocalVectorField, u: LocalVectorField, metric: FrameMetric = FrameMetric()
) -> DiffPoly:
    """Frame inner product: -f1 g2 - g1 f2 + eps1 h1 h2 + eps2 l1 l2."""
    return (
        -v.f * u.g
        - v.g * u.f
        + metric.eps1 * v.h * u.h
        + metric.eps2 * v.l * u.l
    )


def curvature_identity_residual(
    v1: LocalVectorField,
    v2: LocalVectorField,
    u: LocalVectorField,
    metric: FrameMetric = FrameMetric(),
) -> LocalVectorField:
    """Defect of the constant-curvature commutation identity; zero when it holds.

    Compares d_v along the bracket with the commutator of nested d_v and the
    G-weighted curvature term on the right-hand side.
    """
    lhs = (
        d_v(gamma_bracket(v1, v2, metric), u, metric)
        - d_v(v1, d_v(v2, u, metric), metric)
        + d_v(v2, d_v(v1, u, metric), metric)
    )
    rhs = v2.scale(metric.G * inner(u, v1, metric)) - v1.scale(
        metric.G * inner(u, v2, metric)
    )
    return lhs - rhs


def classify(v: LocalVectorField, metric: FrameMetric = FrameMetric()) -> str:
    """Largest admissible class: 'X_P', 'X*_P', or 'T_PLambda'.

    Membership in the smaller classes is decided up to the free additive
    constants: the candidate constants are read off from g and from the
    residual of f, and must come out constant.
    """
    if total_derivative(v.g) != -metric.eps1 * metric.a * v.h:
        return "X_P"
    try:
        p = anti_derivative(v.h)
        q = anti_derivative(_K1 * v.h - _K2 * v.l)
    except NotExact:
        return "X*_P"
    c1 = v.g + metric.eps1 * metric.a * p
    if not c1.is_constant():
        return "X*_P"
    f_base = -_HALF * _A_INV * (
        total_derivative(v.h)
        + metric.a * _K1 * p
        - metric.a * q
        - metric.eps1 * c1 * _K1
    )
    if (v.f - f_base).is_constant():
        return "T_PLambda"
    return "X*_P"
