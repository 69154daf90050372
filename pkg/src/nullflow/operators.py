"""Integro-differential operators generating the curvature flow hierarchy.

The building blocks are the scalar operators

    omega(f) = (1/a) f' + k1 * Dinv(f) + Dinv(k1 f)
    theta(f) = (1/a) f''' + k1 f' + (k1 f)'
    s(f)     = (k2 f)' + k2 f'

and the 2x2 matrix operators assembled from them.  Two conventions matter
throughout and are covered by tests:

* Anti-derivatives of sums are always taken of the combined integrand
  (e.g. Dinv(k1 h - k2 l), never Dinv(k1 h) - Dinv(k2 l)): the admissible
  input class constrains the combination, and splitting it would reject
  admissible inputs with a spurious NotExact.
* Integration constants enter at two fixed sites per operator application.
  For a_matrix_apply(h, l, (c1, c2)) the sites are Dinv(h) -> Dinv(h)
  - eps1*c1/a and the combined integral -> +2*c2; for j_matrix_apply the
  same sites carry -2*eps1*c1/a and +4*c2, which makes the two factored
  routes to the recursion operator agree term for term.

NotExact from any anti-derivative site aborts the whole application.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .diffalg import (
    DiffAlgError,
    DiffPoly,
    FlowPair,
    anti_derivative,
    const,
    gen,
    param,
    total_derivative,
)

_K1 = gen("k1")
_K2 = gen("k2")
_A = param("a")
_A_INV = param("a", -1)
_EPS1 = param("eps1")
_EPS12 = param("eps1") * param("eps2")

Constant = Union[DiffPoly, int, Fraction]


def _as_constant(value: Constant, site: str) -> DiffPoly:
    if not isinstance(value, DiffPoly):
        value = const(value)
    if not value.is_constant():
        raise DiffAlgError("integration constant at %s must be constant" % (site,))
    return value


@dataclass(frozen=True)
class ProjectionPair:
    """The (phi, psi) projections produced by the symplectic-side operator."""

    phi: DiffPoly
    psi: DiffPoly


def omega_apply(f: DiffPoly, constants: tuple[Constant, Constant] = (0, 0)) -> DiffPoly:
    """omega(f) with integration constants at its two Dinv sites.

    The first constant rides with the k1*Dinv(f) site (so it surfaces as
    c*k1), the second with the bare Dinv(k1 f) site.
    """
    ca = _as_constant(constants[0], "omega k1-site")
    cb = _as_constant(constants[1], "omega bare site")
    return (
        _A_INV * total_derivative(f)
        + _K1 * (anti_derivative(f) + ca)
        + anti_derivative(_K1 * f)
        + cb
    )


def theta_apply(f: DiffPoly) -> DiffPoly:
    """theta(f) = (1/a) f''' + k1 f' + (k1 f)'; purely differential."""
    return (
        _A_INV * total_derivative(f, 3)
        + _K1 * total_derivative(f)
        + total_derivative(_K1 * f)
    )


def s_apply(f: DiffPoly) -> DiffPoly:
    """s(f) = (k2 f)' + k2 f'; purely differential."""
    return total_derivative(_K2 * f) + _K2 * total_derivative(f)


def theta_matrix_apply(pq: tuple[DiffPoly, DiffPoly]) -> FlowPair:
    """(1/a) [[theta, s], [s, -eps1 eps2 theta]] applied to a column."""
    p, q = pq
    first = _A_INV * (theta_apply(p) + s_apply(q))
    second = _A_INV * (s_apply(p) - _EPS12 * theta_apply(q))
    return FlowPair(first, second)


def j_matrix_apply(
    xy: tuple[DiffPoly, DiffPoly],
    constants: tuple[Constant, Constant] = (0, 0),
) -> tuple[DiffPoly, DiffPoly]:
    """Cosymplectic-side factor of the recursion operator.

    Applied to (2h, -eps1 eps2 l) this returns (phi, -psi), the projections
    of the vector field built from (h, l) with the same constants.
    """
    x, y = xy
    c1 = _as_constant(constants[0], "j first site")
    c2 = _as_constant(constants[1], "j second site")
    i1 = anti_derivative(x) - 2 * _EPS1 * c1 * _A_INV
    i2 = anti_derivative(_K1 * x + 2 * _EPS12 * _K2 * y) + 4 * c2
    quarter = Fraction(1, 4)
    j1 = quarter * total_derivative(x) + quarter * _A * _K1 * i1 + quarter * _A * i2
    j2 = Fraction(1, 2) * _EPS12 * _A * _K2 * i1 + _EPS12 * total_derivative(y)
    return (j1, j2)


def a_matrix_apply(
    h: DiffPoly,
    l: DiffPoly,
    constants: tuple[Constant, Constant] = (0, 0),
) -> ProjectionPair:
    """Projections (phi, psi) of the field built from tangential data (h, l)."""
    c1 = _as_constant(constants[0], "a first site")
    c2 = _as_constant(constants[1], "a second site")
    p_site = anti_derivative(h) - _EPS1 * c1 * _A_INV
    q_site = anti_derivative(_K1 * h - _K2 * l) + 2 * c2
    half = Fraction(1, 2)
    phi = half * total_derivative(h) + half * _A * _K1 * p_site + half * _A * q_site
    psi = total_derivative(l) - _EPS12 * _A * _K2 * p_site
    return ProjectionPair(phi, psi)


def b_matrix_apply(pp: ProjectionPair) -> FlowPair:
    """Curvature flow from projections: (1/a)[[theta,-s],[s, eps1 eps2 theta]]."""
    first = _A_INV * (theta_apply(pp.phi) - s_apply(pp.psi))
    second = _A_INV * (s_apply(pp.phi) + _EPS12 * theta_apply(pp.psi))
    return FlowPair(first, second)


def recursion_curvature(
    pq: tuple[DiffPoly, DiffPoly],
    constants: tuple[Constant, Constant] = (0, 0),
) -> FlowPair:
    """The recursion operator: the theta-matrix applied after the j-matrix."""
    return theta_matrix_apply(j_matrix_apply(pq, constants))


# -- classical two-component hierarchy ---------------------------------------

_U = gen("u")
_V = gen("v")


def hs_classic_sigma(n: int) -> FlowPair:
    """n-th flow of the classical coupled (u, v) hierarchy.

    sigma_0 is translation, sigma_1 the coupled third-order system, and
    sigma_{n} = ThetaJ sigma_{n-2} with zero integration constants.  Raises
    NotExact if an anti-derivative site fails at some level.
    """
    if n < 0:
        raise ValueError("hierarchy index must be nonnegative")
    if n == 0:
        return FlowPair(gen("u", 1), gen("v", 1), ("u", "v"))
    if n == 1:
        first = (
            Fraction(1, 2) * gen("u", 3)
            + 3 * _U * gen("u", 1)
            - 6 * _V * gen("v", 1)
        )
        second = -gen("v", 3) - 3 * _U * gen("v", 1)
        return FlowPair(first, second, ("u", "v"))
    x, y = hs_classic_sigma(n - 2).components()
    jx, jy = _hs_j_apply(x, y)
    return FlowPair(*_hs_theta_apply(jx, jy), ("u", "v"))


def _hs_j_apply(x: DiffPoly, y: DiffPoly) -> tuple[DiffPoly, DiffPoly]:
    jx = (
        Fraction(1, 2) * total_derivative(x)
        + _U * anti_derivative(x)
        + anti_derivative(_U * x - 2 * _V * y)
    )
    jy = -2 * _V * anti_derivative(x) - 2 * total_derivative(y)
    return jx, jy


def _hs_theta_apply(p: DiffPoly, q: DiffPoly) -> tuple[DiffPoly, DiffPoly]:
    tp = (
        Fraction(1, 2) * total_derivative(p, 3)
        + _U * total_derivative(p)
        + total_derivative(_U * p)
        + total_derivative(_V * q)
        + _V * total_derivative(q)
    )
    tq = (
        total_derivative(_V * p)
        + _V * total_derivative(p)
        + Fraction(1, 2) * total_derivative(q, 3)
        + _U * total_derivative(q)
        + total_derivative(_U * q)
    )
    return tp, tq
