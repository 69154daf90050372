"""Recursion-operator identities and the classical two-component hierarchy."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from nullflow.diffalg import (
    DiffPoly,
    FlowPair,
    NotExact,
    anti_derivative,
    const,
    euler_operator,
    gen,
    lie_bracket_flows,
    param,
    zero,
)
from nullflow.expr import parse_expr, parse_flow
from nullflow.operators import (
    a_matrix_apply,
    b_matrix_apply,
    hs_classic_sigma,
    j_matrix_apply,
    omega_apply,
    recursion_curvature,
    s_apply,
    theta_apply,
    theta_matrix_apply,
)

K1 = gen("k1")
K2 = gen("k2")


def test_omega_known_values():
    assert omega_apply(gen("k1", 1)) == parse_expr("k1''/a + 3/2*k1^2")
    got = omega_apply(zero(), (param("c1"), const(2)))
    assert got == parse_expr("c1*k1 + 2")


def test_theta_and_s_known_values():
    assert theta_apply(param("b")) == param("b") * gen("k1", 1)
    assert theta_apply(K1) == parse_expr("k1'''/a + 3*k1*k1'")
    assert s_apply(K2) == 3 * K2 * gen("k2", 1)
    assert s_apply(param("b")) == param("b") * gen("k2", 1)


def test_theta_matrix_reproduces_seed_flows():
    ab = param("a") * param("b")
    translation = theta_matrix_apply((ab, zero()))
    assert translation == parse_flow("b*k1', b*k2'")

    p = param("a", 2) * param("c") * K1
    q = 2 * param("eps1") * param("eps2") * param("a", 2) * param("c") * K2
    third_order = theta_matrix_apply((p, q))
    assert third_order == parse_flow(
        "c*(k1''' + 3*a*k1*k1' + 6*eps1*eps2*a*k2*k2'),"
        " -c*(2*k2''' + 3*a*k1*k2')"
    )


def test_j_matrix_constant_seed():
    c1 = -2 * param("eps1") * param("a", 2) * param("c")
    j1, j2 = j_matrix_apply((zero(), zero()), (c1, 0))
    assert j1 == parse_expr("a^2*c*k1")
    assert j2 == parse_expr("2*eps1*eps2*a^2*c*k2")


def test_a_matrix_constant_seed():
    pp = a_matrix_apply(zero(), zero(), (param("c1"), param("c2")))
    assert pp.phi == parse_expr("-eps1*c1*k1/2 + a*c2")
    assert pp.psi == parse_expr("eps2*c1*k2")


def test_not_exact_aborts():
    with pytest.raises(NotExact):
        omega_apply(K2 * K2)
    with pytest.raises(NotExact):
        j_matrix_apply((K2 * K2, zero()))
    with pytest.raises(NotExact):
        a_matrix_apply(K1 * gen("k1", 2), zero())


def _random_admissible_pair(rng: random.Random) -> tuple[DiffPoly, DiffPoly]:
    """Random (h, l) with h and k1*h - k2*l both exact."""
    h = zero()
    l = zero()
    for _ in range(rng.randrange(1, 4)):
        w = const(rng.choice([1, -1, 2, Fraction(1, 2)]))
        kind = rng.randrange(5)
        if kind == 0:
            x = sum((rng.randrange(-2, 3)) * K1**d for d in range(2 + 1))
            h = h + w * x * gen("k1", 1)
        elif kind == 1:
            y = sum((rng.randrange(-2, 3)) * K2**d for d in range(2 + 1))
            l = l + w * y * gen("k2", 1)
        elif kind == 2:
            h = h + w * K2 * gen("k2", 1)
            l = l + w * K1 * gen("k2", 1)
        elif kind == 3:
            h = h + w * gen("k1", rng.choice([1, 3]))
        else:
            l = l + w * gen("k2", rng.choice([1, 3]))
    return h, l


def test_factored_routes_agree():
    # The b(a(h,l)) route and the recursion route must agree exactly,
    # including the integration-constant plumbing.
    rng = random.Random(211)
    eps12 = param("eps1") * param("eps2")
    for _ in range(25):
        h, l = _random_admissible_pair(rng)
        constants = (
            rng.choice([const(0), param("c1"), 2 * param("c1")]),
            rng.choice([const(0), param("c2")]),
        )
        via_projections = b_matrix_apply(a_matrix_apply(h, l, constants))
        via_recursion = recursion_curvature((2 * h, -eps12 * l), constants)
        assert via_projections == via_recursion


def test_theta_and_s_are_skew():
    rng = random.Random(223)
    for _ in range(12):
        f = sum(
            rng.randrange(-2, 3) * gen(v, o)
            for v in ("k1", "k2")
            for o in range(3)
        ) + const(rng.randrange(-1, 2)) * K1 * K2
        g = K1 * gen("k2", 1) + rng.randrange(-2, 3) * gen("k1", 2)
        for op in (theta_apply, s_apply):
            combo = f * op(g) + g * op(f)
            assert euler_operator(combo, "k1").is_zero()
            assert euler_operator(combo, "k2").is_zero()


def test_classic_seed_flows():
    sigma0 = hs_classic_sigma(0)
    assert sigma0 == parse_flow("u', v'", ("u", "v"))
    sigma1 = hs_classic_sigma(1)
    assert sigma1 == parse_flow(
        "u'''/2 + 3*u*u' - 6*v*v', -v''' - 3*u*v'", ("u", "v")
    )


def test_classic_first_recursion_is_known():
    x, y = hs_classic_sigma(0).components()
    from nullflow.operators import _hs_j_apply

    jx, jy = _hs_j_apply(x, y)
    assert jx == parse_expr("u''/2 + 3/2*u^2 - v^2", ("u", "v"))
    assert jy == parse_expr("-2*u*v - 2*v''", ("u", "v"))


def test_classic_flows_commute():
    flows = [hs_classic_sigma(n) for n in range(4)]
    assert lie_bracket_flows(flows[0], flows[1]).is_zero()
    assert lie_bracket_flows(flows[1], flows[2]).is_zero()
    assert lie_bracket_flows(flows[1], flows[3]).is_zero()
    assert lie_bracket_flows(flows[0], flows[3]).is_zero()
