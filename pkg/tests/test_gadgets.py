from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from critgen.gadgets import (
    Instance,
    big_n,
    build_cubic,
    build_exp_g,
    build_exp_of_poly,
    build_g,
    build_instance,
    build_q,
    build_quartic,
    build_sos_exp,
    build_sos_exp_instance,
    clique_to_critical_point,
    family_dimension,
    resolve_constant,
)
from critgen.graphkit import CliqueInstance, Graph, has_k_clique, planted_clique, random_graph
from critgen.polycore import ExpTimesPoly, Polynomial, eval_exp_gradient
from critgen.verify import certify_critical


def _sum_sq(polys):
    total = Polynomial.zero(polys[0].nvars)
    for p in polys:
        total = total + p * p
    return total


def test_g_examples(k3, p3):
    assert build_g(k3, 1).eval([1, 1, 1]) == 0
    g = build_g(p3, 1)
    assert g.eval([1, 1, 1]) == 16
    values = {s: g.eval(list(s)) for s in product((-1, 1), repeat=3)}
    low = min(values.values())
    assert low == 4
    assert sorted(s for s, v in values.items() if v == low) == [(-1, 1, 1), (1, 1, -1)]


def test_g_rejects_zero_constant(p3):
    with pytest.raises(ValueError):
        build_g(p3, 0)


@pytest.mark.parametrize("seed", range(4))
def test_g_equals_scaled_residual_norm(seed):
    ci = CliqueInstance(random_graph(5, 0.5, seed), 3)
    C = Fraction(3, 2)
    assert _sum_sq(build_q(ci)) * (C * C) == build_g(ci, C)


def test_q_shape(k3):
    assert len(build_q(CliqueInstance(Graph.path(4), 2))) == 11
    assert all(q.eval([1, 1, 1]) == 0 for q in build_q(k3))


def test_g_partials_closed_form():
    # dg/dx_i = 2 s + 4 N^2 x_i (x_i^2 - 1) + 2 sum_{j != i} (1 - A_ij)(x_i + 1)(x_j + 1)^2
    ci = CliqueInstance(Graph.path(4), 2)
    m, k, N = 4, 2, big_n(4)
    g = build_g(ci, 1)
    x = Polynomial.variables(m)
    one = Polynomial.constant(1, m)
    s = sum(x, Polynomial.zero(m)) - (2 * k - m)
    for i in range(m):
        ref = s * 2 + x[i] * (x[i] * x[i] - one) * (4 * N * N)
        for j in range(m):
            if j != i and not ci.graph.adjacent(i + 1, j + 1):
                ref = ref + (x[i] + one) * (x[j] + one) ** 2 * 2
        assert g.diff(i) == ref
        # second partial: 2 + 4N^2 (3 x_i^2 - 1) + 2 sum (1 - A_ij)(x_j + 1)^2
        h = Polynomial.constant(2, m) + (x[i] * x[i] * 3 - one) * (4 * N * N)
        for j in range(m):
            if j != i and not ci.graph.adjacent(i + 1, j + 1):
                h = h + (x[j] + one) ** 2 * 2
        assert g.hessian_diagonal()[i] == h


def test_cubic_dimension_and_constant(k3):
    inst = build_cubic(k3)
    assert inst.n == 10 and family_dimension("cubic", 3) == 10
    assert inst.params.C == 20480 == 2**11 * 10
    assert inst.params.N == 14400


def test_cubic_y_partials(k3):
    inst = build_cubic(k3, "unit")
    p, m, N = inst.function, 3, big_n(3)
    grads = p.gradient()
    xs = Polynomial.variables(10)[:m]
    one = Polynomial.constant(1, 10)
    assert grads[m] == sum(xs, Polynomial.zero(10)) - 3
    for i in range(m):
        assert grads[m + 1 + i] == (xs[i] * xs[i] - one) * N
    # every pair of K3 is an edge, so the z-variables are dead
    assert all(g.is_zero() for g in grads[2 * m + 1:])


def test_cubic_grad_norm_dominates_g():
    ci = CliqueInstance(Graph.path(4), 3)
    inst = build_cubic(ci, "custom", C=Fraction(5, 3))
    g = build_g(ci, Fraction(5, 3))
    rng = np.random.default_rng(0)
    h = inst.grad_norm_sq
    for _ in range(20):
        pt = [Fraction(int(v), 64) for v in rng.integers(-128, 129, size=inst.n)]
        assert h.eval(pt) >= g.eval(pt[:4])


def test_quartic_properties():
    ci = CliqueInstance(Graph.path(3), 2)
    inst = build_quartic(ci, "unit")
    assert inst.n == 3 + 4 + 3
    assert inst.params.C == 1
    assert build_quartic(ci).params.C == 2**12 * 10
    p = inst.function
    m = 3
    qs = [q.with_nvars(inst.n) for q in build_q(ci)]
    ws = Polynomial.variables(inst.n)[m:]
    resid = [w + q for w, q in zip(ws, qs)]
    rng = np.random.default_rng(1)
    for _ in range(20):
        pt = [Fraction(int(v), 16) for v in rng.integers(-40, 41, size=inst.n)]
        assert p.eval(pt) >= 0
        grad_sq = sum((d.eval(pt) ** 2 for d in p.gradient()), Fraction(0))
        assert grad_sq >= sum((r.eval(pt) ** 2 for r in resid), Fraction(0))


def test_exp_g(k3):
    inst = build_exp_g(k3)
    assert inst.n == 4 and isinstance(inst.function, ExpTimesPoly)
    assert inst.function.w_index == 3
    assert np.all(eval_exp_gradient(inst.function, (1.0, 1.0, 1.0, 0.0)) == 0)
    rng = np.random.default_rng(2)
    for _ in range(10):
        assert inst.function.value(rng.uniform(-2, 2, 4)) >= 0


def test_exp_of_poly():
    x = Polynomial.variable(0, 1)
    f = build_exp_of_poly(x * x)
    assert np.all(eval_exp_gradient(f, [0.0]) == 0)
    assert eval_exp_gradient(f, [0.5])[0] != 0
    assert f.value([3.0]) > 0


def test_sos_exp_builders():
    x = Polynomial.variable(0, 1)
    f = build_sos_exp([x - 1])
    assert f.nvars == 2 and f.w_index == 1
    assert certify_critical(f, (1, 7)).exact_zero
    assert not certify_critical(f, (2, 0)).exact_zero
    empty = build_sos_exp([], nvars=2)
    assert empty.base.is_zero()
    assert certify_critical(empty, (3, -1, 5)).exact_zero
    with pytest.raises(ValueError):
        build_sos_exp([x * x * x])


@pytest.mark.parametrize("seed", range(3))
def test_sos_exp_critical_points_decode_to_clique(seed):
    g, planted = planted_clique(6, 3, seed)
    ci = CliqueInstance(g, 3)
    inst = build_sos_exp_instance(ci)
    pt = clique_to_critical_point(ci, planted, "sos-exp")
    assert certify_critical(inst, pt).exact_zero
    assert inst.function.base.eval(pt) == 0


def test_witness_points(k3):
    inst = build_cubic(k3, "unit")
    pt = clique_to_critical_point(k3, {1, 2, 3}, "cubic")
    assert pt == (1, 1, 1) + (0,) * 7
    assert certify_critical(inst, pt).exact_zero
    k3_2 = CliqueInstance(Graph.complete(3), 2)
    pt = clique_to_critical_point(k3_2, {1, 2}, "cubic")
    assert pt[:3] == (1, 1, -1)
    assert certify_critical(build_cubic(k3_2), pt).exact_zero
    with pytest.raises(ValueError):
        clique_to_critical_point(CliqueInstance(Graph.path(3), 3), {1, 2, 3}, "cubic")


@pytest.mark.parametrize("seed", range(4))
def test_planted_quartic_witness(seed):
    g, planted = planted_clique(8, 3, seed)
    ci = CliqueInstance(g, 3)
    pt = clique_to_critical_point(ci, planted, "quartic")
    assert certify_critical(build_quartic(ci), pt).exact_zero


def test_constant_modes():
    assert resolve_constant("cubic", 3, "power-d", d=2) == 100 * 10
    assert resolve_constant("exp-gadget", 3, "power-d", d=1) == 4 * 10
    assert resolve_constant("cubic", 3, "custom", C="7/2") == Fraction(7, 2)
    with pytest.raises(ValueError):
        resolve_constant("cubic", 3, "power-d")
    with pytest.raises(ValueError):
        resolve_constant("cubic", 3, "custom")
    with pytest.raises(ValueError):
        resolve_constant("cubic", 3, "bogus")
    with pytest.raises(ValueError):
        build_instance(CliqueInstance(Graph.path(3), 2), "exp-gadget", "power-d", d=2)


def test_cubic_coefficient_sizes():
    ci = CliqueInstance(Graph.path(5), 3)
    inst = build_cubic(ci)
    n = inst.n
    p = inst.function
    assert len(p) <= 4 * n * n
    for _, c in p.items():
        assert c.denominator == 1
        assert abs(c.numerator).bit_length() <= 2 * n + 64


@given(st.sampled_from(["gadget", "cubic", "quartic", "exp-gadget", "exp-poly", "sos-exp"]),
       st.integers(2, 5), st.integers(0, 10**6))
def test_instance_json_roundtrip(family, m, seed):
    ci = CliqueInstance(random_graph(m, 0.6, seed), 2)
    inst = build_instance(ci, family)
    text = inst.to_json()
    back = Instance.from_json(text)
    assert back.to_json() == text
    assert back.params == inst.params
    assert back.params.N == 160 * m * m * (m * m + 1)


@pytest.mark.parametrize("family", ["cubic", "quartic", "exp-gadget", "exp-poly", "sos-exp", "gadget"])
def test_every_family_witness_is_critical(family):
    for seed in range(3):
        g, planted = planted_clique(5, 3, seed)
        ci = CliqueInstance(g, 3)
        clique = has_k_clique(ci)
        inst = build_instance(ci, family)
        cert = certify_critical(inst, clique_to_critical_point(ci, clique, family))
        assert cert.exact and cert.exact_zero
