import json
import math
from fractions import Fraction

import numpy as np
import pytest

from critgen import verify as V
from critgen.gadgets import big_n, build_cubic, build_exp_g, build_g, build_quartic, clique_to_critical_point
from critgen.graphkit import CliqueInstance, Graph, planted_clique
from critgen.solvers import SolverConfig, minimize


def test_corner_sweep_examples(k3, p3):
    r = V.corner_sweep(k3)
    assert r.passed and r.details["min_value"] == 0 and r.details["argmins"] == [(1, 1, 1)]
    r = V.corner_sweep(p3)
    assert r.passed and r.details["min_value"] == 4 and r.details["floor"] == Fraction(1, 100)
    assert r.worst_margin == 4 - Fraction(1, 100)
    r = V.corner_sweep(CliqueInstance(Graph.complete(3), 2))
    assert r.details["min_value"] == 0
    assert sorted(r.details["argmins"]) == [(-1, 1, 1), (1, -1, 1), (1, 1, -1)]


def test_corner_sweep_limit():
    with pytest.raises(ValueError, match="limit"):
        V.corner_sweep(CliqueInstance(Graph.path(21), 2))
    assert V.corner_sweep(CliqueInstance(Graph.path(5), 2), limit=5).passed


def test_corner_sweep_petersen(petersen_triangle):
    r = V.corner_sweep(petersen_triangle, C=Fraction(7, 3))
    assert r.passed and r.details["min_value"] > 0
    assert r.details["zero_corners"] == 0


def test_corner_sweep_canonical_constant(p3):
    C = build_cubic(p3).params.C
    r = V.corner_sweep(p3, C)
    assert r.passed and r.details["min_value"] == 4 * C * C


def test_floor_identities():
    for m in range(1, 9):
        assert V.robust_floor(m) == V.corner_floor(m) * Fraction(19, 25)
        assert V.robust_floor(m) >= V.corner_floor(m) * Fraction(3, 4)
    assert 48 * Fraction(5, 1000) <= Fraction(1, 4)


def test_rounding_bound_corners_have_exact_margin(p3):
    eps = Fraction(1, 10)
    for s in [(1, 1, 1), (-1, 1, -1)]:
        assert V.rounding_margin(p3, 1, eps, s) == 48 * 9 * eps


def test_rounding_bound_sampled(p3):
    r = V.check_rounding_bound(p3, 1, Fraction(1, 100), num_samples=2000, seed=3)
    assert r.passed and r.samples_tested == 2000 and r.worst_margin >= 0
    r0 = V.check_rounding_bound(p3, 1, 0, num_samples=50)
    assert r0.passed and r0.worst_margin == 0


def test_rounding_bound_rejects_eps(p3):
    for eps in (-Fraction(1, 10), Fraction(3, 2)):
        with pytest.raises(ValueError):
            V.check_rounding_bound(p3, 1, eps, num_samples=10)


def test_sampling_is_worker_independent(p3):
    a = V.check_rounding_bound(p3, 1, Fraction(1, 2), num_samples=600, seed=9, batch=200, workers=1)
    b = V.check_rounding_bound(p3, 1, Fraction(1, 2), num_samples=600, seed=9, batch=200, workers=2)
    assert a.to_json() == b.to_json()


def test_lipschitz_examples(p3):
    N = big_n(3)
    assert N == 14400
    assert V.lipschitz_constant(3, 1, Fraction(1, 2)) == 576 + 36 * N * N
    r = V.check_lipschitz(p3, 1, Fraction(1, 2), num_pairs=0, pairs=[((0, 0, 0), (0, 0, 0))])
    assert r.passed and r.worst_margin == 0
    r = V.check_lipschitz(p3, 1, Fraction(1, 10), num_pairs=2000, seed=1)
    assert r.passed and r.details["max_ratio"] <= 1
    for eps in (0, 1, Fraction(3, 2)):
        with pytest.raises(ValueError):
            V.check_lipschitz(p3, 1, eps, num_pairs=1)


def test_lipschitz_detects_a_too_small_constant(p3, monkeypatch):
    monkeypatch.setattr(V, "lipschitz_constant", lambda m, C, eps: Fraction(1, 10**6))
    r = V.check_lipschitz(p3, 1, Fraction(1, 2), num_pairs=200, seed=0)
    assert r.status == V.FAIL and r.witness is not None


def test_fujiwara_examples():
    assert V.fujiwara_bound(1, 1, 1, 1) == 2
    assert V.fujiwara_bound(2, 1, 1, 1) == 2
    lo, hi = V.outermost_nonnegative_point((1, 1, 1, 1))
    assert abs(float(hi) - 1.8392867552) < 1e-9 and hi <= 2
    assert V.check_root_bound([(1, 1, 1, 1), (2, 1, 1, 1)]).passed
    with pytest.raises(ValueError):
        V.fujiwara_bound(0, 1, 1, 1)
    with pytest.raises(ValueError):
        V.check_root_bound([(1, -1, 1, 1)])


def test_root_bound_random():
    r = V.check_root_bound(num_samples=100, seed=5)
    assert r.passed and r.samples_tested == 100 and r.worst_margin >= 0


@pytest.mark.parametrize("m", [1, 2, 3, 10, 50])
def test_fonc_cubic_middle_term_dominates(m):
    assert V.middle_term_dominates(m)
    assert V.middle_term_dominates(m, halve_constant=True)
    t1, t2_sq, _ = V.stationary_root_terms(m)
    # the bound 2 * sqrt(t2_sq) is just above 2, well inside the 2.1 box
    assert 4 * t2_sq < Fraction(21, 10) ** 2


def test_certify_critical_examples(k3):
    inst = build_cubic(k3)
    pt = list(clique_to_critical_point(k3, {1, 2, 3}, "cubic"))
    assert V.certify_critical(inst, pt).exact_zero
    pt[0] += Fraction(1, 1000)
    cert = V.certify_critical(inst, pt)
    assert cert.exact and not cert.exact_zero and cert.residual > 0
    exp_inst = build_exp_g(k3)
    assert V.certify_critical(exp_inst, (1, 1, 1, 5)).exact_zero
    floating = V.certify_critical(build_cubic(k3, "unit"), [1.0, 1.0, 1.0] + [0.0] * 7)
    assert not floating.exact and floating.residual == 0
    with pytest.raises(ValueError):
        V.certify_critical(inst, [0] * 3)


def test_near_decode_examples(k3, p3):
    inst = build_cubic(k3, "unit")
    pt = clique_to_critical_point(k3, {1, 2, 3}, "cubic")
    res = V.near_decode(inst, pt)
    assert res.success and res.clique == {1, 2, 3}
    alpha = V.near_radius("cubic", 10)
    assert math.isclose(alpha, 1 / (12000 * 10**3.5))
    noisy = V.perturb(pt, alpha, np.random.default_rng(0))
    assert math.isclose(np.linalg.norm(noisy - np.array(pt, dtype=float)), alpha, rel_tol=1e-6)
    assert V.near_decode(inst, noisy).clique == {1, 2, 3}
    res = V.near_decode(build_cubic(p3, "unit"), [0.0] * 10)
    assert not res.success and res.clique is None
    assert V.near_radius("exp-gadget", 4) == 1 / (1000 * 4**7)
    with pytest.raises(ValueError):
        V.near_radius("quartic", 4)


def test_grad_floor_examples(p3, k3):
    fb = V.grad_floor(p3, 1)
    assert fb.exact == Fraction(3, 400)
    assert math.isclose(fb.value, math.sqrt(3) / 20)
    cubic = build_cubic(p3)
    fb = V.grad_floor(p3, cubic.params.C)
    assert fb.exceeds(2**10) and fb.exceeds(2**cubic.n)
    quartic = build_quartic(p3)
    fq = V.grad_floor(p3, quartic.params.C, "quartic")
    assert fq.minus == 2**quartic.n and fq.exceeds(2**quartic.n)
    with pytest.raises(ValueError):
        V.grad_floor(k3, 1)


def test_floor_bound_exact_comparisons():
    fb = V.FloorBound("grad-floor", Fraction(3, 400), squared=True)
    assert fb.respected_by(0.0867) and not fb.respected_by(0.0866)
    assert fb.exceeds(Fraction(866, 10000)) and not fb.exceeds(Fraction(867, 10000))


def test_minimizer_box_examples(p3):
    assert V.check_minimizer_box(p3, 1, (1, -1, 1)).passed
    bad = V.check_minimizer_box(p3, 1, (0, 1, 1))
    assert bad.status == V.FAIL and bad.witness == (0, 1, 1)
    assert V.check_minimizer_box(p3, 1, (0.5, 1.0, 1.0), grad_tol=1e-8).status == V.INCONCLUSIVE
    rec = minimize(build_g(p3, 1), SolverConfig(restarts=30, max_iters=500, polish_dps=60, seed=1))
    r = V.check_minimizer_box(p3, 1, rec.best_point, grad_tol=1e-8, near_unit=True)
    assert r.passed, r.details


def test_report_invariants_and_json():
    with pytest.raises(ValueError):
        V.VerificationReport("x", V.FAIL, 1)
    with pytest.raises(ValueError):
        V.VerificationReport("x", "maybe", 1)
    r = V.VerificationReport("x", V.INCONCLUSIVE, 3, Fraction(-1, 3), (Fraction(1, 2),))
    obj = json.loads(r.to_json())
    assert obj["worst_margin"] == "-1/3" and obj["witness"] == ["1/2"]
    assert r.exit_code == 2 and not r.passed


@pytest.mark.parametrize("seed", range(3))
def test_planted_witness_decodes_under_exp_radius(seed):
    g, planted = planted_clique(6, 3, seed)
    ci = CliqueInstance(g, 3)
    inst = build_exp_g(ci)
    pt = clique_to_critical_point(ci, planted, "exp-gadget")
    noisy = V.perturb(pt, V.near_radius("exp-gadget", inst.n), np.random.default_rng(seed))
    assert V.near_decode(inst, noisy).clique == planted
