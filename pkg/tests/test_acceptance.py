"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or as a script with
``python tests/test_acceptance.py``.
"""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from critgen import verify as V
from critgen.gadgets import Instance, big_n, build_g, build_instance, clique_to_critical_point, family_dimension
from critgen.graphkit import CliqueInstance, Graph, has_k_clique, planted_clique, random_graph
from critgen.polycore import fd_check_gradient
from critgen.solvers import SolverConfig, min_grad_norm, minimize

RESULTS: dict = {}


def record(number: int, ok: bool, summary: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {summary}"
    RESULTS[number] = line
    print(line)


def _no_clique_instances(count: int, m_range, seed: int, p_choices=(0.3, 0.5, 0.7)):
    """Random graphs paired with k = clique number + 1, so no k-clique exists."""
    rng = np.random.default_rng(seed)
    out = []
    s = 0
    while len(out) < count:
        m = int(rng.integers(m_range[0], m_range[1] + 1))
        g = random_graph(m, float(rng.choice(p_choices)), seed * 1000 + s)
        s += 1
        omega = max(k for k in range(1, m + 1) if has_k_clique(CliqueInstance(g, k)) is not None)
        if omega < m:
            out.append(CliqueInstance(g, omega + 1))
    return out


@pytest.fixture(scope="module")
def sweep_data():
    """Corner sweeps of 200 random graphs (m <= 12) for every k <= m, C = 1."""
    rng = np.random.default_rng(2024)
    reports = []
    for i in range(200):
        m = int(rng.integers(2, 13))
        p = float(rng.choice([0.3, 0.5, 0.8]))
        g = random_graph(m, p, i)
        for k in range(1, m + 1):
            ci = CliqueInstance(g, k)
            reports.append((ci, V.corner_sweep(ci, 1)))
    # the canonical cubic constant on a subset: huge exact integers
    canonical = []
    for ci, _ in reports[::40]:
        C = build_instance(ci, "cubic").params.C
        canonical.append((ci, C, V.corner_sweep(ci, C)))
    return reports, canonical


def test_criterion_01_clique_iff_zero(sweep_data):
    reports, canonical = sweep_data
    bad = 0
    for ci, rep in reports:
        oracle = has_k_clique(ci) is not None
        if (rep.details["min_value"] == 0) != oracle:
            bad += 1
    for ci, C, rep in canonical:
        if (rep.details["min_value"] == 0) != (has_k_clique(ci) is not None):
            bad += 1
    with_clique = sum(1 for ci, rep in reports if rep.details["min_value"] == 0)
    ok = bad == 0
    record(1, ok, f"{len(reports)} sweeps over 200 graphs (+{len(canonical)} canonical C), "
                  f"{with_clique} with a k-clique, {bad} mismatches with the oracle")
    assert ok


def test_criterion_02_corner_floor(sweep_data):
    reports, canonical = sweep_data
    violations = 0
    worst = None
    for ci, rep in reports:
        if any("below" in p for p in rep.details["problems"]):
            violations += 1
        if rep.worst_margin is not None:
            ratio = (rep.worst_margin + rep.details["floor"]) / rep.details["floor"]
            worst = ratio if worst is None else min(worst, ratio)
    for ci, C, rep in canonical:
        if any("below" in p for p in rep.details["problems"]):
            violations += 1
    ok = violations == 0
    record(2, ok, f"every nonzero corner value >= C^2/(m^2+1)^2 exactly; {violations} violations, "
                  f"smallest value/floor ratio {float(worst):.1f}")
    assert ok


def test_criterion_03_witness_criticality(sweep_data):
    reports, _ = sweep_data
    families = ("cubic", "quartic", "exp-gadget", "sos-exp")
    checked = failures = 0
    for ci, rep in reports:
        clique = has_k_clique(ci)
        if clique is None:
            continue
        for fam in families:
            inst = build_instance(ci, fam)
            cert = V.certify_critical(inst, clique_to_critical_point(ci, clique, fam))
            checked += 1
            if not (cert.exact and cert.exact_zero):
                failures += 1
    ok = failures == 0 and checked > 0
    record(3, ok, f"{checked} witness points across {', '.join(families)}; {failures} with nonzero exact gradient")
    assert ok


def test_criterion_04_gradient_fidelity():
    rng = np.random.default_rng(4)
    worst = {"cubic": 0.0, "quartic": 0.0}
    for fam in worst:
        for i in range(100):
            m = 3 + i % 6
            ci = CliqueInstance(random_graph(m, 0.5, 400 + i), 1 + i % m)
            inst = build_instance(ci, fam, "unit")
            pt = rng.uniform(-2, 2, size=inst.n)
            worst[fam] = max(worst[fam], fd_check_gradient(inst.function, pt, h=1e-5))
    ok = all(v <= 1e-6 for v in worst.values())
    record(4, ok, f"100 points per family, m in 3..8, h=1e-5: worst relative error cubic {worst['cubic']:.2e}, "
                  f"quartic {worst['quartic']:.2e} (tolerance 1e-6)")
    assert ok


@pytest.fixture(scope="module")
def no_clique_8():
    return _no_clique_instances(20, (3, 8), seed=5)


def test_criterion_05_rounding_bound(no_clique_8):
    total = violations = 0
    worst = None
    for idx, ci in enumerate(no_clique_8):
        for eps in (Fraction(1, 100), Fraction(1, 10), Fraction(1, 2)):
            rep = V.check_rounding_bound(ci, 1, eps, num_samples=10_000, seed=idx)
            total += rep.samples_tested
            violations += rep.status != V.PASS
            scaled = rep.worst_margin / (48 * ci.m**2 * eps)
            worst = scaled if worst is None else min(worst, scaled)
    ok = violations == 0
    record(5, ok, f"{total} exact samples over 20 no-clique instances x eps in {{0.01, 0.1, 0.5}}; "
                  f"{violations} failing runs; min margin / (48 C^2 m^2 eps) = {float(worst):.3f}")
    assert ok


def test_criterion_06_lipschitz(no_clique_8):
    total = violations = 0
    ratio = 0.0
    for idx, ci in enumerate(no_clique_8):
        for eps in (Fraction(1, 10), Fraction(1, 2)):
            rep = V.check_lipschitz(ci, 1, eps, num_pairs=10_000, seed=idx)
            total += rep.samples_tested
            violations += rep.status != V.PASS
            ratio = max(ratio, rep.details["max_ratio"])
    ok = violations == 0
    record(6, ok, f"{total} exact pairs over 20 instances x eps in {{0.1, 0.5}}; {violations} failing runs; "
                  f"max |dg| / (L |dx|) = {ratio:.3f}")
    assert ok


def test_criterion_07_fujiwara():
    lo, hi = V.outermost_nonnegative_point((1, 1, 1, 1))
    u = V.fujiwara_bound(1, 1, 1, 1)
    concrete = abs(float(hi) - 1.8393) < 1e-4 and u == 2 and hi <= 2
    rep = V.check_root_bound(num_samples=1000, seed=7)
    ok = concrete and rep.passed
    record(7, ok, f"alpha=(1,1,1,1): root {float(hi):.6f} <= u = {u:g}; 1000 random quadruples "
                  f"{rep.status}, min relative slack (u - r)/u = {rep.worst_margin:.4f}")
    assert ok


def test_criterion_08_grad_norm_floor(p3):
    cfg = SolverConfig(restarts=1000, max_iters=300, seed=8)
    lines = []
    inst = build_instance(p3, "cubic", "unit")
    rec = min_grad_norm(inst, cfg)
    fb = V.grad_floor(p3, 1)
    ok = fb.respected_by(rec.best_grad_norm) and math.isclose(fb.value, math.sqrt(3) / 20)
    lines.append(f"P3: best |grad p| {rec.best_grad_norm:.4f} vs floor {fb.value:.4f}")
    worst_ratio = math.inf
    for ci in _no_clique_instances(10, (3, 6), seed=8):
        inst = build_instance(ci, "cubic", "unit")
        rec = min_grad_norm(inst, cfg)
        fb = V.grad_floor(ci, 1)
        ok &= fb.respected_by(rec.best_grad_norm)
        worst_ratio = min(worst_ratio, rec.best_grad_norm / fb.value)
    lines.append(f"10 random no-clique instances (m <= 6): min observed/floor = {worst_ratio:.2f}")
    record(8, ok, "1000 restarts each; " + "; ".join(lines))
    assert ok


def test_criterion_09_minimizer_box():
    instances = _no_clique_instances(10, (3, 6), seed=9)
    statuses = []
    near_unit = []
    worst = None
    for i, ci in enumerate(instances):
        rec = minimize(build_g(ci, 1), SolverConfig(restarts=100, max_iters=400, polish_dps=60, seed=i))
        rep = V.check_minimizer_box(ci, 1, rec.best_point, grad_tol=1e-8, slack=Fraction(1, 10**6))
        statuses.append(rep.status)
        if rep.worst_margin is not None:
            worst = rep.worst_margin if worst is None else min(worst, rep.worst_margin)
        refined = V.check_minimizer_box(ci, 1, rec.best_point, near_unit=True, near_unit_slack=Fraction(1, 10**6))
        near_unit.append(refined.details["near_unit_margin"] >= 0)
    ok = all(s == V.PASS for s in statuses)
    record(9, ok, f"10 no-clique instances (m <= 6), exact |grad g| <= 1e-8 after polishing; "
                  f"box statuses {statuses.count(V.PASS)}/10 pass; min distance inside [0.3, 2.1] = {float(worst if worst is not None else math.nan):.4f}; "
                  f"refined |x^2-1| bound held on {sum(near_unit)}/10")
    assert ok


def test_criterion_10_near_decoding():
    rng = np.random.default_rng(10)
    summary = []
    ok = True
    for fam in ("cubic", "exp-gadget"):
        successes = trials = 0
        for i in range(100):
            m = int(rng.integers(3, 11))
            k = int(rng.integers(2, m + 1))
            g, planted = planted_clique(m, k, 1000 + i)
            ci = CliqueInstance(g, k)
            inst = build_instance(ci, fam, "unit" if fam == "cubic" else None)
            pt = clique_to_critical_point(ci, planted, fam)
            alpha = V.near_radius(fam, inst.n)
            for _ in range(10):
                noisy = V.perturb(pt, alpha, rng)
                res = V.near_decode(inst, noisy, alpha)
                successes += res.success and res.clique == planted
                trials += 1
        ok &= successes == trials
        summary.append(f"{fam} {successes}/{trials}")
    record(10, ok, "100 planted instances (m <= 10) x 10 perturbations of norm alpha; recovered " + ", ".join(summary))
    assert ok


def test_criterion_11_canonical_constants():
    checked = 0
    ok = True
    for m in range(1, 9):
        for seed in range(2):
            ci = CliqueInstance(random_graph(m, 0.5, seed), max(1, m // 2))
            n_full = m + (m + 1) + m * (m - 1) // 2
            expected = {"cubic": 2 ** (n_full + 1) * (m * m + 1), "quartic": 2 ** (n_full + 2) * (m * m + 1),
                        "exp-gadget": 1, "sos-exp": 1}
            for fam, C in expected.items():
                inst = build_instance(ci, fam)
                p = inst.params
                ok &= p.C == C and p.C.denominator == 1 and p.N == 160 * m * m * (m * m + 1) == big_n(m)
                ok &= p.n == family_dimension(fam, m)
                text = inst.to_json()
                obj = json.loads(text)
                ok &= obj["C"] == f"{C}/1" and obj["N"] == 160 * m * m * (m * m + 1)
                back = Instance.from_json(text)
                ok &= back.to_json() == text and back.function == inst.function if fam in ("cubic", "quartic") \
                    else back.to_json() == text
                checked += 1
    ok &= build_instance(CliqueInstance(Graph.path(3), 3), "cubic").params.C == 20480
    record(11, ok, f"{checked} instances: bit-exact C and N = 160 m^2 (m^2+1), byte-identical JSON round trips")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
