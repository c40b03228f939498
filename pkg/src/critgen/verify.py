"""Exact and sampled certification of the gadget's inequalities and decoding rules.

Sampled checks draw rational points that share one denominator per batch,
so every inequality is decided in exact integer arithmetic. Batches get
independent child seeds from one :class:`numpy.random.SeedSequence` and are
merged by taking the minimum margin (ties broken by batch index), which
makes the outcome independent of how many workers ran them.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import mpmath
import numpy as np

from critgen.gadgets import Instance, big_n, build_g, family_dimension
from critgen.graphkit import CliqueInstance, has_k_clique, iter_k_cliques, sign_decode, sign_to_support
from critgen.polycore import (
    CompiledSystem,
    ExpOfPoly,
    ExpTimesPoly,
    Polynomial,
    _coords,
    _exact_coord,
    _is_exact,
    fraction_str,
    gradient_at,
)
from critgen.rootiso import count_roots, cauchy_bound, isolate_real_roots, pderiv, peval, pgcd, pquo, refine_root, sturm_sequence

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
EXIT_CODES = {PASS: 0, FAIL: 1, INCONCLUSIVE: 2}

# |x_i^2 - 1| bound for minimizers of g is this constant over m^2 (m^2 + 1)^2
NEAR_UNIT_CONSTANT = Fraction(1, 200)


def frac_sqrt(v: Fraction) -> float:
    """Float square root of a nonnegative rational of any size."""
    r = mpmath.sqrt(mpmath.mpf(v.numerator) / v.denominator)
    return float(r) if r < mpmath.mpf(1e300) else math.inf


def exact_param(v) -> Fraction:
    """Read a user-facing parameter as an exact rational (floats by their decimal repr)."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(repr(v))
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(v)


def to_jsonable(obj):
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (frozenset, set)):
        return sorted(to_jsonable(v) for v in obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    return obj


@dataclass
class VerificationReport:
    check_name: str
    status: str
    samples_tested: int
    worst_margin: Fraction | float | None = None
    witness: object = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in EXIT_CODES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == FAIL and self.witness is None:
            raise ValueError("a failed report must carry a witness")

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_json_obj(self) -> dict:
        return to_jsonable({
            "check": self.check_name,
            "status": self.status,
            "passed": self.passed,
            "samples_tested": self.samples_tested,
            "worst_margin": self.worst_margin,
            "witness": self.witness,
            "details": self.details,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=1, sort_keys=True) + "\n"


@dataclass(frozen=True)
class FloorBound:
    """A proven lower bound ``sqrt(exact) - minus`` (or ``exact - minus`` when not squared)."""

    formula: str
    exact: Fraction
    squared: bool = False
    minus: Fraction = Fraction(0)

    @property
    def value(self) -> float:
        base = frac_sqrt(self.exact) if self.squared else float(self.exact)
        return base - float(self.minus)

    def exceeds(self, t) -> bool:
        """Exact test of ``floor > t``."""
        s = exact_param(t) + self.minus
        if not self.squared:
            return self.exact > s
        return s < 0 or self.exact > s * s

    def respected_by(self, observed: float) -> bool:
        """``observed >= floor``, decided exactly on the float's rational value."""
        s = Fraction(observed) + self.minus
        if not self.squared:
            return s >= self.exact
        return s >= 0 and s * s >= self.exact

    def to_json_obj(self) -> dict:
        return to_jsonable({"formula": self.formula, "exact": self.exact, "squared": self.squared,
                            "minus": self.minus, "value": self.value})


def corner_floor(m: int, C=1) -> Fraction:
    C = exact_param(C)
    return C * C / (m * m + 1) ** 2


def near_unit_epsilon(m: int) -> Fraction:
    return NEAR_UNIT_CONSTANT / (m * m * (m * m + 1) ** 2)


def robust_floor(m: int, C=1) -> Fraction:
    """Corner floor minus the rounding loss 48 C^2 m^2 eps at the minimizer's eps."""
    C = exact_param(C)
    return corner_floor(m, C) - 48 * C * C * m * m * near_unit_epsilon(m)


def lipschitz_constant(m: int, C, eps) -> Fraction:
    C, eps = exact_param(C), exact_param(eps)
    N = big_n(m)
    return 64 * C * C * m * m + 24 * C * C * m * N * N * eps


def _all_corners(m: int):
    return [list(s) for s in product((-1, 1), repeat=m)]


def corner_sweep(inst: CliqueInstance, C=1, limit: int = 20, chunk: int = 4096) -> VerificationReport:
    """Evaluate g exactly on all of {+-1}^m.

    Passes when (a) the minimum is zero exactly when the oracle finds a
    k-clique, (b) the zero corners are exactly the k-clique indicators and
    (c) every nonzero corner value is at least C^2 / (m^2 + 1)^2.
    """
    m = inst.m
    if m > limit:
        raise ValueError(f"m={m} exceeds the corner-sweep limit {limit}; raise the limit explicitly "
                         f"to sweep 2^{m} corners")
    C = exact_param(C)
    g = build_g(inst, C)
    system = CompiledSystem([g])
    floor = corner_floor(m, C)
    min_val, argmins, zeros = None, [], []
    worst, worst_corner, below = None, None, None
    total = 2**m
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk))
        bits = (idx[:, None] >> np.arange(m - 1, -1, -1)[None, :]) & 1
        corners = (2 * bits - 1).tolist()
        nums, den = system.evaluate_exact_scaled(corners, 1)
        for s, num in zip(corners, nums[:, 0]):
            v = Fraction(int(num), den)
            if min_val is None or v < min_val:
                min_val, argmins = v, [tuple(s)]
            elif v == min_val:
                argmins.append(tuple(s))
            if v == 0:
                zeros.append(tuple(s))
            else:
                margin = v - floor
                if worst is None or margin < worst:
                    worst, worst_corner = margin, tuple(s)
                if margin < 0 and below is None:
                    below = tuple(s)
    clique = has_k_clique(inst)
    cliques = {frozenset(c) for c in iter_k_cliques(inst.graph, inst.k)}
    zero_supports = {sign_to_support(s) for s in zeros}
    problems = []
    witness = argmins[0]
    if (min_val == 0) != (clique is not None):
        problems.append("minimum corner value is zero iff a k-clique exists: violated")
    if zero_supports != cliques:
        problems.append("zero corners differ from the k-clique indicators")
        witness = sorted(zero_supports ^ cliques, key=sorted)[0]
        witness = tuple(1 if i in witness else -1 for i in range(1, m + 1))
    if below is not None:
        problems.append("a non-clique corner falls below C^2/(m^2+1)^2")
        witness = below
    return VerificationReport(
        "corner-sweep", FAIL if problems else PASS, total, worst, witness,
        {"min_value": min_val, "argmins": argmins, "floor": floor, "clique": clique,
         "zero_corners": len(zeros), "k_cliques": len(cliques), "problems": problems,
         "m": m, "k": inst.k, "C": C},
    )


def _merge_batches(results) -> tuple:
    """Each batch yields (count, worst_margin, witness); keep the first minimum."""
    total, worst, witness = 0, None, None
    for count, margin, wit in results:
        total += count
        if margin is not None and (worst is None or margin < worst):
            worst, witness = margin, wit
    return total, worst, witness


def _run(fn, tasks, workers: int):
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, *zip(*tasks)))
    return [fn(*t) for t in tasks]


def _batch_plan(num: int, batch: int, seed: int) -> list:
    sizes = [batch] * (num // batch) + ([num % batch] if num % batch else [])
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    return list(zip(sizes, children))


def _isqrt_ceil(n: int) -> int:
    r = math.isqrt(n)
    return r if r * r == n else r + 1


def _magnitude_range(eps: Fraction, D: int) -> tuple:
    """Integers a with (1 - eps) D^2 <= a^2 <= (1 + eps) D^2."""
    p, q = eps.numerator, eps.denominator
    lo_t = (q - p) * D * D
    hi_t = (q + p) * D * D
    lo = _isqrt_ceil(-(-lo_t // q)) if lo_t > 0 else 0
    hi = math.isqrt(hi_t // q)
    return lo, hi


def _rounding_batch(inst, C, eps, size, seed_seq):
    rng = np.random.default_rng(seed_seq)
    m = inst.m
    D = int(rng.integers(2**12, 2**20))
    lo, hi = _magnitude_range(eps, D)
    if lo > hi or eps == 0:
        lo = hi = D
    kind = rng.random((size, m))
    mags = rng.integers(lo, hi + 1, size=(size, m))
    mags = np.where(kind < 0.15, lo, np.where(kind < 0.3, hi, np.where(kind < 0.35, D, mags)))
    signs = np.where(rng.random((size, m)) < 0.5, -1, 1)
    A = (signs * mags).tolist()
    for row in A:
        for a in row:
            assert abs(a * a - D * D) * eps.denominator <= eps.numerator * D * D
    S = [[1 if a >= 0 else -1 for a in row] for row in A]
    return _rounding_margins(inst, C, eps, A, D, S)


def _rounding_margins(inst, C, eps, A, D, S):
    m = inst.m
    system = CompiledSystem([build_g(inst, C)])
    gx, den_x = system.evaluate_exact_scaled(A, D)
    gs, den_s = system.evaluate_exact_scaled(S, 1)
    slack = 48 * C * C * m * m * eps
    worst, witness = None, None
    for row, a, b in zip(A, gx[:, 0], gs[:, 0]):
        margin = Fraction(int(a), den_x) - Fraction(int(b), den_s) + slack
        if worst is None or margin < worst:
            worst, witness = margin, [Fraction(v, D) for v in row]
    return len(A), worst, witness


def rounding_margin(inst: CliqueInstance, C, eps, point: Sequence) -> Fraction:
    """g(x) - g(sgn x) + 48 C^2 m^2 eps at one rational point."""
    C, eps = exact_param(C), exact_param(eps)
    A, D = _common(point)
    S = [[1 if v >= 0 else -1 for v in A[0]]]
    return _rounding_margins(inst, C, eps, A, D, S)[1]


def _common(point):
    from critgen.polycore import common_denominator_form
    return common_denominator_form([list(point)])


def check_rounding_bound(inst: CliqueInstance, C=1, eps=Fraction(1, 100), num_samples: int = 10_000,
                         seed: int = 0, batch: int = 1000, workers: int = 1) -> VerificationReport:
    """Sampled exact check of g(x) >= g(sgn x) - 48 C^2 m^2 eps when |x_i^2 - 1| <= eps.

    ``eps = 0`` is accepted as the degenerate case where only corners are
    feasible and the margin is exactly zero.
    """
    C, eps = exact_param(C), exact_param(eps)
    if not 0 <= eps <= 1:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    tasks = [(inst, C, eps, size, ss) for size, ss in _batch_plan(num_samples, batch, seed)]
    total, worst, witness = _merge_batches(_run(_rounding_batch, tasks, workers))
    status = PASS if worst is None or worst >= 0 else FAIL
    return VerificationReport("rounding-bound", status, total, worst, witness,
                              {"eps": eps, "C": C, "m": inst.m, "k": inst.k, "seed": seed})


def _lipschitz_batch(inst, C, eps, size, seed_seq):
    rng = np.random.default_rng(seed_seq)
    m = inst.m
    D = int(rng.integers(2**12, 2**20))
    B = (eps.denominator + eps.numerator) * D // eps.denominator
    X = rng.integers(-B, B + 1, size=(size, m))
    kind = rng.random(size)
    # local pairs probe the steepest region; the rest are spread over the box
    step = np.maximum(1, (rng.random((size, 1)) * 10.0 ** rng.integers(-4, 0, size=(size, 1)) * D).astype(np.int64))
    near = np.clip(X + rng.integers(-1, 2, size=(size, m)) * step, -B, B)
    far = rng.integers(-B, B + 1, size=(size, m))
    corner = np.where(rng.random((size, m)) < 0.5, -B, B)
    X = np.where(kind[:, None] < 0.25, corner, X)
    Y = np.where(kind[:, None] < 0.6, near, far)
    return _lipschitz_margins(inst, C, eps, X.tolist(), Y.tolist(), D)


def _lipschitz_margins(inst, C, eps, X, Y, D):
    system = CompiledSystem([build_g(inst, C)])
    vals, den = system.evaluate_exact_scaled(X + Y, D)
    L = lipschitz_constant(inst.m, C, eps)
    R = len(X)
    worst, witness, worst_ratio = None, None, 0.0
    for r in range(R):
        dg = Fraction(int(vals[r, 0]) - int(vals[R + r, 0]), den)
        d2 = Fraction(sum((a - b) ** 2 for a, b in zip(X[r], Y[r])), D * D)
        if dg * dg > L * L * d2:
            slack = -1.0
            witness = ([Fraction(a, D) for a in X[r]], [Fraction(b, D) for b in Y[r]])
            return R, slack, witness, math.inf
        bound = L * mpmath.sqrt(mpmath.mpf(d2.numerator) / d2.denominator)
        slack = float(bound - abs(mpmath.mpf(dg.numerator) / dg.denominator))
        if d2:
            worst_ratio = max(worst_ratio, math.sqrt(float(dg * dg / (L * L * d2))))
        if worst is None or slack < worst:
            worst, witness = slack, ([Fraction(a, D) for a in X[r]], [Fraction(b, D) for b in Y[r]])
    return R, worst, witness, worst_ratio


def check_lipschitz(inst: CliqueInstance, C=1, eps=Fraction(1, 2), num_pairs: int = 10_000, seed: int = 0,
                    batch: int = 1000, workers: int = 1, pairs: Sequence | None = None) -> VerificationReport:
    """Sampled exact check of |g(x) - g(y)| <= L |x - y| on [-1-eps, 1+eps]^m.

    The comparison is done on squares, so it is exact; the reported margin
    ``L |x - y| - |g(x) - g(y)|`` is a float.
    """
    C, eps = exact_param(C), exact_param(eps)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    results = []
    if pairs:
        xs, D1 = _common_many([p[0] for p in pairs])
        ys, D2 = _common_many([p[1] for p in pairs])
        D = D1 * D2 // math.gcd(D1, D2)
        xs = [[a * (D // D1) for a in row] for row in xs]
        ys = [[a * (D // D2) for a in row] for row in ys]
        results.append(_lipschitz_margins(inst, C, eps, xs, ys, D))
    tasks = [(inst, C, eps, size, ss) for size, ss in _batch_plan(num_pairs, batch, seed)]
    results += _run(_lipschitz_batch, tasks, workers)
    ratio = max((r[3] for r in results), default=0.0)
    total, worst, witness = _merge_batches([r[:3] for r in results])
    status = FAIL if ratio == math.inf else PASS
    return VerificationReport("lipschitz", status, total, worst, witness,
                              {"eps": eps, "C": C, "L": lipschitz_constant(inst.m, C, eps),
                               "max_ratio": ratio, "seed": seed})


def _common_many(points):
    from critgen.polycore import common_denominator_form
    return common_denominator_form([list(p) for p in points])


def fujiwara_bound(a0, a1, a2, a3) -> float:
    """2 max{a2/a3, sqrt(a1/a3), cbrt(a0/(2 a3))} for positive coefficients."""
    alphas = [exact_param(a) for a in (a0, a1, a2, a3)]
    if any(a <= 0 for a in alphas):
        raise ValueError("all coefficients must be positive")
    a0, a1, a2, a3 = alphas
    return 2 * max(float(a2 / a3), math.sqrt(a1 / a3), float(a0 / (2 * a3)) ** (1 / 3))


def within_fujiwara(t, alphas) -> bool:
    """Exact test of |t| <= fujiwara_bound(*alphas)."""
    a0, a1, a2, a3 = (exact_param(a) for a in alphas)
    s = abs(exact_param(t)) / 2
    return s <= a2 / a3 or s * s <= a1 / a3 or s**3 <= a0 / (2 * a3)


def outermost_nonnegative_point(alphas, width=Fraction(1, 10**12)) -> tuple:
    """Isolating interval (lo, hi] of the largest root of -a3 t^3 + a2 t^2 + a1 t + a0.

    f(t) = -a3|t|^3 + a2|t|^2 + a1|t| + a0 is even and nonnegative exactly on
    [-r, r], so r is the outermost point with f >= 0.
    """
    a0, a1, a2, a3 = (exact_param(a) for a in alphas)
    coeffs = [-a3, a2, a1, a0]
    roots = isolate_real_roots(coeffs)
    lo, hi = roots[-1]
    return refine_root(coeffs, lo, hi, width)


def _largest_root_at_most(seq, bound: Fraction, power: int, T: Fraction) -> bool | None:
    """Decide r <= T^(1/power) for the largest root r, using Sturm counts on (x, bound].

    The threshold is bracketed by rationals L <= T^(1/power) <= U; r <= L
    proves the claim and a root above U refutes it. ``None`` means the
    bracket shrank below 1e-40 without a decision (r equals an irrational
    threshold to that precision).
    """
    if T <= 0:
        return count_roots(seq, Fraction(0), bound) == 0
    guess = Fraction(float(T) ** (1.0 / power)) if T < Fraction(10) ** 300 else Fraction(10) ** (300 // power)
    lo, hi = guess, guess
    while lo > 0 and lo**power > T:
        lo /= 2
    lo = max(lo, Fraction(0))
    while hi**power < T:
        hi *= 2
    for _ in range(400):
        if lo >= bound or count_roots(seq, lo, bound) == 0:
            return True
        if hi < bound and count_roots(seq, hi, bound) > 0:
            return False
        if hi**power == T:
            return count_roots(seq, hi, bound) == 0
        if hi - lo < Fraction(1, 10**40):
            return None
        mid = (lo + hi) / 2
        if mid**power <= T:
            lo = mid
        else:
            hi = mid
    return None


def fujiwara_holds(alphas) -> bool | None:
    """Exact test that the largest root r of -a3 t^3 + a2 t^2 + a1 t + a0 satisfies r <= u.

    With s = r / 2, r <= u is the disjunction s <= a2/a3, s^2 <= a1/a3,
    s^3 <= a0/(2 a3); each disjunct is decided against its own threshold.
    """
    a0, a1, a2, a3 = (exact_param(a) for a in alphas)
    coeffs = [-a3, a2, a1, a0]
    p = [Fraction(c) for c in coeffs]
    seq = sturm_sequence(pquo(p, pgcd(p, pderiv(p))))
    bound = cauchy_bound(p) + 1
    verdicts = [
        _largest_root_at_most(seq, bound, 1, 2 * a2 / a3),
        _largest_root_at_most(seq, bound, 2, 4 * a1 / a3),
        _largest_root_at_most(seq, bound, 3, 8 * a0 / (2 * a3)),
    ]
    if any(v is True for v in verdicts):
        return True
    if all(v is False for v in verdicts):
        return False
    return None


def _fujiwara_case(alphas, rng, num_t: int):
    a0, a1, a2, a3 = alphas
    coeffs = [-a3, a2, a1, a0]
    lo, hi = outermost_nonnegative_point(alphas, width=Fraction(1, 10**15))
    ok = fujiwara_holds(alphas)
    u = fujiwara_bound(*alphas)
    bad_t = None
    for t in rng.uniform(-2 * u, 2 * u, size=num_t):
        t = Fraction(float(t))
        if peval(coeffs, abs(t)) >= 0 and not within_fujiwara(t, alphas):
            bad_t = t
            break
    if bad_t is not None:
        ok = False
    return ok, float(hi), u, bad_t if bad_t is not None else hi


def random_positive_rational(rng) -> Fraction:
    scale = Fraction(10) ** int(rng.integers(-3, 4))
    return Fraction(int(rng.integers(1, 10**6)), int(rng.integers(1, 10**6))) * scale


def check_root_bound(alphas_list: Sequence | None = None, num_samples: int = 1000, seed: int = 0,
                     t_samples: int = 20) -> VerificationReport:
    """Check the Fujiwara-type bound on random (or given) positive coefficient quadruples."""
    rng = np.random.default_rng(seed)
    if alphas_list is None:
        alphas_list = [tuple(random_positive_rational(rng) for _ in range(4)) for _ in range(num_samples)]
    worst, witness, failed, undecided = None, None, None, 0
    for alphas in alphas_list:
        alphas = tuple(exact_param(a) for a in alphas)
        if any(a <= 0 for a in alphas):
            raise ValueError("all coefficients must be positive")
        ok, root_hi, u, wit = _fujiwara_case(alphas, rng, t_samples)
        rel = (u - root_hi) / u
        if worst is None or rel < worst:
            worst, witness = rel, {"alphas": alphas, "root_upper": root_hi, "u": u}
        if ok is None:
            undecided += 1
        elif not ok and failed is None:
            failed = {"alphas": alphas, "t": wit, "u": u}
    status = FAIL if failed is not None else (INCONCLUSIVE if undecided else PASS)
    return VerificationReport("root-bound", status, len(alphas_list), worst,
                              failed if failed is not None else witness,
                              {"seed": seed, "undecided": undecided})


def stationary_root_terms(m: int, halve_constant: bool = False) -> tuple:
    """The three candidate terms from the FONC cubic bound on max |x_i|, as (t1, t2^2, t3^3).

    The cubic is (4N^2 - 2m) s^3 - 6m s^2 - (8m + 4N^2) s - 8m >= 0. With
    ``halve_constant`` the cube-root term uses a0 / (2 a3) as in the generic
    bound; otherwise a0 / a3.
    """
    N = big_n(m)
    a3 = Fraction(4 * N * N - 2 * m)
    t1 = 6 * m / a3
    t2_sq = (8 * m + 4 * N * N) / a3
    t3_cube = (8 * m) / (2 * a3 if halve_constant else a3)
    return t1, t2_sq, t3_cube


def middle_term_dominates(m: int, halve_constant: bool = False) -> bool:
    t1, t2_sq, t3_cube = stationary_root_terms(m, halve_constant)
    return t2_sq >= t1 * t1 and t2_sq**3 >= t3_cube**2


@dataclass(frozen=True)
class Certificate:
    exact: bool
    exact_zero: bool | None
    residual: float
    residual_sq: Fraction | None = None

    def to_json_obj(self) -> dict:
        return to_jsonable(self.__dict__)


def certify_critical(instance: Instance | Polynomial | ExpTimesPoly | ExpOfPoly, pt) -> Certificate:
    """Exact zero-gradient test for exact points; the residual norm for float points.

    For exponential composites the exponential factor is positive, so the
    gradient vanishes exactly when the polynomial factors do; no
    transcendental value is needed for the verdict.
    """
    f = instance.function if isinstance(instance, Instance) else instance
    coords = _coords(pt)
    if len(coords) != f.nvars:
        raise ValueError(f"point has {len(coords)} coordinates, function has {f.nvars} variables")
    if not _is_exact(coords):
        g = gradient_at(f, coords)
        return Certificate(False, None, float(np.linalg.norm(g)))
    xs = [_exact_coord(c) for c in coords]
    if isinstance(f, Polynomial):
        parts = [g.eval(xs) for g in f.gradient()]
        sq = sum((v * v for v in parts), Fraction(0))
        return Certificate(True, sq == 0, frac_sqrt(sq), sq)
    if isinstance(f, ExpTimesPoly):
        base = f.base
        parts = [g.eval(xs) for g in base.gradient()]
        parts[f.w_index] = base.eval(xs)
        sq = sum((v * v for v in parts), Fraction(0))
        scale = mpmath.exp(mpmath.mpf(xs[f.w_index].numerator) / xs[f.w_index].denominator)
    else:
        parts = [g.eval(xs) for g in f.inner.gradient()]
        sq = sum((v * v for v in parts), Fraction(0))
        v = f.inner.eval(xs)
        scale = mpmath.exp(mpmath.mpf(v.numerator) / v.denominator)
    residual = float(scale * mpmath.sqrt(mpmath.mpf(sq.numerator) / sq.denominator))
    return Certificate(True, sq == 0, residual, None)


def near_radius(family: str, n: int) -> float:
    """Decoding radius: cubic 1/(12000 n^3.5), exp-gadget 1/(1000 n^7)."""
    if family == "cubic":
        return 1.0 / (12000.0 * n**3.5)
    if family == "exp-gadget":
        return 1.0 / (1000.0 * n**7)
    raise ValueError(f"no decoding radius is defined for family {family!r}; pass alpha explicitly")


@dataclass(frozen=True)
class DecodeResult:
    success: bool
    clique: frozenset | None
    signs: tuple
    alpha: float | None

    def to_json_obj(self) -> dict:
        return to_jsonable({"success": self.success, "clique": self.clique, "signs": self.signs,
                            "alpha": self.alpha})


def near_decode(instance: Instance, pt, alpha: float | None = None) -> DecodeResult:
    """Sign-decode the x-block and check that the support is a k-clique."""
    if alpha is None:
        try:
            alpha = near_radius(instance.family, instance.n)
        except ValueError:
            alpha = None
    coords = _coords(pt)
    start, length = instance.block("x")
    signs = sign_decode(coords[start:start + length], length)
    support = sign_to_support(signs)
    ok = len(support) == instance.params.k and instance.graph.is_clique(support)
    return DecodeResult(ok, support if ok else None, signs, alpha)


def perturb(point, radius: float, rng) -> np.ndarray:
    """Add a uniformly oriented vector of Euclidean norm ``radius``."""
    x = np.array([float(v) for v in point])
    u = rng.standard_normal(x.size)
    return x + radius * u / np.linalg.norm(u)


def grad_floor(inst: CliqueInstance, C=1, family: str = "cubic", ball_radius=None) -> FloorBound:
    """Proven lower bound on |grad p| for a no-clique instance.

    cubic: sqrt(3) C / (2 (m^2 + 1)) over all of space. quartic: the same
    quantity minus the ball radius (default 2^n), valid inside that ball.
    """
    if has_k_clique(inst) is not None:
        raise ValueError("instance has a k-clique; the gradient floor would be vacuous")
    C = exact_param(C)
    m = inst.m
    sq = 3 * C * C / (4 * (m * m + 1) ** 2)
    if family == "cubic":
        return FloorBound("grad-floor", sq, squared=True)
    if family == "quartic":
        R = Fraction(2 ** family_dimension("quartic", m)) if ball_radius is None else exact_param(ball_radius)
        return FloorBound("quartic-ball-floor", sq, squared=True, minus=R)
    raise ValueError(f"no gradient floor defined for family {family!r}")


def check_minimizer_box(inst: CliqueInstance, C, point, grad_tol=None, slack=Fraction(1, 10**6),
                        near_unit: bool = False, near_unit_slack=None) -> VerificationReport:
    """Check 0.3 - slack <= |x_i| <= 2.1 + slack at a claimed minimizer of g.

    With ``grad_tol`` set, the point is first required to satisfy
    |grad g| <= grad_tol exactly; otherwise the verdict is inconclusive.
    ``near_unit`` additionally checks |x_i^2 - 1| <= eps + near_unit_slack with
    eps = 0.005 / (m^2 (m^2 + 1)^2).
    """
    C = exact_param(C)
    xs = [_exact_coord(v) for v in _coords(point)]
    if len(xs) != inst.m:
        raise ValueError(f"point has {len(xs)} coordinates, expected m={inst.m}")
    g = build_g(inst, C)
    details = {"m": inst.m, "k": inst.k, "C": C, "slack": exact_param(slack)}
    if grad_tol is not None:
        gsq = sum((d.eval(xs) ** 2 for d in g.gradient()), Fraction(0))
        details["grad_norm"] = frac_sqrt(gsq)
        tol = exact_param(grad_tol)
        if gsq > tol * tol:
            return VerificationReport("minimizer-box", INCONCLUSIVE, 1, None, tuple(xs), details)
    tau = exact_param(slack)
    lo, hi = Fraction(3, 10) - tau, Fraction(21, 10) + tau
    margins = [min(abs(x) - lo, hi - abs(x)) for x in xs]
    worst = min(margins)
    status = PASS if worst >= 0 else FAIL
    if near_unit:
        eps = near_unit_epsilon(inst.m) + exact_param(near_unit_slack if near_unit_slack is not None else 0)
        c2 = min(eps - abs(x * x - 1) for x in xs)
        details["near_unit_margin"] = c2
        details["near_unit_eps"] = near_unit_epsilon(inst.m)
        if c2 < 0:
            status = FAIL
    return VerificationReport("minimizer-box", status, 1, worst, tuple(xs), details)
