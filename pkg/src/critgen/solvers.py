"""Multistart gradient descent on polynomials and on squared gradient norms.

All restarts advance together as rows of one array so that each iteration
is a single batched evaluation of the objective and its gradient. With
backtracking, every row keeps its own step length.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from critgen.gadgets import Instance, clique_to_critical_point
from critgen.graphkit import has_k_clique
from critgen.polycore import CompiledSystem, Polynomial, _coords, _exact_coord
from critgen.verify import FloorBound, frac_sqrt, grad_floor, to_jsonable

STEP_POLICIES = ("backtracking", "fixed")
# rows whose coordinates grow past this are treated as divergent
_DIVERGED = 1e100
# relative rounding level of a float polynomial evaluation, per unit of sum |term|
_NOISE = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 10_000
    grad_tol: float = 1e-8
    step: str = "backtracking"
    eta: float = 1.0
    beta: float = 0.5
    c: float = 1e-4
    restarts: int = 10
    init_radius: float = 3.0
    seed: int = 0
    polish_dps: int | None = None
    record_trajectory: bool = False

    def __post_init__(self):
        if self.step not in STEP_POLICIES:
            raise ValueError(f"step policy must be one of {STEP_POLICIES}, got {self.step!r}")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if not 0 < self.c < 1:
            raise ValueError("c must lie in (0, 1)")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.grad_tol is not None and self.grad_tol < 0:
            raise ValueError("grad_tol must be nonnegative")
        if not self.init_radius > 0:
            raise ValueError("init_radius must be positive")
        if self.polish_dps is not None and self.polish_dps < 20:
            raise ValueError("polish_dps must be at least 20 digits")


@dataclass
class RunRecord:
    best_point: tuple
    best_objective: float
    best_grad_norm: float
    iterations_used: int
    converged: bool
    best_restart: int
    diverged_restarts: int = 0
    objective_grad_norm: float | None = None
    trajectory: list | None = None
    exact_point: bool = False

    def to_json_obj(self) -> dict:
        return to_jsonable({k: v for k, v in self.__dict__.items()})


def _initial_points(n: int, cfg: SolverConfig, starts) -> np.ndarray:
    if starts is not None:
        X = np.atleast_2d(np.asarray([[float(v) for v in _coords(s)] for s in starts], dtype=float))
        if X.shape[1] != n:
            raise ValueError(f"start points have {X.shape[1]} coordinates, expected {n}")
        return X
    rng = np.random.default_rng(cfg.seed)
    return rng.uniform(-cfg.init_radius, cfg.init_radius, size=(cfg.restarts, n))


def _evaluate(system: CompiledSystem, X: np.ndarray):
    out = system.evaluate(X)
    return out[:, 0], out[:, 1:]


def _descend(system: CompiledSystem, X: np.ndarray, cfg: SolverConfig, value_system: CompiledSystem | None = None):
    """Run gradient descent on every row; returns final arrays and per-row bookkeeping.

    ``system`` evaluates (f, grad f); ``value_system`` evaluates f alone and
    is used for line-search trials so rejected steps skip the gradient.
    """
    value_system = value_system or CompiledSystem(system.polys[:1])
    R = X.shape[0]
    F, G = _evaluate(system, X)
    if cfg.step == "backtracking":
        # line-search decisions and the recorded objective use the same evaluator
        F = value_system.evaluate(X)[:, 0]
    gn = np.linalg.norm(G, axis=1)
    diverged = ~(np.isfinite(F) & np.all(np.isfinite(G), axis=1))
    tol = -1.0 if cfg.grad_tol is None else cfg.grad_tol
    done = diverged | (gn <= tol)
    iters = np.zeros(R, dtype=np.int64)
    steps = np.full(R, cfg.eta)
    traj = [[(0, float(F[r]), float(gn[r]))] for r in range(R)] if cfg.record_trajectory else None
    for it in range(1, cfg.max_iters + 1):
        active = np.flatnonzero(~done)
        if active.size == 0:
            break
        if cfg.step == "fixed":
            Xn = X[active] - cfg.eta * G[active]
            Fn, Gn = _evaluate(system, Xn)
            ok = np.isfinite(Fn) & np.all(np.isfinite(Gn), axis=1) & (np.abs(Xn).max(axis=1) < _DIVERGED)
            diverged[active[~ok]] = True
            done[active[~ok]] = True
            acc = active[ok]
            X[acc], F[acc], G[acc] = Xn[ok], Fn[ok], Gn[ok]
        else:
            acc_rows, acc_X, acc_F, acc_G = [], [], [], []
            pending = active
            t = np.minimum(cfg.eta, steps[pending] / cfg.beta)
            g2 = gn[pending] ** 2
            noise = _NOISE * value_system.evaluate_abs(X[pending])[:, 0]
            for _ in range(80):
                Xn = X[pending] - t[:, None] * G[pending]
                Fn = value_system.evaluate(Xn)[:, 0]
                finite = np.isfinite(Fn)
                # a step too short to change any coordinate is not progress
                moved = np.any(Xn != X[pending], axis=1)
                finite &= moved
                ok = finite & (Fn <= F[pending] - cfg.c * t * g2)
                # below rounding level the sufficient-decrease margin is invisible; accept a
                # non-increasing value when the gradient norm also drops
                blind = np.flatnonzero(finite & ~ok & (Fn <= F[pending]) & (F[pending] - Fn <= noise))
                if blind.size:
                    Gb = _evaluate(system, Xn[blind])[1]
                    ok[blind] = np.linalg.norm(Gb, axis=1) < gn[pending[blind]]
                if ok.any():
                    Ga = _evaluate(system, Xn[ok])[1]
                    good = np.all(np.isfinite(Ga), axis=1)
                    rows = pending[ok][good]
                    acc_rows.append(rows)
                    acc_X.append(Xn[ok][good])
                    acc_F.append(Fn[ok][good])
                    acc_G.append(Ga[good])
                    steps[rows] = t[ok][good]
                    diverged[pending[ok][~good]] = True
                    done[pending[ok][~good]] = True
                pending, t, g2, noise = pending[~ok], t[~ok] * cfg.beta, g2[~ok], noise[~ok]
                if pending.size == 0:
                    break
            # no sufficient decrease at any tried step: the row has stalled
            done[pending] = True
            for rows, Xa, Fa, Ga in zip(acc_rows, acc_X, acc_F, acc_G):
                X[rows], F[rows], G[rows] = Xa, Fa, Ga
            acc = np.concatenate(acc_rows) if acc_rows else np.zeros(0, dtype=np.int64)
        iters[acc] = it
        gn[acc] = np.linalg.norm(G[acc], axis=1)
        done[acc] |= gn[acc] <= tol
        if traj is not None:
            for r in acc:
                traj[r].append((it, float(F[r]), float(gn[r])))
    converged = (gn <= tol) & ~diverged
    return X, F, gn, iters, converged, diverged, traj


def _exact_grad_sq(f: Polynomial, x) -> Fraction:
    xs = [Fraction(float(v)) for v in x]
    return sum((g.eval(xs) ** 2 for g in f.gradient()), Fraction(0))


def _exact_report(f: Polynomial, x) -> tuple:
    """f and |grad f| at a float point, evaluated exactly and then rounded once.

    Float evaluation of these polynomials loses many digits to cancellation
    among large coefficients; exact evaluation makes the reported numbers
    reproducible and faithful to the stored point.
    """
    xs = [Fraction(float(v)) for v in x]
    return float(f.eval(xs)), frac_sqrt(_exact_grad_sq(f, x))


def _pick_best(F: np.ndarray, diverged: np.ndarray) -> int:
    """Lowest objective among non-divergent rows, ties to the lowest restart index."""
    cand = np.flatnonzero(~diverged & np.isfinite(F))
    if cand.size == 0:
        return -1
    return int(cand[np.argmin(F[cand])])


def _mp_terms(poly: Polynomial) -> list:
    return [(mpmath.mpf(c.numerator) / c.denominator, mono) for mono, c in poly.items()]


def _mp_eval(terms: list, xs: list):
    total = mpmath.mpf(0)
    for c, mono in terms:
        t = c
        for v, e in mono:
            t *= xs[v] ** e
        total += t
    return total


def polish(f: Polynomial, x0, dps: int = 60, max_iter: int = 100) -> tuple:
    """Damped Newton refinement of a near-critical point in ``dps``-digit arithmetic.

    Returns the refined point as exact Fractions (the binary values of the
    final mpmath coordinates).
    """
    grads = f.gradient()
    n = f.nvars
    g_terms = [_mp_terms(g) for g in grads]
    h_terms = [[_mp_terms(grads[i].diff(j)) for j in range(n)] for i in range(n)]
    with mpmath.workdps(dps):
        x = [mpmath.mpf(float(v)) for v in _coords(x0)]

        def grad(pt):
            return mpmath.matrix([_mp_eval(t, pt) for t in g_terms])

        gv = grad(x)
        merit = mpmath.norm(gv)
        target = mpmath.mpf(10) ** (-(dps // 2))
        for _ in range(max_iter):
            if merit <= target:
                break
            H = mpmath.matrix([[_mp_eval(h_terms[i][j], x) for j in range(n)] for i in range(n)])
            try:
                d = mpmath.lu_solve(H, gv)
            except ZeroDivisionError:
                d = gv
            lam = mpmath.mpf(1)
            for _ in range(60):
                cand = [x[i] - lam * d[i] for i in range(n)]
                gc = grad(cand)
                mc = mpmath.norm(gc)
                if mc < merit:
                    break
                lam /= 2
            else:
                break
            x, gv, merit = cand, gc, mc
        return tuple(_exact_coord(v) for v in x)


def minimize(f: Polynomial, cfg: SolverConfig, starts: Sequence | None = None) -> RunRecord:
    """Multistart gradient descent on a polynomial.

    Restarts whose iterates become non-finite are flagged as divergent and
    excluded. With ``cfg.polish_dps`` the best point is refined by Newton's
    method in high precision and returned as exact rationals; convergence is
    then judged on the exact gradient norm at that point.
    """
    system = CompiledSystem([f] + f.gradient())
    X = _initial_points(f.nvars, cfg, starts)
    with np.errstate(over="ignore", invalid="ignore"):
        # runaway rows are flagged as diverged below
        X, F, gn, iters, converged, diverged, traj = _descend(system, X, cfg, f.compiled())
    best = _pick_best(F, diverged)
    if best < 0:
        return RunRecord(tuple(), math.inf, math.inf, int(iters.max(initial=0)), False, -1,
                         int(diverged.sum()))
    x = X[best]
    if cfg.polish_dps:
        xs = polish(f, x, cfg.polish_dps)
        gsq = sum((g.eval(xs) ** 2 for g in f.gradient()), Fraction(0))
        norm = frac_sqrt(gsq)
        ok = cfg.grad_tol is None or norm <= cfg.grad_tol
        return RunRecord(xs, float(f.eval(xs)), norm, int(iters[best]), ok, best, int(diverged.sum()),
                         trajectory=traj[best] if traj else None, exact_point=True)
    value, norm = _exact_report(f, x)
    ok = cfg.grad_tol is None or norm <= cfg.grad_tol
    return RunRecord(tuple(float(v) for v in x), value, norm, int(iters[best]), ok, best,
                     int(diverged.sum()), trajectory=traj[best] if traj else None)


def _polynomial_of(target) -> Polynomial:
    if isinstance(target, Instance):
        if not isinstance(target.function, Polynomial):
            raise TypeError(f"family {target.family!r} is not a polynomial family")
        return target.function
    if isinstance(target, Polynomial):
        return target
    raise TypeError("expected an Instance or a Polynomial")


def min_grad_norm(target: Instance | Polynomial, cfg: SolverConfig, starts: Sequence | None = None) -> RunRecord:
    """Minimize h = |grad p|^2 by gradient descent on the symbolic gradient of h.

    ``best_grad_norm`` is |grad p| re-evaluated at the best point and
    ``best_objective`` is h there.
    """
    p = _polynomial_of(target)
    h = target.grad_norm_sq if isinstance(target, Instance) else p.grad_norm_sq()
    system = CompiledSystem([h] + h.gradient())
    X = _initial_points(p.nvars, cfg, starts)
    with np.errstate(over="ignore", invalid="ignore"):
        X, F, gn, iters, converged, diverged, traj = _descend(system, X, cfg, h.compiled())
    best = _pick_best(F, diverged)
    if best < 0:
        return RunRecord(tuple(), math.inf, math.inf, int(iters.max(initial=0)), False, -1,
                         int(diverged.sum()))
    x = X[best]
    _, norm = _exact_report(p, x)
    h_value = float(_exact_grad_sq(p, x))
    _, h_norm = _exact_report(h, x)
    return RunRecord(tuple(float(v) for v in x), h_value, norm, int(iters[best]),
                     bool(converged[best]), best, int(diverged.sum()), objective_grad_norm=h_norm,
                     trajectory=traj[best] if traj else None)


BENCH_COLUMNS = ("instance-id", "family", "m", "k", "C-mode", "restarts", "iters", "best-grad-norm",
                 "floor", "floor-respected", "seconds")


@dataclass
class BenchRow:
    instance_id: str
    family: str
    m: int
    k: int
    c_mode: str
    restarts: int
    iters: int
    best_grad_norm: float
    floor: float | None
    floor_respected: bool | None
    seconds: float
    status: str = "ok"
    record: RunRecord | None = field(default=None, repr=False)

    def as_row(self) -> list:
        return [self.instance_id, self.family, self.m, self.k, self.c_mode, self.restarts, self.iters,
                repr(self.best_grad_norm), "" if self.floor is None else repr(self.floor),
                "" if self.floor_respected is None else str(self.floor_respected).lower(),
                f"{self.seconds:.6f}"]


def instance_floor(inst: Instance) -> FloorBound | None:
    """The proven gradient floor when it applies (no clique, cubic or quartic, positive)."""
    ci = inst.clique_instance
    if inst.family not in ("cubic", "quartic") or has_k_clique(ci) is not None:
        return None
    fb = grad_floor(ci, inst.params.C, inst.family)
    return fb if fb.exceeds(0) else None


def bench(instances: Sequence[Instance], cfg: SolverConfig, start: str = "random",
          ids: Sequence[str] | None = None) -> list:
    """Run min_grad_norm on every instance and tabulate the outcome.

    ``start="witness"`` begins instances that contain a clique at their
    constructed critical point; others still use random restarts.
    """
    if start not in ("random", "witness"):
        raise ValueError("start must be 'random' or 'witness'")
    rows = []
    for idx, inst in enumerate(instances):
        iid = ids[idx] if ids is not None else f"inst-{idx}"
        p = inst.params
        t0 = time.perf_counter()
        try:
            starts = None
            if start == "witness":
                clique = has_k_clique(inst.clique_instance)
                if clique is not None:
                    starts = [[float(v) for v in clique_to_critical_point(inst.clique_instance, clique, inst.family)]]
            rec = min_grad_norm(inst, cfg, starts)
            status = "ok" if rec.best_restart >= 0 else "diverged"
        except (TypeError, OverflowError) as exc:
            rows.append(BenchRow(iid, p.family, p.m, p.k, p.constants_mode, cfg.restarts, 0, math.nan, None,
                                 None, time.perf_counter() - t0, f"failed: {exc}"))
            continue
        secs = time.perf_counter() - t0
        fb = instance_floor(inst)
        floor = fb.value if fb else None
        respected = fb.respected_by(rec.best_grad_norm) if fb and math.isfinite(rec.best_grad_norm) else None
        rows.append(BenchRow(iid, p.family, p.m, p.k, p.constants_mode, len(starts) if starts else cfg.restarts,
                             rec.iterations_used, rec.best_grad_norm, floor, respected, secs, status, rec))
    return rows


def rows_to_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for r in rows:
        w.writerow(r.as_row())
    return buf.getvalue()


def rows_to_json(rows: Sequence[BenchRow]) -> str:
    out = []
    for r in rows:
        d = dict(zip(BENCH_COLUMNS, [r.instance_id, r.family, r.m, r.k, r.c_mode, r.restarts, r.iters,
                                     r.best_grad_norm, r.floor, r.floor_respected, r.seconds]))
        d["status"] = r.status
        out.append(d)
    return json.dumps(to_jsonable(out), indent=1, sort_keys=True) + "\n"
