"""Command-line entry point: ``critgen <verb> [options]``.

Exit codes: 0 success or pass, 1 check failed, 2 inconclusive, 64 bad usage.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import secrets
import sys
from fractions import Fraction

from critgen.gadgets import CONSTANT_MODES, FAMILIES, Instance, build_g, build_instance, clique_to_critical_point
from critgen.graphkit import CliqueInstance, Graph, GraphFormatError, has_k_clique, load_graph, planted_clique, random_graph
from critgen.polycore import fraction_str
from critgen.solvers import SolverConfig, bench, min_grad_norm, minimize, rows_to_csv, rows_to_json
from critgen import verify as V

EX_USAGE = 64
CHECKS = ("corner-sweep", "rounding", "lipschitz", "fujiwara", "certify-critical", "grad-floor", "minimizer-box")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EX_USAGE)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="random seed (drawn and recorded when omitted)")
    p.add_argument("--threads", type=int, default=None, help="worker processes (env CRITGEN_THREADS)")
    p.add_argument("--no-timestamp", action="store_true", help="omit timestamps for byte-stable output")
    p.add_argument("--out", default=None, help="output path (stdout when omitted)")


def _graph_opts(p: argparse.ArgumentParser, k_required: bool = True) -> None:
    p.add_argument("--graph", help="DIMACS or JSON graph file")
    p.add_argument("--graph-format", choices=("dimacs", "json"), default=None)
    p.add_argument("--k", type=int, required=k_required)


def _constant_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=FAMILIES, default="cubic")
    p.add_argument("--constants", choices=CONSTANT_MODES, default="canonical")
    p.add_argument("--d", type=int, default=None, help="exponent for power-d constants")
    p.add_argument("--C", dest="C", default=None, help="explicit constant for custom mode, e.g. 3/2")


def _solver_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--grad-tol", type=float, default=1e-8)
    p.add_argument("--step", choices=("backtracking", "fixed"), default="backtracking")
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--c", dest="armijo_c", type=float, default=1e-4)
    p.add_argument("--init-radius", type=float, default=3.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="critgen", description="Hard critical-point instances from k-clique.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write an instance JSON")
    _common(p)
    _graph_opts(p)
    p.add_argument("--random", nargs=2, metavar=("M", "P"), help="sample G(M, P) instead of reading a graph")
    p.add_argument("--planted", type=int, metavar="M", help="G(M, 1/2) with a planted k-clique")
    _constant_opts(p)

    p = sub.add_parser("oracle", help="print a k-clique or 'none'")
    _common(p)
    _graph_opts(p)

    p = sub.add_parser("verify", help="run a certification check")
    p.add_argument("check", choices=CHECKS)
    _common(p)
    _graph_opts(p, k_required=False)
    p.add_argument("--C", dest="C", default="1")
    p.add_argument("--eps", default=None)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--limit", type=int, default=20, help="corner-sweep size limit on m")
    p.add_argument("--alphas", nargs=4, default=None, metavar="A", help="fujiwara coefficients a0 a1 a2 a3")
    p.add_argument("--instance", default=None)
    p.add_argument("--point", default=None)
    p.add_argument("--family", choices=("cubic", "quartic"), default="cubic")
    p.add_argument("--slack", default="1/1000000")
    p.add_argument("--near-unit", action="store_true", help="also check |x_i^2 - 1| against the refined bound")
    _solver_opts(p)

    p = sub.add_parser("solve", help="multistart descent on g or on |grad p|^2")
    _common(p)
    p.add_argument("--instance", required=True)
    p.add_argument("--objective", choices=("value", "grad-norm"), default="grad-norm")
    p.add_argument("--polish-dps", type=int, default=None)
    _solver_opts(p)

    p = sub.add_parser("bench", help="tabulate min |grad p| over instances")
    _common(p)
    p.add_argument("instances", nargs="*")
    p.add_argument("--start", choices=("random", "witness"), default="random")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _solver_opts(p)

    p = sub.add_parser("decode", help="sign-decode a point into a clique")
    _common(p)
    p.add_argument("--instance", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--alpha", type=float, default=None)
    return parser


def _threads(args) -> int:
    if args.threads is not None:
        t = args.threads
    else:
        env = os.environ.get("CRITGEN_THREADS")
        if env is None:
            return 1
        try:
            t = int(env)
        except ValueError:
            raise UsageError(f"CRITGEN_THREADS must be an integer, got {env!r}") from None
    if t < 1:
        raise UsageError("thread count must be at least 1")
    return t


def _seed(args) -> int:
    return args.seed if args.seed is not None else secrets.randbelow(2**32)


def _fraction(text: str, name: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--{name} must be a rational such as 3/2 or 0.01, got {text!r}") from None


def _read_graph(args) -> Graph:
    if not args.graph:
        raise UsageError("--graph is required")
    try:
        return load_graph(args.graph, args.graph_format)
    except OSError as exc:
        raise UsageError(f"cannot read graph: {exc}") from None


def _clique_instance(args) -> CliqueInstance:
    g = _read_graph(args)
    if args.k is None:
        raise UsageError("--k is required")
    try:
        return CliqueInstance(g, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _stamp(args, obj: dict) -> dict:
    if not args.no_timestamp:
        obj["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return obj


def _dump(obj) -> str:
    return json.dumps(V.to_jsonable(obj), indent=1, sort_keys=True) + "\n"


def _load_instance(path: str) -> tuple:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        return Instance.from_json_obj(obj), obj
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read instance {path}: {exc}") from None


def _parse_coord(v):
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"bad coordinate {v!r}")
    return v


def _load_point(path: str) -> tuple:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        if isinstance(obj, dict):
            obj = obj.get("point", obj.get("witness", {}).get("point") if isinstance(obj.get("witness"), dict) else None)
        if not isinstance(obj, list):
            raise ValueError("expected a list of coordinates or {\"point\": [...]}")
        return tuple(_parse_coord(v) for v in obj)
    except (OSError, ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot read point {path}: {exc}") from None


def _solver_config(args, seed: int, polish_dps=None) -> SolverConfig:
    try:
        return SolverConfig(max_iters=args.max_iters, grad_tol=args.grad_tol, step=args.step, eta=args.eta,
                            beta=args.beta, c=args.armijo_c, restarts=args.restarts,
                            init_radius=args.init_radius, seed=seed, polish_dps=polish_dps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_gen(args) -> int:
    sources = sum(x is not None for x in (args.graph, args.random, args.planted))
    if sources != 1:
        raise UsageError("give exactly one of --graph, --random M P, --planted M")
    seed = None
    planted = None
    if args.graph:
        graph = _read_graph(args)
    elif args.random:
        seed = _seed(args)
        try:
            m, p = int(args.random[0]), float(args.random[1])
        except ValueError:
            raise UsageError("--random expects an integer M and a probability P") from None
        if m < 1 or not 0 <= p <= 1:
            raise UsageError("--random needs M >= 1 and 0 <= P <= 1")
        graph = random_graph(m, p, seed)
    else:
        seed = _seed(args)
        if not 1 <= args.k <= args.planted:
            raise UsageError("--planted M needs 1 <= k <= M")
        graph, planted = planted_clique(args.planted, args.k, seed)
    try:
        ci = CliqueInstance(graph, args.k)
        C = _fraction(args.C, "C") if args.C is not None else None
        inst = build_instance(ci, args.family, args.constants, args.d, C)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    clique = planted if planted is not None else has_k_clique(ci)
    witness = None
    if clique is not None:
        pt = clique_to_critical_point(ci, clique, args.family)
        witness = {"clique": sorted(clique), "point": [fraction_str(v) for v in pt]}
    obj = inst.to_json_obj(witness)
    if seed is not None:
        obj["seed"] = seed
    _emit(args, json.dumps(_stamp(args, obj), indent=1, sort_keys=True) + "\n")
    return 0


def cmd_oracle(args) -> int:
    clique = has_k_clique(_clique_instance(args))
    _emit(args, ("none" if clique is None else " ".join(map(str, sorted(clique)))) + "\n")
    return 0


def cmd_verify(args) -> int:
    check = args.check
    threads = _threads(args)
    seed = _seed(args)
    try:
        if check == "fujiwara":
            alphas = [tuple(_fraction(a, "alphas") for a in args.alphas)] if args.alphas else None
            rep = V.check_root_bound(alphas, num_samples=args.samples, seed=seed)
        elif check in ("certify-critical",):
            rep = _verify_certify(args)
        elif check == "decode":
            raise UsageError("use the decode verb")
        else:
            ci = _clique_instance(args)
            C = _fraction(args.C, "C")
            if check == "corner-sweep":
                rep = V.corner_sweep(ci, C, limit=args.limit)
            elif check == "rounding":
                eps = _fraction(args.eps or "1/100", "eps")
                rep = V.check_rounding_bound(ci, C, eps, args.samples, seed, workers=threads)
            elif check == "lipschitz":
                eps = _fraction(args.eps or "1/2", "eps")
                rep = V.check_lipschitz(ci, C, eps, args.samples, seed, workers=threads)
            elif check == "grad-floor":
                fb = V.grad_floor(ci, C, args.family)
                rep = V.VerificationReport("grad-floor", V.PASS, 0, fb.exact, None, fb.to_json_obj())
            else:
                rep = _verify_box(args, ci, C, seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rep.details.setdefault("seed", seed)
    _emit(args, _dump(_stamp(args, rep.to_json_obj())))
    return rep.exit_code


def _verify_certify(args) -> V.VerificationReport:
    if not args.instance:
        raise UsageError("certify-critical needs --instance")
    inst, obj = _load_instance(args.instance)
    if args.point:
        pt = _load_point(args.point)
    elif isinstance(obj.get("witness"), dict):
        pt = tuple(Fraction(v) for v in obj["witness"]["point"])
    else:
        raise UsageError("instance has no embedded witness; pass --point")
    cert = V.certify_critical(inst, pt)
    if not cert.exact:
        status = V.INCONCLUSIVE
    else:
        status = V.PASS if cert.exact_zero else V.FAIL
    return V.VerificationReport("certify-critical", status, 1, cert.residual, pt, cert.to_json_obj())


def _verify_box(args, ci: CliqueInstance, C: Fraction, seed: int) -> V.VerificationReport:
    slack = _fraction(args.slack, "slack")
    if args.point:
        pt = _load_point(args.point)
    else:
        rec = minimize(build_g(ci, C), _solver_config(args, seed, polish_dps=60))
        pt = rec.best_point
    return V.check_minimizer_box(ci, C, pt, grad_tol=args.grad_tol, slack=slack, near_unit=args.near_unit,
                                 near_unit_slack=slack)


def cmd_solve(args) -> int:
    inst, _ = _load_instance(args.instance)
    seed = _seed(args)
    cfg = _solver_config(args, seed, args.polish_dps)
    try:
        if args.objective == "grad-norm":
            rec = min_grad_norm(inst, cfg)
        else:
            if not hasattr(inst.function, "gradient"):
                raise UsageError("value objective needs a polynomial family")
            rec = minimize(inst.function, cfg)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    obj = rec.to_json_obj()
    obj["seed"] = seed
    _emit(args, _dump(_stamp(args, obj)))
    return 0 if rec.converged else 2


def cmd_bench(args) -> int:
    insts = [_load_instance(p)[0] for p in args.instances]
    cfg = _solver_config(args, _seed(args))
    rows = bench(insts, cfg, start=args.start, ids=[os.path.basename(p) for p in args.instances])
    _emit(args, rows_to_csv(rows) if args.format == "csv" else rows_to_json(rows))
    return 1 if any(r.floor_respected is False for r in rows) else 0


def cmd_decode(args) -> int:
    inst, _ = _load_instance(args.instance)
    pt = _load_point(args.point)
    if len(pt) != inst.n:
        raise UsageError(f"point has {len(pt)} coordinates, instance has n={inst.n}")
    res = V.near_decode(inst, pt, args.alpha)
    _emit(args, ("clique " + " ".join(map(str, sorted(res.clique))) if res.success else "failed") + "\n")
    return 0 if res.success else 1


COMMANDS = {"gen": cmd_gen, "oracle": cmd_oracle, "verify": cmd_verify, "solve": cmd_solve,
            "bench": cmd_bench, "decode": cmd_decode}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.verb](args)
    except (UsageError, GraphFormatError) as exc:
        print(f"critgen {args.verb}: {exc}", file=sys.stderr)
        return EX_USAGE


if __name__ == "__main__":
    sys.exit(main())
