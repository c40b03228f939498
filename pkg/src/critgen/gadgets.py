"""Hard instance families built from a clique instance (G, k).

Every family shares the quartic gadget

    g(x) = C^2 * ( (sum x_i - 2k + m)^2
                   + N^2 * sum (x_i^2 - 1)^2
                   + sum_{i<j} (1 - A_ij)^2 (x_i + 1)^2 (x_j + 1)^2 )

with N = 160 m^2 (m^2 + 1), whose zeros are exactly the +-1 indicator
vectors of k-cliques. Variable blocks are always laid out in the order
x (m), y (m + 1), z (one per pair i < j, lexicographic), w.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

from critgen.graphkit import CliqueInstance, Graph, indicator_to_sign
from critgen.polycore import (
    ExpOfPoly,
    ExpTimesPoly,
    Polynomial,
    fraction_str,
    parse_polynomial,
)

FAMILIES = ("gadget", "cubic", "quartic", "exp-gadget", "exp-poly", "sos-exp")
CONSTANT_MODES = ("canonical", "unit", "power-d", "custom")


def big_n(m: int) -> int:
    return 160 * m * m * (m * m + 1)


def pairs(m: int) -> list:
    """All pairs (i, j), 1 <= i < j <= m, in lexicographic order."""
    return list(combinations(range(1, m + 1), 2))


def family_dimension(family: str, m: int) -> int:
    full = m + (m + 1) + m * (m - 1) // 2
    if family == "gadget":
        return m
    if family in ("cubic", "quartic", "exp-poly"):
        return full
    if family in ("exp-gadget", "sos-exp"):
        return m + 1
    raise ValueError(f"unknown family {family!r}")


def resolve_constant(family: str, m: int, mode: str = "canonical", d: int | None = None, C=None) -> Fraction:
    """The scaling constant C for a family under a constants mode.

    canonical: cubic (and gadget, exp-poly, which reuse the cubic's C)
    2^(n+1) (m^2+1); quartic 2^(n+2) (m^2+1); exp-gadget and sos-exp 1.
    """
    if mode not in CONSTANT_MODES:
        raise ValueError(f"unknown constants mode {mode!r}")
    n_full = m + (m + 1) + m * (m - 1) // 2
    if mode == "unit":
        return Fraction(1)
    if mode == "custom":
        if C is None:
            raise ValueError("custom constants mode needs an explicit C")
        C = Fraction(C)
        if C == 0:
            raise ValueError("C must be nonzero")
        return C
    if mode == "power-d":
        if d is None or int(d) != d or d < 1:
            raise ValueError("power-d mode needs a positive integer d")
        n = family_dimension(family, m)
        return Fraction(n ** int(d) * (m * m + 1))
    if family in ("cubic", "gadget", "exp-poly"):
        return Fraction(2 ** (n_full + 1) * (m * m + 1))
    if family == "quartic":
        return Fraction(2 ** (n_full + 2) * (m * m + 1))
    if family in ("exp-gadget", "sos-exp"):
        return Fraction(1)
    raise ValueError(f"unknown family {family!r}")


@dataclass(frozen=True)
class GadgetParams:
    m: int
    k: int
    n: int
    N: int
    C: Fraction
    family: str
    constants_mode: str
    d: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.N != big_n(self.m):
            raise ValueError("N must equal 160 m^2 (m^2 + 1)")


@dataclass(frozen=True)
class Instance:
    """A generated function together with its constants, layout and graph."""

    params: GadgetParams
    function: Polynomial | ExpTimesPoly | ExpOfPoly
    layout: tuple
    graph: Graph

    def __post_init__(self):
        if self.function.nvars != self.params.n:
            raise ValueError(f"function has {self.function.nvars} variables, expected n={self.params.n}")
        if sum(length for _, _, length in self.layout) != self.params.n:
            raise ValueError("layout does not cover all variables")

    @property
    def family(self) -> str:
        return self.params.family

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def clique_instance(self) -> CliqueInstance:
        return CliqueInstance(self.graph, self.params.k)

    def block(self, name: str) -> tuple:
        for b, start, length in self.layout:
            if b == name:
                return start, length
        raise KeyError(name)

    @property
    def polynomial(self) -> Polynomial:
        """The polynomial part: the function itself, or the base / inner polynomial."""
        f = self.function
        if isinstance(f, Polynomial):
            return f
        return f.base if isinstance(f, ExpTimesPoly) else f.inner

    @cached_property
    def gradient_polys(self) -> list:
        return self.polynomial.gradient()

    @cached_property
    def grad_norm_sq(self) -> Polynomial:
        if not isinstance(self.function, Polynomial):
            raise TypeError("grad_norm_sq is defined for polynomial families only")
        return self.function.grad_norm_sq()

    def to_json_obj(self, witness: dict | None = None) -> dict:
        p = self.params
        obj = {
            "family": p.family,
            "m": p.m,
            "k": p.k,
            "n": p.n,
            "N": p.N,
            "C": fraction_str(p.C),
            "constants": p.constants_mode,
            "d": p.d,
            "layout": [{"block": b, "start": s, "length": ln} for b, s, ln in self.layout],
            "graph": self.graph.to_json_obj(),
            "polynomial": self.polynomial.to_text(),
        }
        if isinstance(self.function, ExpTimesPoly):
            obj["exp_variable"] = self.function.w_index
        elif isinstance(self.function, ExpOfPoly):
            obj["exp_of_polynomial"] = True
        if witness is not None:
            obj["witness"] = witness
        return obj

    def to_json(self, witness: dict | None = None) -> str:
        return json.dumps(self.to_json_obj(witness), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Instance":
        graph = Graph(obj["m"], frozenset(tuple(e) for e in obj["graph"]["edges"]))
        params = GadgetParams(
            m=obj["m"], k=obj["k"], n=obj["n"], N=obj["N"], C=Fraction(obj["C"]),
            family=obj["family"], constants_mode=obj["constants"], d=obj.get("d"),
        )
        poly = parse_polynomial(obj["polynomial"], obj["n"])
        if "exp_variable" in obj:
            fn = ExpTimesPoly(obj["exp_variable"], poly)
        elif obj.get("exp_of_polynomial"):
            fn = ExpOfPoly(poly)
        else:
            fn = poly
        layout = tuple((b["block"], b["start"], b["length"]) for b in obj["layout"])
        return cls(params, fn, layout, graph)

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        return cls.from_json_obj(json.loads(text))


def _layout(*blocks) -> tuple:
    out, start = [], 0
    for name, length in blocks:
        out.append((name, start, length))
        start += length
    return tuple(out)


def _clique_system(inst: CliqueInstance, nvars: int, scale_n: int) -> list:
    """q_1 = sum x - 2k + m, q_{1+i} = scale_n (x_i^2 - 1), then one entry per pair."""
    m, k = inst.m, inst.k
    xs = Polynomial.variables(nvars)[:m]
    one = Polynomial.constant(1, nvars)
    system = [sum(xs, Polynomial.zero(nvars)) - (2 * k - m)]
    system += [scale_n * (x * x - one) for x in xs]
    for i, j in pairs(m):
        if inst.graph.adjacent(i, j):
            system.append(Polynomial.zero(nvars))
        else:
            system.append((xs[i - 1] + one) * (xs[j - 1] + one))
    return system


def build_q(inst: CliqueInstance) -> list:
    """The residual vector q with C^2 * |q(x)|^2 = g(x)."""
    return _clique_system(inst, inst.m, big_n(inst.m))


def clique_system(inst: CliqueInstance) -> list:
    """The unscaled quadratic system whose common zeros are the k-clique indicators."""
    return _clique_system(inst, inst.m, 1)


def build_g(inst: CliqueInstance, C=1) -> Polynomial:
    C = Fraction(C)
    if C == 0:
        raise ValueError("C must be nonzero")
    total = Polynomial.zero(inst.m)
    for q in build_q(inst):
        if not q.is_zero():
            total = total + q * q
    return total * (C * C)


def _cubic(inst: CliqueInstance, C: Fraction) -> Polynomial:
    m = inst.m
    n = family_dimension("cubic", m)
    v = Polynomial.variables(n)
    one = Polynomial.constant(1, n)
    x = v[:m]
    y = v[m:2 * m + 1]
    z = v[2 * m + 1:]
    N = big_n(m)
    p = y[0] * (sum(x, Polynomial.zero(n)) - (2 * inst.k - m))
    for i in range(m):
        p = p + N * y[i + 1] * (x[i] * x[i] - one)
    for zz, (i, j) in zip(z, pairs(m)):
        if not inst.graph.adjacent(i, j):
            p = p + zz * (x[i - 1] + one) * (x[j - 1] + one)
    return p * C


def _params(inst: CliqueInstance, family: str, mode: str, d, C) -> GadgetParams:
    return GadgetParams(
        m=inst.m, k=inst.k, n=family_dimension(family, inst.m), N=big_n(inst.m),
        C=resolve_constant(family, inst.m, mode, d, C), family=family,
        constants_mode=mode, d=d if mode == "power-d" else None,
    )


def _full_layout(m: int) -> tuple:
    return _layout(("x", m), ("y", m + 1), ("z", m * (m - 1) // 2))


def build_cubic(inst: CliqueInstance, mode: str = "canonical", d: int | None = None, C=None) -> Instance:
    params = _params(inst, "cubic", mode, d, C)
    return Instance(params, _cubic(inst, params.C), _full_layout(inst.m), inst.graph)


def build_quartic(inst: CliqueInstance, mode: str = "canonical", d: int | None = None, C=None) -> Instance:
    """p(x, w) = 1/2 |w + C q(x)|^2 with w one entry per component of q."""
    params = _params(inst, "quartic", mode, d, C)
    m, n = inst.m, params.n
    qs = [q.with_nvars(n) for q in build_q(inst)]
    ws = Polynomial.variables(n)[m:]
    p = Polynomial.zero(n)
    for w, q in zip(ws, qs):
        r = w + q * params.C
        p = p + r * r
    return Instance(params, p * Fraction(1, 2), _layout(("x", m), ("w", n - m)), inst.graph)


def build_exp_g(inst: CliqueInstance) -> Instance:
    """f(x, w) = exp(w) g(x) with C = 1; w is the last variable."""
    params = _params(inst, "exp-gadget", "unit", None, None)
    base = build_g(inst, 1).with_nvars(inst.m + 1)
    return Instance(params, ExpTimesPoly(inst.m, base), _layout(("x", inst.m), ("w", 1)), inst.graph)


def build_exp_of_poly(p: Polynomial) -> ExpOfPoly:
    return ExpOfPoly(p)


def build_exp_cubic(inst: CliqueInstance, mode: str = "canonical", d: int | None = None, C=None) -> Instance:
    params = _params(inst, "exp-poly", mode, d, C)
    return Instance(params, ExpOfPoly(_cubic(inst, params.C)), _full_layout(inst.m), inst.graph)


def build_sos_exp(system: Sequence[Polynomial], nvars: int | None = None) -> ExpTimesPoly:
    """exp(w) * sum q_i(x)^2 for a system of polynomials of degree at most 2.

    The exponential variable is appended after the system's variables.
    """
    if nvars is None:
        if not system:
            raise ValueError("an empty system needs an explicit nvars")
        nvars = system[0].nvars
    for q in system:
        if q.nvars != nvars:
            raise ValueError("all system polynomials must share nvars")
        if q.degree() > 2:
            raise ValueError(f"system polynomials must have degree <= 2, got degree {q.degree()}")
    base = Polynomial.zero(nvars + 1)
    for q in system:
        q = q.with_nvars(nvars + 1)
        base = base + q * q
    return ExpTimesPoly(nvars, base)


def build_sos_exp_instance(inst: CliqueInstance) -> Instance:
    params = _params(inst, "sos-exp", "unit", None, None)
    f = build_sos_exp(clique_system(inst), inst.m)
    return Instance(params, f, _layout(("x", inst.m), ("w", 1)), inst.graph)


def build_gadget_instance(inst: CliqueInstance, mode: str = "canonical", d: int | None = None, C=None) -> Instance:
    params = _params(inst, "gadget", mode, d, C)
    return Instance(params, build_g(inst, params.C), _layout(("x", inst.m)), inst.graph)


def build_instance(inst: CliqueInstance, family: str, mode: str | None = None,
                   d: int | None = None, C=None) -> Instance:
    """Dispatch on family name; ``mode`` defaults to canonical."""
    mode = mode or "canonical"
    if family == "gadget":
        return build_gadget_instance(inst, mode, d, C)
    if family == "cubic":
        return build_cubic(inst, mode, d, C)
    if family == "quartic":
        return build_quartic(inst, mode, d, C)
    if family == "exp-poly":
        return build_exp_cubic(inst, mode, d, C)
    if family in ("exp-gadget", "sos-exp"):
        if mode not in ("canonical", "unit"):
            raise ValueError(f"family {family!r} has the fixed constant C = 1")
        return build_exp_g(inst) if family == "exp-gadget" else build_sos_exp_instance(inst)
    raise ValueError(f"unknown family {family!r}")


def clique_to_critical_point(inst: CliqueInstance, witness, family: str) -> tuple:
    """Exact critical point for a verified k-clique: x = +-1 indicator, all other blocks 0."""
    witness = frozenset(witness)
    if len(witness) != inst.k or not inst.graph.is_clique(witness):
        raise ValueError(f"{sorted(witness)} is not a {inst.k}-clique")
    x = [Fraction(s) for s in indicator_to_sign(witness, inst.m)]
    n = family_dimension(family, inst.m)
    return tuple(x + [Fraction(0)] * (n - inst.m))
