"""Sparse multivariate polynomials over the rationals.

A monomial is a tuple of ``(variable, exponent)`` pairs sorted by variable,
with every exponent positive; the empty tuple is the constant monomial.
Coefficients are :class:`fractions.Fraction` and zero coefficients are never
stored, so two equal polynomials always have identical term maps.

Evaluation is exact when every coordinate is an ``int`` or ``Fraction`` and
double precision otherwise. Large batches go through :class:`CompiledSystem`,
which evaluates a family of polynomials at many points at once, either in
floating point or exactly on points sharing a common denominator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import mpmath
import numpy as np

_INT64_SAFE = 2**62


class FloatingOverflowError(OverflowError):
    """A floating-mode evaluation left the range of double precision."""


class DimensionError(ValueError):
    """Point length does not match the number of variables."""


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (bool, float, complex)):
        raise TypeError(f"coefficients must be exact rationals, got {c!r}")
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    if isinstance(c, Rational):
        return Fraction(c.numerator, c.denominator)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"coefficients must be exact rationals, got {c!r}")


def _mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        va, ea = a[i]
        vb, eb = b[j]
        if va == vb:
            out.append((va, ea + eb))
            i += 1
            j += 1
        elif va < vb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def _mono_degree(mono: tuple) -> int:
    return sum(e for _, e in mono)


def fraction_str(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


@dataclass(frozen=True)
class Point:
    """Dense coordinates tagged with an evaluation mode."""

    coords: tuple
    exact: bool

    @classmethod
    def exact_of(cls, values: Iterable) -> "Point":
        return cls(tuple(_exact_coord(v) for v in values), True)

    @classmethod
    def floating_of(cls, values: Iterable) -> "Point":
        return cls(tuple(float(v) for v in values), False)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __iter__(self):
        return iter(self.coords)


def _exact_coord(v) -> Fraction:
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"non-finite coordinate {v!r}")
        return Fraction(v)
    if isinstance(v, np.floating):
        return Fraction(float(v))
    if isinstance(v, mpmath.mpf):
        if not mpmath.isfinite(v):
            raise ValueError(f"non-finite coordinate {v!r}")
        # man_exp drops the sign; the raw tuple keeps it
        sign, man, exp, _ = v._mpf_
        val = Fraction(int(man)) * (Fraction(2) ** int(exp))
        return -val if sign else val
    return _as_fraction(v)


def _coords(pt) -> tuple:
    if isinstance(pt, Point):
        return pt.coords
    if isinstance(pt, np.ndarray):
        return tuple(pt.tolist())
    return tuple(pt)


def _is_exact(coords: Sequence) -> bool:
    return all(isinstance(c, (int, Fraction, np.integer)) and not isinstance(c, bool) for c in coords)


class Polynomial:
    """Immutable sparse polynomial in ``nvars`` variables with rational coefficients."""

    __slots__ = ("nvars", "_terms", "_hash", "_gradient", "_compiled")

    def __init__(self, nvars: int, terms: Mapping | Iterable = ()):
        if nvars < 0:
            raise ValueError("nvars must be nonnegative")
        self.nvars = int(nvars)
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict = {}
        for mono, c in items:
            mono = self._normalize_mono(mono)
            acc[mono] = acc.get(mono, Fraction(0)) + _as_fraction(c)
        self._terms = {m: c for m, c in acc.items() if c != 0}
        self._hash = None
        self._gradient = None
        self._compiled = None

    def _normalize_mono(self, mono) -> tuple:
        if isinstance(mono, Mapping):
            mono = mono.items()
        d: dict = {}
        for v, e in mono:
            v, e = int(v), int(e)
            if e < 0:
                raise ValueError(f"negative exponent {e}")
            if not 0 <= v < self.nvars:
                raise ValueError(f"variable index {v} outside 0..{self.nvars - 1}")
            if e:
                d[v] = d.get(v, 0) + e
        return tuple(sorted(d.items()))

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> "Polynomial":
        # trusted constructor: monomials normalized, coefficients nonzero Fractions
        p = cls.__new__(cls)
        p.nvars = nvars
        p._terms = terms
        p._hash = None
        p._gradient = None
        p._compiled = None
        return p

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, c, nvars: int) -> "Polynomial":
        c = _as_fraction(c)
        return cls._raw(nvars, {(): c} if c else {})

    @classmethod
    def variable(cls, i: int, nvars: int) -> "Polynomial":
        if not 0 <= i < nvars:
            raise ValueError(f"variable index {i} outside 0..{nvars - 1}")
        return cls._raw(nvars, {((i, 1),): Fraction(1)})

    @classmethod
    def variables(cls, nvars: int) -> list:
        return [cls.variable(i, nvars) for i in range(nvars)]

    @property
    def terms(self) -> Mapping:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((_mono_degree(m) for m in self._terms), default=0)

    def degree_in(self, i: int) -> int:
        return max((e for m in self._terms for v, e in m if v == i), default=0)

    def involves(self, i: int) -> bool:
        return any(v == i for m in self._terms for v, _ in m)

    def support(self) -> frozenset:
        return frozenset(v for m in self._terms for v, _ in m)

    def constant_term(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def with_nvars(self, nvars: int) -> "Polynomial":
        """Same polynomial viewed in a larger (or equal) variable space."""
        if nvars < self.nvars and any(v >= nvars for v in self.support()):
            raise ValueError("polynomial uses variables beyond the requested count")
        return Polynomial._raw(nvars, dict(self._terms))

    def shifted(self, offset: int, nvars: int) -> "Polynomial":
        """Relabel variable ``i`` as ``i + offset`` inside ``nvars`` variables."""
        terms = {tuple((v + offset, e) for v, e in m): c for m, c in self._terms.items()}
        if any(v >= nvars or v < 0 for m in terms for v, _ in m):
            raise ValueError("shift moves variables outside the target space")
        return Polynomial._raw(nvars, terms)

    # arithmetic

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise DimensionError(f"nvars mismatch: {self.nvars} vs {other.nvars}")
            return other
        return Polynomial.constant(other, self.nvars)

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        terms = dict(self._terms)
        for m, c in other._terms.items():
            s = terms.get(m, 0) + c
            if s:
                terms[m] = s
            else:
                terms.pop(m, None)
        return Polynomial._raw(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.nvars, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            try:
                c = _as_fraction(other)
            except TypeError:
                return NotImplemented
            if c == 0:
                return Polynomial.zero(self.nvars)
            return Polynomial._raw(self.nvars, {m: v * c for m, v in self._terms.items()})
        other = self._coerce(other)
        terms: dict = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                m = _mono_mul(ma, mb)
                terms[m] = terms.get(m, 0) + ca * cb
        return Polynomial._raw(self.nvars, {m: c for m, c in terms.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Polynomial.constant(1, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self._terms == other._terms
        try:
            return self == Polynomial.constant(other, self.nvars)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        if not self._terms:
            return f"Polynomial({self.nvars}, 0)"
        parts = []
        for mono, c in self.sorted_terms():
            factors = "*".join(f"x{v}" if e == 1 else f"x{v}^{e}" for v, e in mono)
            parts.append(f"{c}*{factors}" if factors else str(c))
        return f"Polynomial({self.nvars}, {' + '.join(parts)})"

    # calculus

    def diff(self, i: int) -> "Polynomial":
        if not 0 <= i < self.nvars:
            raise ValueError(f"variable index {i} outside 0..{self.nvars - 1}")
        terms = {}
        for mono, c in self._terms.items():
            for pos, (v, e) in enumerate(mono):
                if v == i:
                    rest = mono[:pos] + (((v, e - 1),) if e > 1 else ()) + mono[pos + 1:]
                    terms[rest] = terms.get(rest, 0) + c * e
                    break
        return Polynomial._raw(self.nvars, {m: c for m, c in terms.items() if c})

    def gradient(self) -> list:
        """All first partials, computed in one pass over the terms."""
        if self._gradient is None:
            parts = [dict() for _ in range(self.nvars)]
            for mono, c in self._terms.items():
                for pos, (v, e) in enumerate(mono):
                    rest = mono[:pos] + (((v, e - 1),) if e > 1 else ()) + mono[pos + 1:]
                    d = parts[v]
                    d[rest] = d.get(rest, 0) + c * e
            self._gradient = tuple(
                Polynomial._raw(self.nvars, {m: c for m, c in d.items() if c}) for d in parts
            )
        return list(self._gradient)

    def hessian_diagonal(self) -> list:
        return [g.diff(i) for i, g in enumerate(self.gradient())]

    def grad_norm_sq(self) -> "Polynomial":
        total = Polynomial.zero(self.nvars)
        for g in self.gradient():
            if not g.is_zero():
                total = total + g * g
        return total

    # evaluation

    def eval(self, pt) -> Fraction | float:
        """Evaluate at ``pt``; exact for int/Fraction coordinates, float otherwise."""
        coords = _coords(pt)
        if len(coords) != self.nvars:
            raise DimensionError(f"point has {len(coords)} coordinates, polynomial has {self.nvars} variables")
        if _is_exact(coords):
            xs = [Fraction(int(c)) if isinstance(c, (int, np.integer)) else c for c in coords]
            total = Fraction(0)
            for mono, c in self._terms.items():
                t = c
                for v, e in mono:
                    t *= xs[v] ** e
                total += t
            return total
        return self._eval_float(coords)

    def _eval_float(self, coords) -> float:
        xs = [float(c) for c in coords]
        total = 0.0
        try:
            for mono, c in self._terms.items():
                t = float(c)
                for v, e in mono:
                    t *= xs[v] ** e
                total += t
        except OverflowError as exc:
            raise FloatingOverflowError(f"floating evaluation overflowed: {exc}") from None
        if not math.isfinite(total):
            raise FloatingOverflowError("floating evaluation produced a non-finite value")
        return total

    __call__ = eval

    def compiled(self) -> "CompiledSystem":
        if self._compiled is None:
            self._compiled = CompiledSystem([self])
        return self._compiled

    # serialization

    def sorted_terms(self) -> list:
        """Terms in graded lexicographic order (highest degree first)."""
        def key(item):
            mono = item[0]
            dense = [0] * self.nvars
            for v, e in mono:
                dense[v] = e
            return (-_mono_degree(mono), [-e for e in dense])

        return sorted(self._terms.items(), key=key)

    def to_text(self) -> str:
        lines = [f"# nvars={self.nvars}"]
        for mono, c in self.sorted_terms():
            lines.append(f"{fraction_str(c)} :" + "".join(f" {v}^{e}" for v, e in mono))
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> dict:
        return {
            "nvars": self.nvars,
            "terms": [[fraction_str(c), [[v, e] for v, e in mono]] for mono, c in self.sorted_terms()],
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "Polynomial":
        return cls(obj["nvars"], [(tuple(tuple(p) for p in mono), Fraction(c)) for c, mono in obj["terms"]])

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))


def parse_polynomial(text: str, nvars: int | None = None) -> Polynomial:
    """Inverse of :meth:`Polynomial.to_text`.

    ``nvars`` may come from the ``# nvars=`` header or the argument; when both
    are present they must agree.
    """
    header = None
    terms = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("nvars="):
                header = int(body[len("nvars="):])
            continue
        coeff, sep, rest = line.partition(":")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'num/den : i^e ...', got {line!r}")
        try:
            c = Fraction(coeff.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"line {lineno}: bad coefficient {coeff.strip()!r}") from None
        mono = []
        for tok in rest.split():
            v, caret, e = tok.partition("^")
            if not caret:
                raise ValueError(f"line {lineno}: bad factor {tok!r}")
            mono.append((int(v), int(e)))
        terms.append((tuple(mono), c))
    if header is not None and nvars is not None and header != nvars:
        raise ValueError(f"nvars header {header} disagrees with argument {nvars}")
    n = header if header is not None else nvars
    if n is None:
        n = 1 + max((v for mono, _ in terms for v, _ in mono), default=-1)
    return Polynomial(n, terms)


class CompiledSystem:
    """A list of polynomials over a shared monomial basis, for batch evaluation.

    ``evaluate`` works in double precision on an ``(R, nvars)`` array.
    ``evaluate_exact`` takes integer numerators ``A`` and one common
    denominator ``D`` and returns exact values, using int64 arithmetic when a
    magnitude bound proves it cannot overflow and Python integers otherwise.
    """

    def __init__(self, polys: Sequence[Polynomial]):
        if not polys:
            raise ValueError("need at least one polynomial")
        self.nvars = polys[0].nvars
        if any(p.nvars != self.nvars for p in polys):
            raise DimensionError("all polynomials must share nvars")
        self.polys = list(polys)
        monos = sorted({m for p in polys for m in p._terms}, key=lambda m: (_mono_degree(m), m))
        self.monomials = monos
        self.degrees = [_mono_degree(m) for m in monos]
        self.maxdeg = max(self.degrees, default=0)
        index = {m: t for t, m in enumerate(monos)}
        # sparse coefficient columns: term -> [(output, coeff)]
        self.entries = [[] for _ in monos]
        for o, p in enumerate(polys):
            for m, c in p._terms.items():
                self.entries[index[m]].append((o, c))
        by_var: dict = {}
        for t, m in enumerate(monos):
            for v, e in m:
                by_var.setdefault(v, ([], []))
                by_var[v][0].append(t)
                by_var[v][1].append(e)
        self._by_var = {v: (np.array(ts), np.array(es)) for v, (ts, es) in by_var.items()}

    @cached_property
    def _float_matrix(self) -> np.ndarray:
        K = np.zeros((len(self.monomials), len(self.polys)))
        try:
            for t, ent in enumerate(self.entries):
                for o, c in ent:
                    K[t, o] = float(c)
        except OverflowError:
            raise FloatingOverflowError("coefficient exceeds double precision range") from None
        return K

    @cached_property
    def _float_plan(self) -> tuple:
        """Build every monomial as parent * one variable, one batched multiply per degree.

        The parent of a monomial drops one power of its last variable. Parents
        missing from the basis are added as helper columns.
        """
        cols = {(): 0}
        order = [()]
        pending = list(self.monomials)
        while pending:
            nxt = []
            for mono in pending:
                if mono in cols:
                    continue
                cols[mono] = len(order)
                order.append(mono)
                v, e = mono[-1]
                parent = mono[:-1] + (((v, e - 1),) if e > 1 else ())
                if parent not in cols:
                    nxt.append(parent)
            pending = nxt
        levels: dict = {}
        for mono in order[1:]:
            v, e = mono[-1]
            parent = mono[:-1] + (((v, e - 1),) if e > 1 else ())
            d = _mono_degree(mono)
            lv = levels.setdefault(d, ([], [], []))
            lv[0].append(cols[mono])
            lv[1].append(cols[parent])
            lv[2].append(v)
        steps = [tuple(np.array(a) for a in levels[d]) for d in sorted(levels)]
        out_cols = np.array([cols[m] for m in self.monomials], dtype=np.int64)
        return len(order), steps, out_cols

    def monomial_values(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        width, steps, out_cols = self._float_plan
        M = np.empty((X.shape[0], width))
        M[:, 0] = 1.0
        with np.errstate(over="ignore", invalid="ignore"):
            for target, parent, var in steps:
                M[:, target] = M[:, parent] * X[:, var]
        return M[:, out_cols]

    def evaluate(self, X) -> np.ndarray:
        """Float values, shape ``(R, len(polys))``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.nvars:
            raise DimensionError(f"points have {X.shape[1]} coordinates, expected {self.nvars}")
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.monomial_values(X) @ self._float_matrix
        return out

    def evaluate_abs(self, X) -> np.ndarray:
        """Sum of |coefficient * monomial| per output, a scale for rounding error."""
        X = np.atleast_2d(np.abs(np.asarray(X, dtype=float)))
        with np.errstate(over="ignore", invalid="ignore"):
            return self.monomial_values(X) @ np.abs(self._float_matrix)

    def evaluate_exact(self, A, D: int = 1) -> list:
        """Exact values at the points ``A / D``, as a list of rows of Fractions."""
        nums, den = self.evaluate_exact_scaled(A, D)
        return [[Fraction(int(v), den) for v in row] for row in nums]

    def evaluate_exact_scaled(self, A, D: int = 1):
        """Return ``(numerators, denominator)`` with values = numerators / denominator.

        ``numerators`` has shape ``(R, len(polys))``; entries are Python ints
        or int64 depending on the chosen path.
        """
        A = [[int(a) for a in row] for row in A]
        R = len(A)
        if R and len(A[0]) != self.nvars:
            raise DimensionError(f"points have {len(A[0])} coordinates, expected {self.nvars}")
        D = int(D)
        if D < 1:
            raise ValueError("common denominator must be positive")
        L = 1
        for ent in self.entries:
            for _, c in ent:
                L = L * c.denominator // math.gcd(L, c.denominator)
        den = L * D**self.maxdeg
        amax = max((abs(a) for row in A for a in row), default=0)
        bound = [0] * len(self.polys)
        for t, ent in enumerate(self.entries):
            size = max(amax, 1) ** self.degrees[t] * D ** (self.maxdeg - self.degrees[t])
            for o, c in ent:
                bound[o] += abs(c.numerator * (L // c.denominator)) * size
        dtype = np.int64 if max(bound, default=0) < _INT64_SAFE else object
        arr = np.array(A, dtype=dtype).reshape(R, self.nvars)
        out = np.zeros((R, len(self.polys)), dtype=dtype)
        if dtype is object:
            out[:] = 0
        powers: dict = {}

        def power(v, e):
            key = (v, e)
            if key not in powers:
                powers[key] = arr[:, v] if e == 1 else arr[:, v] ** e
            return powers[key]

        for t, mono in enumerate(self.monomials):
            if mono:
                vec = power(*mono[0])
                for v, e in mono[1:]:
                    vec = vec * power(v, e)
            else:
                vec = np.ones(R, dtype=dtype)
            scale = D ** (self.maxdeg - self.degrees[t])
            for o, c in self.entries[t]:
                k = c.numerator * (L // c.denominator) * scale
                out[:, o] += vec * (k if dtype is object else np.int64(k))
        return out, den


def common_denominator_form(points: Sequence[Sequence]) -> tuple:
    """Write rational points as integer numerators over one denominator."""
    fr = [[_exact_coord(v) for v in row] for row in points]
    D = 1
    for row in fr:
        for v in row:
            D = D * v.denominator // math.gcd(D, v.denominator)
    return [[int(v * D) for v in row] for row in fr], D


@dataclass(frozen=True)
class ExpTimesPoly:
    """``exp(x[w_index]) * base(x)`` where ``base`` does not involve ``x[w_index]``."""

    w_index: int
    base: Polynomial

    def __post_init__(self):
        if not 0 <= self.w_index < self.base.nvars:
            raise ValueError(f"w_index {self.w_index} outside 0..{self.base.nvars - 1}")
        if self.base.involves(self.w_index):
            raise ValueError("base polynomial must not involve the exponential variable")

    @property
    def nvars(self) -> int:
        return self.base.nvars

    @cached_property
    def _system(self) -> CompiledSystem:
        return CompiledSystem([self.base] + self.base.gradient())

    def value(self, pt) -> float:
        x = np.asarray(_coords(pt), dtype=float)
        ew = _safe_exp(x[self.w_index])
        out = ew * float(self._system.evaluate(x)[0, 0])
        if not math.isfinite(out):
            raise FloatingOverflowError("value overflowed")
        return out


@dataclass(frozen=True)
class ExpOfPoly:
    """``exp(inner(x))``."""

    inner: Polynomial

    @property
    def nvars(self) -> int:
        return self.inner.nvars

    @cached_property
    def _system(self) -> CompiledSystem:
        return CompiledSystem([self.inner] + self.inner.gradient())

    def value(self, pt) -> float:
        x = np.asarray(_coords(pt), dtype=float)
        return _safe_exp(float(self._system.evaluate(x)[0, 0]))


def _safe_exp(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        raise FloatingOverflowError(f"exp({v}) overflows double precision") from None


def eval_exp_gradient(f: ExpTimesPoly | ExpOfPoly, pt) -> np.ndarray:
    """Closed-form gradient of an exponential composite, in floating point."""
    x = np.asarray(_coords(pt), dtype=float)
    if x.shape != (f.nvars,):
        raise DimensionError(f"point has {x.size} coordinates, function has {f.nvars} variables")
    vals = f._system.evaluate(x)[0]
    if isinstance(f, ExpTimesPoly):
        ew = _safe_exp(x[f.w_index])
        grad = ew * vals[1:]
        grad[f.w_index] = ew * vals[0]
    else:
        grad = _safe_exp(float(vals[0])) * vals[1:]
    if not np.all(np.isfinite(grad)):
        raise FloatingOverflowError("gradient overflowed")
    return grad


def gradient_at(f, pt) -> np.ndarray:
    """Float gradient of a polynomial or exponential composite."""
    if isinstance(f, Polynomial):
        x = np.asarray(_coords(pt), dtype=float)
        g = CompiledSystem(f.gradient()).evaluate(x)[0] if f.nvars else np.zeros(0)
        if not np.all(np.isfinite(g)):
            raise FloatingOverflowError("gradient overflowed")
        return g
    return eval_exp_gradient(f, pt)


def fd_check_gradient(f, pt, h: float = 1e-5) -> float:
    """Worst relative error between central differences and the symbolic gradient.

    The relative error of coordinate i is ``|fd_i - sym_i| / max(1, |sym_i|)``.

    The stencil points ``pt +- h e_i`` are formed in double precision, but the
    function is evaluated exactly at those points (and the exponential factor
    with 50 significant digits), and the divided difference uses the exact
    realized step. Without this, cancellation among coefficients of size
    ``N**2`` swamps the difference quotient long before truncation error does.
    """
    if not (isinstance(h, (int, float)) and h > 0 and math.isfinite(h)):
        raise ValueError(f"finite-difference step must be positive, got {h!r}")
    x = np.asarray(_coords(pt), dtype=float)
    n = f.nvars
    if x.shape != (n,):
        raise DimensionError(f"point has {x.size} coordinates, function has {n} variables")
    stencil = []
    for i in range(n):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        stencil += [xp.tolist(), xm.tolist()]
    exact_x = [Fraction(float(v)) for v in x]

    if isinstance(f, Polynomial):
        poly, sym = f, None
    elif isinstance(f, ExpTimesPoly):
        poly = f.base
    elif isinstance(f, ExpOfPoly):
        poly = f.inner
    else:
        raise TypeError(f"unsupported function type {type(f).__name__}")

    A, D = common_denominator_form(stencil + [x.tolist()])
    vals = CompiledSystem([poly]).evaluate_exact(A, D)
    base_vals = [row[0] for row in vals]
    grad_polys = poly.gradient()

    with mpmath.workdps(50):
        def mpq(q: Fraction):
            return mpmath.mpf(q.numerator) / q.denominator

        if isinstance(f, Polynomial):
            fvals = [mpq(v) for v in base_vals[:-1]]
            sym = [float(g.eval(exact_x)) for g in grad_polys]
        elif isinstance(f, ExpTimesPoly):
            w = f.w_index
            fvals = [mpmath.exp(mpq(Fraction(stencil[s][w]))) * mpq(base_vals[s]) for s in range(2 * n)]
            ew = mpmath.exp(mpq(exact_x[w]))
            sym = [float(ew * mpq(g.eval(exact_x))) for g in grad_polys]
            sym[w] = float(ew * mpq(base_vals[-1]))
        else:
            fvals = [mpmath.exp(mpq(v)) for v in base_vals[:-1]]
            ep = mpmath.exp(mpq(base_vals[-1]))
            sym = [float(ep * mpq(g.eval(exact_x))) for g in grad_polys]

        worst = 0.0
        for i in range(n):
            step = Fraction(stencil[2 * i][i]) - Fraction(stencil[2 * i + 1][i])
            fd = float((fvals[2 * i] - fvals[2 * i + 1]) / mpq(step))
            err = abs(fd - sym[i]) / max(1.0, abs(sym[i]))
            worst = max(worst, err)
    return worst
