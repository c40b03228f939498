"""Exact real-root isolation for univariate rational polynomials (Sturm sequences).

Polynomials are coefficient lists, highest degree first.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def _trim(p: list) -> list:
    i = 0
    while i < len(p) - 1 and p[i] == 0:
        i += 1
    return p[i:]


def peval(p: Sequence[Fraction], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in p:
        acc = acc * t + c
    return acc


def pderiv(p: Sequence[Fraction]) -> list:
    d = len(p) - 1
    return _trim([c * (d - i) for i, c in enumerate(p[:-1])]) or [Fraction(0)]


def prem(a: Sequence[Fraction], b: Sequence[Fraction]) -> list:
    a = list(a)
    b = _trim(list(b))
    if b == [0]:
        raise ZeroDivisionError("polynomial division by zero")
    while len(a) >= len(b) and any(a):
        f = a[0] / b[0]
        for i in range(len(b)):
            a[i] -= f * b[i]
        a.pop(0)
    return _trim(a) if a else [Fraction(0)]


def pgcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> list:
    a, b = _trim(list(a)), _trim(list(b))
    while b != [0] and any(b):
        a, b = b, prem(a, b)
    return [c / a[0] for c in a]


def pquo(a: Sequence[Fraction], b: Sequence[Fraction]) -> list:
    a = list(a)
    q = []
    while len(a) >= len(b):
        f = a[0] / b[0]
        q.append(f)
        for i in range(len(b)):
            a[i] -= f * b[i]
        a.pop(0)
    return q or [Fraction(0)]


def sturm_sequence(p: Sequence[Fraction]) -> list:
    seq = [list(p), pderiv(p)]
    while len(seq[-1]) > 1:
        r = prem(seq[-2], seq[-1])
        if r == [0] or not any(r):
            break
        seq.append([-c for c in r])
    return seq


def _variations(values) -> int:
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(seq, lo: Fraction, hi: Fraction) -> int:
    """Number of distinct roots in (lo, hi]."""
    return _variations(peval(s, lo) for s in seq) - _variations(peval(s, hi) for s in seq)


def cauchy_bound(p: Sequence[Fraction]) -> Fraction:
    lead = abs(p[0])
    return 1 + max((abs(c) / lead for c in p[1:]), default=Fraction(0))


def isolate_real_roots(coeffs: Sequence) -> list:
    """Disjoint intervals ``(lo, hi]`` each containing exactly one real root, ascending."""
    p = _trim([Fraction(c) for c in coeffs])
    if len(p) < 2:
        return []
    sqfree = pquo(p, pgcd(p, pderiv(p)))
    seq = sturm_sequence(sqfree)
    B = cauchy_bound(sqfree)
    out = []
    stack = [(-B, B)]
    while stack:
        lo, hi = stack.pop()
        c = count_roots(seq, lo, hi)
        if c == 0:
            continue
        if c == 1:
            out.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        stack += [(lo, mid), (mid, hi)]
    return sorted(out)


def refine_root(coeffs: Sequence, lo: Fraction, hi: Fraction, width: Fraction) -> tuple:
    """Bisect an isolating interval ``(lo, hi]`` until ``hi - lo <= width``."""
    p = _trim([Fraction(c) for c in coeffs])
    seq = sturm_sequence(pquo(p, pgcd(p, pderiv(p))))
    while hi - lo > width:
        mid = (lo + hi) / 2
        if count_roots(seq, lo, mid) == 1:
            hi = mid
        else:
            lo = mid
    return lo, hi
