"""Truncated one-variable power series with exact rational coefficients.

A series is a list ``s`` with ``s[k]`` the coefficient of ``z^k``; every
function takes the truncation order ``N`` and returns a list of length ``N + 1``.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Sequence

from gmpy2 import mpq

from .grading import to_q

Series = List[mpq]


def make(coeffs, N: int) -> Series:
    """Series from a sequence or a ``{power: coeff}`` mapping, padded or cut to ``N``."""
    out = [mpq(0)] * (N + 1)
    items = coeffs.items() if isinstance(coeffs, dict) else enumerate(coeffs)
    for k, c in items:
        if 0 <= k <= N:
            out[k] += to_q(c)
    return out


def identity(N: int) -> Series:
    return make({1: 1}, N)


def valuation(s: Sequence) -> float:
    return next((k for k, c in enumerate(s) if c), float("inf"))


def add(a: Sequence, b: Sequence, N: int) -> Series:
    return [(a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0) for k in range(N + 1)]


def scale(a: Sequence, c, N: int) -> Series:
    c = to_q(c)
    return [c * (a[k] if k < len(a) else 0) for k in range(N + 1)]


def mul(a: Sequence, b: Sequence, N: int) -> Series:
    out = [mpq(0)] * (N + 1)
    for i, ai in enumerate(a[: N + 1]):
        if ai:
            for j, bj in enumerate(b[: N + 1 - i]):
                if bj:
                    out[i + j] += ai * bj
    return out


def shift(a: Sequence, k: int, N: int) -> Series:
    """Multiply by ``z^k``; a negative ``k`` divides and needs ``valuation(a) >= -k``."""
    if k < 0 and valuation(a) < -k:
        raise ValueError(f"series is not divisible by z^{-k}")
    return make({i + k: c for i, c in enumerate(a) if c}, N)


def inverse(a: Sequence, N: int) -> Series:
    if not a or not a[0]:
        raise ZeroDivisionError("series with zero constant term is not invertible")
    out = [mpq(0)] * (N + 1)
    inv0 = 1 / to_q(a[0])
    out[0] = inv0
    for k in range(1, N + 1):
        acc = sum((a[i] * out[k - i] for i in range(1, min(k, len(a) - 1) + 1) if a[i]), mpq(0))
        out[k] = -acc * inv0
    return out


def deriv(a: Sequence, N: int) -> Series:
    return make({k - 1: k * c for k, c in enumerate(a) if k and c}, N)


def integrate(a: Sequence, N: int) -> Series:
    return make({k + 1: c / (k + 1) for k, c in enumerate(a) if c}, N)


def compose(f: Sequence, g: Sequence, N: int) -> Series:
    """``f(g(z))`` for ``g(0) = 0``."""
    if g and g[0]:
        raise ValueError("inner series must vanish at 0")
    out = [mpq(0)] * (N + 1)
    # Horner from the top keeps every intermediate truncated
    for c in reversed(list(f[: N + 1])):
        out = mul(out, g, N)
        out[0] += c
    return out


def power(a: Sequence, r, N: int) -> Series:
    """``a^r`` for rational ``r`` and ``a(0) = 1`` (binomial series)."""
    r = to_q(r)
    if a[0] != 1:
        raise ValueError("rational powers need constant term 1")
    # a' * P = r * a * P' solved coefficient by coefficient
    out = [mpq(0)] * (N + 1)
    out[0] = mpq(1)
    for k in range(1, N + 1):
        # k*P_k = sum_{i=1..k} (r*i - (k - i)) a_i P_{k-i}
        acc = mpq(0)
        for i in range(1, min(k, len(a) - 1) + 1):
            if a[i]:
                acc += (r * i - (k - i)) * a[i] * out[k - i]
        out[k] = acc / k
    return out


def reversion(g: Sequence, N: int) -> Series:
    """Compositional inverse of ``g`` with ``g(0) = 0``, ``g'(0) != 0``."""
    if g[0] or not g[1]:
        raise ValueError("reversion needs g(0) = 0 and g'(0) != 0")
    inv = identity(N)
    inv[1] = 1 / to_q(g[1])
    # Newton-free fixed point: refine one coefficient at a time
    for k in range(2, N + 1):
        err = compose(g, inv, k)
        inv[k] -= err[k] * inv[1]
    return inv


def apply_field(w: Sequence, f: Sequence, N: int) -> Series:
    """The derivation ``w(z) d/dz`` applied to ``f``."""
    return mul(w, deriv(f, N), N)


def flow_map(w: Sequence, N: int) -> Series:
    """Time-one map ``exp(W)(z)`` of ``W = w(z) d/dz`` with ``w`` of valuation at least 2."""
    if valuation(w) < 2:
        raise ValueError("flow map needs a field of order at least 2")
    out = identity(N)
    term = identity(N)
    k = 1
    while True:
        term = scale(apply_field(w, term, N), mpq(1, k), N)
        if not any(term):
            return out
        out = add(out, term, N)
        k += 1


def to_dict(s: Iterable) -> Dict[int, mpq]:
    return {k: c for k, c in enumerate(s) if c}
