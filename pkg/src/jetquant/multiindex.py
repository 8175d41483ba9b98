"""Multi-indices, truncated jet index sets and the binomial helpers.

A multi-index is a plain tuple of non-negative ints. Jet index sets are
enumerated in graded lexicographic order: by order first, then by
ascending tuple order within a grade.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import product
from math import comb
from typing import Iterable, Sequence

MultiIndex = tuple[int, ...]


def make_index(components: Iterable[int]) -> MultiIndex:
    m = tuple(int(c) for c in components)
    if any(c < 0 for c in m):
        raise ValueError(f"multi-index components must be >= 0, got {m}")
    return m


def order(m: Sequence[int]) -> int:
    return sum(m)


def unit(N: int, mu: int) -> MultiIndex:
    if not 0 <= mu < N:
        raise IndexError(f"direction {mu} out of range for N={N}")
    return tuple(1 if i == mu else 0 for i in range(N))


def zero(N: int) -> MultiIndex:
    return (0,) * N


def add(m: Sequence[int], n: Sequence[int]) -> MultiIndex:
    return tuple(a + b for a, b in zip(m, n))


def sub(m: Sequence[int], n: Sequence[int]) -> tuple[int, ...]:
    """Componentwise difference; may have negative entries."""
    return tuple(a - b for a, b in zip(m, n))


def is_valid(m: Sequence[int]) -> bool:
    return all(c >= 0 for c in m)


def factorial_index(m: Sequence[int]) -> int:
    out = 1
    for c in m:
        for k in range(2, c + 1):
            out *= k
    return out


@lru_cache(maxsize=None)
def _grade(N: int, k: int) -> tuple[MultiIndex, ...]:
    return tuple(c for c in product(range(k + 1), repeat=N) if sum(c) == k)


@lru_cache(maxsize=None)
def enumerate_indices(N: int, p: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of length N and order <= p, graded-lex ordered."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if p < 0:
        return ()
    out: list[MultiIndex] = []
    for k in range(p + 1):
        out.extend(_grade(N, k))
    return tuple(out)


def binom(n: int, k: int) -> int:
    """Binomial coefficient that vanishes for k < 0 or k > n >= 0."""
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


def jet_count(N: int, p: int, shift: int = 0) -> int:
    """C(N+p, p+shift), the counting function used by the charge tables."""
    return binom(N + p, p + shift)


def multi_binomial(n: Sequence[int], m: Sequence[int]) -> int:
    out = 1
    for a, b in zip(n, m):
        c = binom(a, b)
        if c == 0:
            return 0
        out *= c
    return out


def np1_rows(N: int, p: int) -> list[tuple[int, int, int]]:
    """The three recorded difference identities as (lhs_a, lhs_b, rhs)."""
    return [
        (binom(N + p, p - s), binom(N + p - 1, p - 1 - s), binom(N - 1 + p, p - s))
        for s in (0, 1, 2)
    ]


def verify_np1(N: int, p: int) -> bool:
    return all(a - b == c for a, b, c in np1_rows(N, p))
