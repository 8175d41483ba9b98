"""Independent reference computations used to freeze expected values.

Nothing here imports the package's arithmetic; the point is a second route.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product


def pascal(n_max: int) -> list[list[int]]:
    """Binomial table built by additions only."""
    rows = [[1]]
    for n in range(1, n_max + 1):
        prev = rows[-1]
        rows.append([1] + [prev[k - 1] + prev[k] for k in range(1, n)] + [1])
    return rows


def pascal_binom(table: list[list[int]], n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return table[n][k]


def count_indices(N: int, p: int) -> int:
    """Multi-indices with N entries and total order <= p, counted by brute force."""
    return sum(1 for m in product(range(p + 1), repeat=N) if sum(m) <= p)


def virasoro_c(lam: Fraction, sign: int = 1, mult: int = 1) -> Fraction:
    """Central charge of mult pairs of conformal weight lam, statistics sign."""
    lam = Fraction(lam)
    return 2 * (1 - 6 * lam + 6 * lam * lam) * sign * mult

