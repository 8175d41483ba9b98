"""Small dict-of-dicts sparse matrix over any commutative ring.

Entries can be gmpy/sympy domain elements or sympy ``PolyElement``s; the
class only needs ``+``, ``-``, ``*`` and truthiness for zero tests.
"""
from __future__ import annotations

from typing import Any, Callable, Iterable, Iterator


class SparseMatrix:
    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: dict[int, dict[int, Any]] | None = None):
        self.nrows = nrows
        self.ncols = ncols
        self.rows: dict[int, dict[int, Any]] = rows if rows is not None else {}

    @classmethod
    def from_items(cls, nrows: int, ncols: int, items: Iterable[tuple[int, int, Any]]) -> "SparseMatrix":
        out = cls(nrows, ncols)
        for i, j, v in items:
            out.add_to(i, j, v)
        return out

    @classmethod
    def identity(cls, n: int, one: Any) -> "SparseMatrix":
        return cls(n, n, {i: {i: one} for i in range(n)})

    def add_to(self, i: int, j: int, v: Any) -> None:
        if not v:
            return
        row = self.rows.setdefault(i, {})
        w = row.get(j)
        w = v if w is None else w + v
        if w:
            row[j] = w
        else:
            row.pop(j, None)
            if not row:
                del self.rows[i]

    def get(self, i: int, j: int, default: Any = 0) -> Any:
        return self.rows.get(i, {}).get(j, default)

    def items(self) -> Iterator[tuple[int, int, Any]]:
        for i, row in self.rows.items():
            for j, v in row.items():
                yield i, j, v

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows.values())

    def is_zero(self) -> bool:
        return not self.rows

    def copy(self) -> "SparseMatrix":
        return SparseMatrix(self.nrows, self.ncols, {i: dict(r) for i, r in self.rows.items()})

    def map(self, fn: Callable[[Any], Any]) -> "SparseMatrix":
        out = SparseMatrix(self.nrows, self.ncols)
        for i, j, v in self.items():
            out.add_to(i, j, fn(v))
        return out

    def scale(self, c: Any) -> "SparseMatrix":
        return self.map(lambda v: c * v)

    def transpose(self) -> "SparseMatrix":
        out = SparseMatrix(self.ncols, self.nrows)
        for i, j, v in self.items():
            out.add_to(j, i, v)
        return out

    def _check_shape(self, other: "SparseMatrix") -> None:
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        self._check_shape(other)
        out = self.copy()
        for i, j, v in other.items():
            out.add_to(i, j, v)
        return out

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        self._check_shape(other)
        out = self.copy()
        for i, j, v in other.items():
            out.add_to(i, j, -v)
        return out

    def __neg__(self) -> "SparseMatrix":
        return self.map(lambda v: -v)

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        out = SparseMatrix(self.nrows, other.ncols)
        for i, row in self.rows.items():
            acc: dict[int, Any] = {}
            for k, a in row.items():
                orow = other.rows.get(k)
                if not orow:
                    continue
                for j, b in orow.items():
                    w = acc.get(j)
                    acc[j] = a * b if w is None else w + a * b
            acc = {j: v for j, v in acc.items() if v}
            if acc:
                out.rows[i] = acc
        return out

    def commutator(self, other: "SparseMatrix") -> "SparseMatrix":
        return self @ other - other @ self

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def weighted_trace(self, weights: list[int], zero: Any = 0) -> Any:
        """Sum of diagonal entries times integer weights (parity signs)."""
        acc = zero
        for i, row in self.rows.items():
            v = row.get(i)
            if v:
                acc = acc + weights[i] * v
        return acc

    def trace_of_product(self, other: "SparseMatrix", weights: list[int], zero: Any = 0) -> Any:
        """Weighted trace of self @ other without forming the product."""
        acc = zero
        for i, row in self.rows.items():
            w = weights[i]
            for k, a in row.items():
                b = other.rows.get(k, {}).get(i)
                if b:
                    acc = acc + w * (a * b)
        return acc

    def to_dense(self, zero: Any = 0) -> list[list[Any]]:
        out = [[zero] * self.ncols for _ in range(self.nrows)]
        for i, j, v in self.items():
            out[i][j] = v
        return out
