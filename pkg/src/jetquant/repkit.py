"""gl(N) + gauge representation blocks and their seven scalar parameters.

Matrices act on basis vectors: column ``j`` of ``rho(T^mu_nu)`` is the image
of basis tensor ``j``. With that reading the tensor-density action is a
genuine representation of

    [T^mu_nu, T^s_t] = d^s_nu T^mu_t - d^mu_t T^s_nu.

Gauge generators satisfy ``[J^a, J^b] = i f^{ab}_c J^c``; matrices with an
``i`` in them live over the Gaussian rationals.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import permutations
from typing import Any, Optional, Sequence

from sympy.polys.domains import QQ, QQ_I

from .scalars import to_fraction, to_qq, to_qqi
from .sparse import SparseMatrix


class PatternMismatch(ValueError):
    """Supertraces do not have the isotropic form the parameters assume."""


class MissingAnnotation(ValueError):
    """A block lacks the data needed by the closed-form parameters."""


BOSON = "boson"
FERMION = "fermion"


# ---------------------------------------------------------------------------
# gauge algebras


@dataclass(frozen=True)
class GaugeAlgebra:
    name: str
    dim: int
    # f[a][b][c] = f^{ab}_c; None when the constants are not rational
    structure: Optional[tuple[tuple[tuple[Fraction, ...], ...], ...]]
    delta: tuple[Fraction, ...]

    @property
    def semisimple(self) -> bool:
        return not any(self.delta)

    def f(self, a: int, b: int, c: int) -> Fraction:
        if self.structure is None:
            raise MissingAnnotation(f"{self.name}: no rational structure constants")
        return self.structure[a][b][c]

    def check(self) -> None:
        """Antisymmetry, Jacobi and f^{ab}_c delta^c = 0."""
        if self.structure is None:
            return
        n = self.dim
        f = self.structure
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if f[a][b][c] != -f[b][a][c]:
                        raise ValueError("structure constants not antisymmetric")
                if any(f[a][b][c] * self.delta[c] for c in range(n)):
                    raise ValueError("privileged vector is not central")
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    for e in range(n):
                        s = sum(
                            f[a][b][d] * f[d][c][e] + f[b][c][d] * f[d][a][e] + f[c][a][d] * f[d][b][e]
                            for d in range(n)
                        )
                        if s:
                            raise ValueError("Jacobi identity fails")


def _zeros3(n: int) -> list[list[list[Fraction]]]:
    return [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]


def _freeze3(t) -> tuple:
    return tuple(tuple(tuple(r) for r in m) for m in t)


def _levi(n_off: int, n: int) -> list[list[list[Fraction]]]:
    f = _zeros3(n)
    for (a, b, c), s in {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (1, 0, 2): -1, (0, 2, 1): -1, (2, 1, 0): -1}.items():
        f[n_off + a][n_off + b][n_off + c] = Fraction(s)
    return f


@lru_cache(maxsize=None)
def gauge_algebra(name: str) -> GaugeAlgebra:
    if name == "none":
        return GaugeAlgebra("none", 0, (), ())
    if name == "u1":
        return GaugeAlgebra("u1", 1, _freeze3(_zeros3(1)), (Fraction(1),))
    if name == "su2":
        return GaugeAlgebra("su2", 3, _freeze3(_levi(0, 3)), (Fraction(0),) * 3)
    if name == "u1+su2":
        return GaugeAlgebra("u1+su2", 4, _freeze3(_levi(1, 4)), (Fraction(1),) + (Fraction(0),) * 3)
    if name == "su3":
        # f_{458}, f_{678} are sqrt(3)/2: only tabulated data is available
        return GaugeAlgebra("su3", 8, None, (Fraction(0),) * 8)
    raise ValueError(f"unknown gauge algebra {name!r}")


GAUGE_ALGEBRAS = ("none", "u1", "su2", "u1+su2", "su3")


@dataclass(frozen=True)
class GaugeIrrep:
    """Irrep of a gauge algebra: explicit matrices when available, plus the
    Dynkin data used by the closed forms."""

    algebra: str
    label: str
    dim: int
    dynkin: Fraction
    charge: Fraction = Fraction(0)  # u(1) part, gives z

    @property
    def explicit(self) -> bool:
        return gauge_algebra(self.algebra).structure is not None

    @cached_property
    def matrices(self) -> tuple[SparseMatrix, ...]:
        alg = gauge_algebra(self.algebra)
        if alg.structure is None:
            raise MissingAnnotation(f"no explicit matrices for {self.algebra}")
        mats: list[SparseMatrix] = []
        if self.algebra in ("u1", "u1+su2"):
            mats.append(SparseMatrix.identity(self.dim, to_qqi(self.charge)) if self.charge else SparseMatrix(self.dim, self.dim))
        if self.algebra in ("su2", "u1+su2"):
            mats.extend(_su2_matrices(self.label))
        return tuple(mats)


def _su2_matrices(label: str) -> list[SparseMatrix]:
    i = QQ_I(0, 1)
    half = QQ_I(QQ(1, 2), 0)
    if label == "0":
        return [SparseMatrix(1, 1) for _ in range(3)]
    if label == "1/2":
        s1 = SparseMatrix.from_items(2, 2, [(0, 1, half), (1, 0, half)])
        s2 = SparseMatrix.from_items(2, 2, [(0, 1, -i * half), (1, 0, i * half)])
        s3 = SparseMatrix.from_items(2, 2, [(0, 0, half), (1, 1, -half)])
        return [s1, s2, s3]
    if label == "1":
        lev = _levi(0, 3)
        out = []
        for a in range(3):
            items = [(b, c, -i * to_qqi(lev[a][b][c])) for b in range(3) for c in range(3) if lev[a][b][c]]
            out.append(SparseMatrix.from_items(3, 3, items))
        return out
    raise MissingAnnotation(f"su2 spin {label} has no rational matrices")


_SU2 = {"0": (1, Fraction(0)), "1/2": (2, Fraction(1, 4)), "1": (3, Fraction(1))}
_SU3 = {"1": (1, Fraction(0)), "3": (3, Fraction(1, 4)), "3bar": (3, Fraction(1, 4)), "8": (8, Fraction(3, 2))}


def gauge_irrep(algebra: str, label: str = "0", charge: Any = 0) -> GaugeIrrep:
    q = to_fraction(charge)
    if algebra == "none":
        return GaugeIrrep("none", "0", 1, Fraction(0))
    if algebra == "u1":
        return GaugeIrrep("u1", str(q), 1, q * q / 2, q)
    if algebra in ("su2", "u1+su2"):
        if label not in _SU2:
            raise ValueError(f"unsupported su2 irrep {label!r}")
        d, x = _SU2[label]
        if algebra == "su2" and q:
            raise ValueError("su2 blocks carry no u(1) charge")
        return GaugeIrrep(algebra, label, d, x + (q * q / 2 if algebra == "u1+su2" else 0), q)
    if algebra == "su3":
        if label not in _SU3:
            raise ValueError(f"unsupported su3 irrep {label!r}")
        d, x = _SU3[label]
        return GaugeIrrep("su3", label, d, x)
    raise ValueError(f"unknown gauge algebra {algebra!r}")


# ---------------------------------------------------------------------------
# gl(N) tensor densities

FULL, SYM, ANTISYM = "full", "sym", "antisym"
Tensor = tuple[tuple[int, ...], tuple[int, ...]]


@dataclass(frozen=True)
class GlIrrep:
    upper: int = 0
    lower: int = 0
    weight: Fraction = Fraction(0)
    symmetry: str = FULL

    def __post_init__(self) -> None:
        object.__setattr__(self, "weight", to_fraction(self.weight))
        if self.upper < 0 or self.lower < 0:
            raise ValueError("index counts must be >= 0")
        if self.upper + self.lower > 3:
            raise ValueError("tensor rank above 3 is not supported")
        if self.symmetry not in (FULL, SYM, ANTISYM):
            raise ValueError(f"unknown symmetry {self.symmetry!r}")
        if self.symmetry != FULL and max(self.upper, self.lower) < 2:
            raise ValueError("symmetry type needs two indices of the same kind")

    @property
    def _sym_group(self) -> str:
        return "upper" if self.upper >= 2 else "lower"

    def family(self) -> Optional[str]:
        """Name of the irreducible sl(N) family, or None when reducible."""
        p, q = self.upper, self.lower
        if p + q == 0:
            return "trivial"
        if p + q == 1:
            return "vector" if p else "covector"
        if self.symmetry == FULL or min(p, q) > 0:
            return None
        return f"{self.symmetry}{p + q}"

    def dual(self) -> "GlIrrep":
        return GlIrrep(self.lower, self.upper, -self.weight, self.symmetry)

    def basis(self, N: int) -> tuple[Tensor, ...]:
        return _tensor_basis(self, N)

    def dim(self, N: int) -> int:
        return len(self.basis(N))

    def matrices(self, N: int) -> tuple[tuple[SparseMatrix, ...], ...]:
        """``m[mu][nu]`` is rho(T^mu_nu) over QQ."""
        return _gl_matrices(self, N)


def _canon(irrep: GlIrrep, t: Tensor) -> tuple[int, Optional[Tensor]]:
    """Coefficient and canonical basis label of a full-tensor component."""
    up, lo = t
    if irrep.symmetry == FULL:
        return 1, t
    grp = up if irrep._sym_group == "upper" else lo
    s = tuple(sorted(grp))
    sign = 1
    if irrep.symmetry == ANTISYM:
        if len(set(grp)) < len(grp):
            return 0, None
        inv = sum(1 for i in range(len(grp)) for j in range(i + 1, len(grp)) if grp[i] > grp[j])
        sign = -1 if inv % 2 else 1
    return sign, ((s, lo) if irrep._sym_group == "upper" else (up, s))


@lru_cache(maxsize=None)
def _tensor_basis(irrep: GlIrrep, N: int) -> tuple[Tensor, ...]:
    from itertools import product

    out = []
    for up in product(range(N), repeat=irrep.upper):
        for lo in product(range(N), repeat=irrep.lower):
            c, t = _canon(irrep, (up, lo))
            if c == 1 and t == (up, lo):
                out.append(t)
    return tuple(sorted(set(out)))


def _expand(irrep: GlIrrep, t: Tensor) -> dict[Tensor, int]:
    """Full-tensor expansion of a basis label."""
    if irrep.symmetry == FULL:
        return {t: 1}
    up, lo = t
    grp = up if irrep._sym_group == "upper" else lo
    out: dict[Tensor, int] = {}
    for perm in set(permutations(grp)):
        c, _ = _canon(irrep, ((perm, lo) if irrep._sym_group == "upper" else (up, perm)))
        key = (perm, lo) if irrep._sym_group == "upper" else (up, perm)
        if irrep.symmetry == ANTISYM:
            # sign of the permutation relative to the sorted label
            out[key] = c
        else:
            out[key] = 1
    return out


def _act_full(irrep: GlIrrep, mu: int, nu: int, t: Tensor) -> dict[Tensor, Fraction]:
    up, lo = t
    out: dict[Tensor, Fraction] = {}

    def put(k: Tensor, v: Fraction) -> None:
        w = out.get(k, 0) + v
        if w:
            out[k] = w
        else:
            out.pop(k, None)

    if mu == nu and irrep.weight:
        put(t, -irrep.weight)
    for i, s in enumerate(up):
        if s == nu:
            put((up[:i] + (mu,) + up[i + 1:], lo), Fraction(1))
    for j, s in enumerate(lo):
        if s == mu:
            put((up, lo[:j] + (nu,) + lo[j + 1:]), Fraction(-1))
    return out


def act_gl(irrep: GlIrrep, N: int, mu: int, nu: int, tensor: Tensor) -> dict[Tensor, Fraction]:
    """Image of a basis tensor under rho(T^mu_nu), as {basis label: coeff}."""
    if not (0 <= mu < N and 0 <= nu < N):
        raise IndexError(f"index out of range for N={N}: ({mu}, {nu})")
    basis = set(irrep.basis(N))
    if tensor not in basis:
        raise ValueError(f"{tensor} is not a basis label of {irrep}")
    out: dict[Tensor, Fraction] = {}
    for full, c in _expand(irrep, tensor).items():
        for img, v in _act_full(irrep, mu, nu, full).items():
            if img in basis:
                out[img] = out.get(img, 0) + c * v
    return {k: v for k, v in out.items() if v}


@lru_cache(maxsize=None)
def _gl_matrices(irrep: GlIrrep, N: int) -> tuple[tuple[SparseMatrix, ...], ...]:
    basis = irrep.basis(N)
    pos = {t: i for i, t in enumerate(basis)}
    d = len(basis)
    rows = []
    for mu in range(N):
        row = []
        for nu in range(N):
            m = SparseMatrix(d, d)
            for j, t in enumerate(basis):
                for img, v in act_gl(irrep, N, mu, nu, t).items():
                    m.add_to(pos[img], j, to_qq(v))
            row.append(m)
        rows.append(tuple(row))
    return tuple(rows)


# closed-form sl(N) data: Dynkin index with the fundamental at 1/2
def sl_dynkin(family: str, N: int) -> Fraction:
    table = {
        "trivial": Fraction(0),
        "vector": Fraction(1, 2),
        "covector": Fraction(1, 2),
        "sym2": Fraction(N + 2, 2),
        "antisym2": Fraction(N - 2, 2),
        "sym3": Fraction((N + 2) * (N + 3), 4),
        "antisym3": Fraction((N - 2) * (N - 3), 4),
    }
    if family not in table:
        raise MissingAnnotation(f"no Dynkin index for {family!r}")
    return table[family]


def gl1_label(irrep: GlIrrep, N: int, convention: str = "trace") -> Fraction:
    """gl(1) label of a tensor density.

    ``trace`` is the value seen by rho(T^mu_mu)/N; ``index_count`` is
    -weight + upper - lower, which only agrees for scalars.
    """
    if convention == "trace":
        return -irrep.weight + Fraction(irrep.upper - irrep.lower, N)
    if convention == "index_count":
        return -irrep.weight + irrep.upper - irrep.lower
    raise ValueError(f"unknown convention {convention!r}")


# ---------------------------------------------------------------------------
# blocks and direct sums


@dataclass(frozen=True)
class SpeciesBlock:
    gl: GlIrrep = field(default_factory=GlIrrep)
    gauge: GaugeIrrep = field(default_factory=lambda: gauge_irrep("none"))
    parity: str = BOSON
    causal_weight: Fraction = Fraction(0)
    el_order: int = 2
    name: str = ""
    dual: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "causal_weight", to_fraction(self.causal_weight))
        if self.parity not in (BOSON, FERMION):
            raise ValueError(f"parity must be {BOSON!r} or {FERMION!r}")

    @property
    def sign(self) -> int:
        return 1 if self.parity == BOSON else -1

    def dim(self, N: int) -> int:
        return self.gl.dim(N) * self.gauge.dim

    def dualized(self) -> "SpeciesBlock":
        return replace(self, dual=not self.dual)


@dataclass(frozen=True)
class RepParams:
    sd: Fraction
    k0: Fraction
    k1: Fraction
    k2: Fraction
    y: Fraction
    z: Fraction
    kz: Fraction

    FIELDS = ("sd", "k0", "k1", "k2", "y", "z", "kz")

    def as_dict(self) -> dict[str, Fraction]:
        return {k: getattr(self, k) for k in self.FIELDS}

    def __add__(self, other: "RepParams") -> "RepParams":
        return RepParams(*(getattr(self, k) + getattr(other, k) for k in self.FIELDS))

    def scaled(self, c: Any) -> "RepParams":
        c = to_fraction(c)
        return RepParams(*(c * getattr(self, k) for k in self.FIELDS))

    @classmethod
    def zero(cls) -> "RepParams":
        return cls(*(Fraction(0),) * 7)


def _kron_left(a: SparseMatrix, n: int) -> SparseMatrix:
    """a (x) 1_n"""
    out = SparseMatrix(a.nrows * n, a.ncols * n)
    for i, j, v in a.items():
        for g in range(n):
            out.add_to(i * n + g, j * n + g, v)
    return out


def _kron_right(n: int, b: SparseMatrix) -> SparseMatrix:
    """1_n (x) b"""
    out = SparseMatrix(n * b.nrows, n * b.ncols)
    for r in range(n):
        for i, j, v in b.items():
            out.add_to(r * b.nrows + i, r * b.ncols + j, v)
    return out


def _dualize(m: SparseMatrix) -> SparseMatrix:
    return -m.transpose()


@dataclass(frozen=True)
class RepSpec:
    N: int
    blocks: tuple[SpeciesBlock, ...] = ()
    algebra: str = "none"

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if self.N < 1:
            raise ValueError("N must be >= 1")
        for b in self.blocks:
            if b.gauge.algebra != self.algebra and not (b.gauge.algebra == "none" and self.algebra == "none"):
                if not (b.gauge.algebra == "none" and b.gauge.dim == 1):
                    raise ValueError(f"block {b.name!r} uses {b.gauge.algebra}, model uses {self.algebra}")

    @property
    def gauge(self) -> GaugeAlgebra:
        return gauge_algebra(self.algebra)

    @property
    def dim(self) -> int:
        return sum(b.dim(self.N) for b in self.blocks)

    @property
    def offsets(self) -> list[int]:
        out, acc = [], 0
        for b in self.blocks:
            out.append(acc)
            acc += b.dim(self.N)
        return out

    @property
    def parity_weights(self) -> list[int]:
        out: list[int] = []
        for b in self.blocks:
            out.extend([b.sign] * b.dim(self.N))
        return out

    @property
    def complex(self) -> bool:
        return self.algebra in ("su2", "u1+su2") and any(b.gauge.dim > 1 or b.gauge.label != "0" for b in self.blocks)

    @property
    def domain(self):
        return QQ_I if self.complex else QQ

    def explicit(self) -> bool:
        return self.gauge.structure is not None or self.gauge.dim == 0

    def _convert(self, m: SparseMatrix) -> SparseMatrix:
        if self.complex:
            return m.map(to_qqi)
        return m.map(lambda v: v if not hasattr(v, "y") else to_qq(v))

    def _block_sum(self, per_block) -> SparseMatrix:
        out = SparseMatrix(self.dim, self.dim)
        for off, b in zip(self.offsets, self.blocks):
            m = per_block(b)
            for i, j, v in m.items():
                out.add_to(off + i, off + j, v)
        return out

    def gl_matrix(self, mu: int, nu: int) -> SparseMatrix:
        return _gl_full(self, mu, nu)

    def gauge_matrix(self, a: int) -> SparseMatrix:
        return _gauge_full(self, a)

    def dual(self) -> "RepSpec":
        return RepSpec(self.N, tuple(b.dualized() for b in self.blocks), self.algebra)

    def with_blocks(self, blocks: Sequence[SpeciesBlock]) -> "RepSpec":
        return RepSpec(self.N, tuple(blocks), self.algebra)


@lru_cache(maxsize=None)
def _gl_full(rep: RepSpec, mu: int, nu: int) -> SparseMatrix:
    def per_block(b: SpeciesBlock) -> SparseMatrix:
        m = _kron_left(b.gl.matrices(rep.N)[mu][nu], b.gauge.dim)
        return _dualize(m) if b.dual else m

    return rep._convert(rep._block_sum(per_block))


@lru_cache(maxsize=None)
def _gauge_full(rep: RepSpec, a: int) -> SparseMatrix:
    def per_block(b: SpeciesBlock) -> SparseMatrix:
        d = b.gl.dim(rep.N)
        if b.gauge.algebra == "none":
            return SparseMatrix(d, d)
        m = _kron_right(d, b.gauge.matrices[a])
        return _dualize(m) if b.dual else m

    return rep._convert(rep._block_sum(per_block))


def dual_rep(rep: RepSpec) -> RepSpec:
    return rep.dual()


# ---------------------------------------------------------------------------
# parameters


def _str(m: SparseMatrix, w: list[int]):
    return m.weighted_trace(w)


def _real(v: Any) -> Fraction:
    return to_fraction(v) if v else Fraction(0)


def rep_params_direct(rep: RepSpec) -> RepParams:
    """Seven parameters from explicit supertraces; raises PatternMismatch."""
    if not rep.explicit():
        raise MissingAnnotation(f"{rep.algebra} blocks have no explicit matrices")
    N = rep.N
    w = rep.parity_weights
    sd = Fraction(sum(w))
    T = [[rep.gl_matrix(mu, nu) for nu in range(N)] for mu in range(N)]

    tr1 = [[_real(_str(T[mu][nu], w)) for nu in range(N)] for mu in range(N)]
    k0 = tr1[0][0]
    for mu in range(N):
        for nu in range(N):
            if tr1[mu][nu] != (k0 if mu == nu else 0):
                raise PatternMismatch(f"str T^{mu}_{nu} = {tr1[mu][nu]}")

    tr2 = {}
    for mu in range(N):
        for nu in range(N):
            for s in range(N):
                for t in range(N):
                    tr2[mu, nu, s, t] = _real(T[mu][nu].trace_of_product(T[s][t], w))
    if N >= 2:
        k1 = tr2[0, 1, 1, 0]
        k2 = tr2[0, 0, 1, 1]
    else:
        # sl(1) is zero; the whole quadratic trace sits in the gl(1) part
        k1, k2 = Fraction(0), tr2[0, 0, 0, 0]
    for (mu, nu, s, t), v in tr2.items():
        expect = k1 * (mu == t) * (s == nu) + k2 * (mu == nu) * (s == t)
        if v != expect:
            raise PatternMismatch(f"str T^{mu}_{nu} T^{s}_{t} = {v}, expected {expect}")

    g = rep.gauge
    y = z = kz = Fraction(0)
    if g.dim:
        J = [rep.gauge_matrix(a) for a in range(g.dim)]
        trJ = [_real(_str(J[a], w)) for a in range(g.dim)]
        ref = next((a for a in range(g.dim) if g.delta[a]), None)
        z = trJ[ref] / g.delta[ref] if ref is not None else Fraction(0)
        for a in range(g.dim):
            if trJ[a] != z * g.delta[a]:
                raise PatternMismatch(f"str J^{a} = {trJ[a]}")
        trJJ = [[_real(J[a].trace_of_product(J[b], w)) for b in range(g.dim)] for a in range(g.dim)]
        y = trJJ[0][0]
        for a in range(g.dim):
            for b in range(g.dim):
                if trJJ[a][b] != (y if a == b else 0):
                    raise PatternMismatch(f"str J^{a} J^{b} = {trJJ[a][b]}")
        trJT = {
            (a, mu, nu): _real(J[a].trace_of_product(T[mu][nu], w))
            for a in range(g.dim)
            for mu in range(N)
            for nu in range(N)
        }
        kz = trJT[ref, 0, 0] / g.delta[ref] if ref is not None else Fraction(0)
        for (a, mu, nu), v in trJT.items():
            if v != kz * g.delta[a] * (mu == nu):
                raise PatternMismatch(f"str J^{a} T^{mu}_{nu} = {v}")
    return RepParams(sd, k0, k1, k2, y, z, kz)


@dataclass(frozen=True)
class BlockAnnotation:
    dim_R: int
    dynkin_R: Fraction
    omega: Fraction
    dim_M: int
    y_M: Fraction
    z_M: Fraction
    sign: int


def annotate(rep: RepSpec, convention: str = "trace") -> list[BlockAnnotation]:
    """Closed-form annotations derived from each block's declared family."""
    out = []
    for b in rep.blocks:
        fam = b.gl.family()
        if fam is None:
            raise MissingAnnotation(f"block {b.name!r}: {b.gl} is reducible under sl(N)")
        x = sl_dynkin(fam, rep.N)
        omega = gl1_label(b.gl, rep.N, convention)
        g = b.gauge
        if g.algebra == "u1+su2":
            raise MissingAnnotation("u1+su2 has no isotropic trace form")
        y_M = 2 * g.dynkin
        z_M = g.charge * g.dim if g.algebra == "u1" else Fraction(0)
        if b.dual:
            omega, z_M = -omega, -z_M
        out.append(BlockAnnotation(b.gl.dim(rep.N), x, omega, g.dim, y_M, z_M, b.sign))
    return out


def rep_params_closed(rep: RepSpec, table: Optional[Sequence[BlockAnnotation]] = None) -> RepParams:
    """Closed-form parameters from per-block sl(N), gl(1) and gauge data.

    Uses k1 = 2 x_R and y = 2 x_M, the forms consistent with the quadratic
    Casimir normalization Q_R = 2 x_R (N^2-1)/dim R.
    """
    N = rep.N
    if table is None:
        table = annotate(rep)
    if len(table) != len(rep.blocks):
        raise MissingAnnotation("one annotation per block is required")
    acc = RepParams.zero()
    for a in table:
        k0 = a.omega * a.dim_R
        k1 = 2 * a.dynkin_R
        k2 = a.omega ** 2 * a.dim_R - Fraction(2, N) * a.dynkin_R if N > 1 else a.omega ** 2 * a.dim_R
        if N == 1:
            k1 = Fraction(0)
        term = RepParams(
            sd=Fraction(a.dim_R * a.dim_M),
            k0=k0 * a.dim_M,
            k1=k1 * a.dim_M,
            k2=k2 * a.dim_M,
            y=a.dim_R * a.y_M,
            z=a.dim_R * a.z_M,
            kz=k0 * a.z_M,
        )
        acc = acc + term.scaled(a.sign)
    return acc


def rep_params(rep: RepSpec) -> RepParams:
    """Direct supertraces when matrices exist, closed forms otherwise."""
    if rep.explicit():
        return rep_params_direct(rep)
    return rep_params_closed(rep)


def adjoint_irrep(algebra: str) -> GaugeIrrep:
    if algebra in ("none", "u1"):
        return gauge_irrep(algebra)
    if algebra == "su2":
        return gauge_irrep("su2", "1")
    if algebra == "su3":
        return gauge_irrep("su3", "8")
    raise MissingAnnotation(f"adjoint of {algebra} is reducible with no isotropic trace form")


def integer_dynkin_flags(rep: RepSpec) -> list[bool]:
    return [ann.dynkin_R.denominator == 1 for ann in annotate(rep)]


# convenient constructors -------------------------------------------------------

def scalar(weight: Any = 0, **kw) -> SpeciesBlock:
    return SpeciesBlock(gl=GlIrrep(0, 0, to_fraction(weight)), **kw)


def vector(**kw) -> SpeciesBlock:
    return SpeciesBlock(gl=GlIrrep(1, 0), **kw)


def covector(**kw) -> SpeciesBlock:
    return SpeciesBlock(gl=GlIrrep(0, 1), **kw)


def sym2(lower: bool = False, **kw) -> SpeciesBlock:
    return SpeciesBlock(gl=GlIrrep(0, 2, symmetry=SYM) if lower else GlIrrep(2, 0, symmetry=SYM), **kw)


def antisym2(lower: bool = False, **kw) -> SpeciesBlock:
    return SpeciesBlock(gl=GlIrrep(0, 2, symmetry=ANTISYM) if lower else GlIrrep(2, 0, symmetry=ANTISYM), **kw)


def single(N: int, block: SpeciesBlock, algebra: Optional[str] = None) -> RepSpec:
    return RepSpec(N, (block,), algebra or block.gauge.algebra)
