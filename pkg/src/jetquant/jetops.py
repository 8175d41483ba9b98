"""Jet-operator matrices T^m_n(xi), J^m_n(X) and their identities.

A jet matrix is a block matrix over the truncated jet fiber: rows are
(n, alpha), columns (m, beta), and block (n, m) holds rho(T^m_n(xi)).
With this layout the composition law reads

    T([xi, eta]) = xi.d T(eta) - eta.d T(xi) + [T(xi), T(eta)]

as an ordinary matrix identity. Entries are polynomials in the expansion
point x.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Optional, Sequence

import sympy
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.rings import PolyElement, ring

from . import multiindex as mi
from .repkit import RepParams, RepSpec, rep_params_direct
from .scalars import to_fraction
from .sparse import SparseMatrix


@lru_cache(maxsize=None)
def poly_ring(N: int, domain=QQ):
    R, *_ = ring([f"x{i}" for i in range(N)], domain)
    return R


def _convert(p: PolyElement, R) -> PolyElement:
    return p if p.ring == R else p.set_ring(R)


def pdiff(p: PolyElement, index: Sequence[int]) -> PolyElement:
    R = p.ring
    for v, k in enumerate(index):
        for _ in range(k):
            if not p:
                return p
            p = p.diff(R.gens[v])
    return p


@dataclass(frozen=True)
class PolyVectorField:
    components: tuple[PolyElement, ...]

    @property
    def N(self) -> int:
        return len(self.components)

    @property
    def ring(self):
        return self.components[0].ring

    def to_ring(self, R) -> "PolyVectorField":
        return PolyVectorField(tuple(_convert(c, R) for c in self.components))

    def degree(self) -> int:
        return max((c.total_degree() if c else 0) for c in self.components) if self.components else 0

    def diff(self, index: Sequence[int]) -> "PolyVectorField":
        return PolyVectorField(tuple(pdiff(c, index) for c in self.components))

    def divergence(self) -> PolyElement:
        R = self.ring
        return sum((c.diff(R.gens[i]) for i, c in enumerate(self.components)), R.zero)

    def apply(self, f: PolyElement) -> PolyElement:
        """xi^mu d_mu f"""
        R = self.ring
        f = _convert(f, R)
        return sum((c * f.diff(R.gens[i]) for i, c in enumerate(self.components)), R.zero)

    def bracket(self, other: "PolyVectorField") -> "PolyVectorField":
        other = other.to_ring(self.ring)
        return PolyVectorField(tuple(self.apply(e) - other.apply(x) for x, e in zip(self.components, other.components)))

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        other = other.to_ring(self.ring)
        return PolyVectorField(tuple(a + b for a, b in zip(self.components, other.components)))

    def scale(self, c) -> "PolyVectorField":
        return PolyVectorField(tuple(c * a for a in self.components))

    def is_zero(self) -> bool:
        return not any(self.components)

    @classmethod
    def from_exprs(cls, N: int, exprs: Sequence[Any], domain=QQ) -> "PolyVectorField":
        R = poly_ring(N, domain)
        xs = sympy.symbols(f"x0:{N}")
        return cls(tuple(R.from_expr(sympy.sympify(e, locals=dict(zip(map(str, xs), xs)))) if e != 0 else R.zero for e in exprs))

    @classmethod
    def zero(cls, N: int, domain=QQ) -> "PolyVectorField":
        R = poly_ring(N, domain)
        return cls((R.zero,) * N)


@dataclass(frozen=True)
class PolyGaugeMap:
    """X = X_a(x) J^a; one coefficient polynomial per gauge generator."""

    coeffs: tuple[PolyElement, ...]
    N: int

    @property
    def ring(self):
        return self.coeffs[0].ring if self.coeffs else poly_ring(self.N)

    def to_ring(self, R) -> "PolyGaugeMap":
        return PolyGaugeMap(tuple(_convert(c, R) for c in self.coeffs), self.N)

    def diff(self, index: Sequence[int]) -> "PolyGaugeMap":
        return PolyGaugeMap(tuple(pdiff(c, index) for c in self.coeffs), self.N)

    def transported(self, xi: PolyVectorField) -> "PolyGaugeMap":
        """xi^mu d_mu X"""
        R = self._complex_ring()
        xi = xi.to_ring(R)
        return PolyGaugeMap(tuple(xi.apply(_convert(c, R)) for c in self.coeffs), self.N)

    def _complex_ring(self):
        return poly_ring(self.N, QQ_I)

    def bracket(self, other: "PolyGaugeMap", algebra) -> "PolyGaugeMap":
        """[X, Y]_c = i f^{ab}_c X_a Y_b"""
        R = self._complex_ring()
        X = [_convert(c, R) for c in self.coeffs]
        Y = [_convert(c, R) for c in other.coeffs]
        i = R.ground_new(QQ_I(0, 1))
        out = []
        for c in range(algebra.dim):
            acc = R.zero
            for a in range(algebra.dim):
                for b in range(algebra.dim):
                    f = algebra.f(a, b, c)
                    if f and X[a] and Y[b]:
                        acc += R.ground_new(QQ_I.convert(QQ(f.numerator, f.denominator))) * X[a] * Y[b]
            out.append(i * acc)
        return PolyGaugeMap(tuple(out), self.N)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    @classmethod
    def zero(cls, dim: int, N: int, domain=QQ) -> "PolyGaugeMap":
        R = poly_ring(N, domain)
        return cls((R.zero,) * dim, N)


def random_poly(R, degree: int, rng: random.Random, coeff: int = 2, density: float = 0.6) -> PolyElement:
    terms = {}
    for k in range(degree + 1):
        for m in mi._grade(R.ngens, k):
            if rng.random() < density:
                c = rng.randint(-coeff, coeff)
                if c:
                    terms[m] = R.domain.convert(c)
    return R.from_dict(terms) if terms else R.zero


def random_vector_field(N: int, degree: int, rng: random.Random, domain=QQ) -> PolyVectorField:
    R = poly_ring(N, domain)
    return PolyVectorField(tuple(random_poly(R, degree, rng) for _ in range(N)))


def random_gauge_map(dim: int, N: int, degree: int, rng: random.Random, domain=QQ) -> PolyGaugeMap:
    R = poly_ring(N, domain)
    return PolyGaugeMap(tuple(random_poly(R, degree, rng) for _ in range(dim)), N)


# ---------------------------------------------------------------------------
# abstract jet operators: elements of span{T^nu_mu, I}

Abstract = dict  # {(nu, mu): poly, "I": poly}


def _acc(out: Abstract, key, val) -> None:
    if not val:
        return
    w = out.get(key)
    w = val if w is None else w + val
    if w:
        out[key] = w
    else:
        out.pop(key, None)


class _TRecursion:
    """Memoized T^m_n(d_k xi) from the recursion in n."""

    def __init__(self, xi: PolyVectorField):
        self.xi = xi
        self.N = xi.N
        self._diffs: dict = {}
        self._memo: dict = {}

    def dxi(self, k) -> PolyVectorField:
        v = self._diffs.get(k)
        if v is None:
            v = self.xi.diff(k)
            self._diffs[k] = v
        return v

    def get(self, k, m, n) -> Abstract:
        key = (k, m, n)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        N = self.N
        out: Abstract = {}
        if not mi.is_valid(m) or mi.order(m) > mi.order(n):
            pass
        elif mi.order(n) == 0:
            if mi.order(m) == 0:
                for nu in range(N):
                    d = self.dxi(mi.add(k, mi.unit(N, nu)))
                    for mu in range(N):
                        _acc(out, (nu, mu), d.components[mu])
        else:
            nu = next(i for i, c in enumerate(n) if c)
            n1 = mi.sub(n, mi.unit(N, nu))
            d = self.dxi(mi.add(k, mi.unit(N, nu)))
            for mu in range(N):
                if mi.add(n1, mi.unit(N, mu)) == m:
                    _acc(out, "I", d.components[mu])
            for key2, val in self.get(mi.add(k, mi.unit(N, nu)), m, n1).items():
                _acc(out, key2, val)
            m1 = mi.sub(m, mi.unit(N, nu))
            if mi.is_valid(m1):
                for key2, val in self.get(k, m1, n1).items():
                    _acc(out, key2, val)
        self._memo[key] = out
        return out


def T_abstract(xi: PolyVectorField, m, n) -> Abstract:
    """T^m_n(xi) by the recursion."""
    return _TRecursion(xi).get(mi.zero(xi.N), tuple(m), tuple(n))


def T_explicit(xi: PolyVectorField, m, n) -> Abstract:
    """T^m_n(xi) from the closed binomial formula."""
    N = xi.N
    m, n = tuple(m), tuple(n)
    out: Abstract = {}
    c = mi.multi_binomial(n, m) if mi.is_valid(m) else 0
    if c:
        base = mi.sub(n, m)
        for nu in range(N):
            d = xi.diff(mi.add(base, mi.unit(N, nu)))
            for mu in range(N):
                _acc(out, (nu, mu), c * d.components[mu])
    for mu in range(N):
        mm = mi.sub(m, mi.unit(N, mu))
        if not mi.is_valid(mm) or mm == n:
            continue
        c = mi.multi_binomial(n, mm)
        if c:
            d = xi.diff(mi.add(mi.sub(n, m), mi.unit(N, mu)))
            _acc(out, "I", c * d.components[mu])
    return out


def J_abstract(X: PolyGaugeMap, m, n) -> dict:
    """J^m_n(X) by the recursion: {a: poly}."""
    memo: dict = {}

    def get(k, m, n):
        key = (k, m, n)
        if key in memo:
            return memo[key]
        out: dict = {}
        if not mi.is_valid(m) or mi.order(m) > mi.order(n):
            pass
        elif mi.order(n) == 0:
            if mi.order(m) == 0:
                for a, c in enumerate(X.diff(k).coeffs):
                    _acc(out, a, c)
        else:
            mu = next(i for i, c in enumerate(n) if c)
            n1 = mi.sub(n, mi.unit(X.N, mu))
            for a, v in get(mi.add(k, mi.unit(X.N, mu)), m, n1).items():
                _acc(out, a, v)
            m1 = mi.sub(m, mi.unit(X.N, mu))
            if mi.is_valid(m1):
                for a, v in get(k, m1, n1).items():
                    _acc(out, a, v)
        memo[key] = out
        return out

    return get(mi.zero(X.N), tuple(m), tuple(n))


# ---------------------------------------------------------------------------
# matrices


@dataclass
class JetMatrix:
    rep: RepSpec
    p: int
    matrix: SparseMatrix
    ring: Any

    @property
    def index(self) -> tuple:
        return mi.enumerate_indices(self.rep.N, self.p)

    @property
    def fiber_dim(self) -> int:
        return self.rep.dim

    def position(self, m, alpha: int) -> int:
        return _positions(self.rep.N, self.p)[tuple(m)] * self.rep.dim + alpha

    def block(self, m, n) -> SparseMatrix:
        """rho(T^m_n) as a dim V matrix."""
        dV = self.rep.dim
        r0 = self.position(n, 0)
        c0 = self.position(m, 0)
        out = SparseMatrix(dV, dV)
        for i in range(dV):
            row = self.matrix.rows.get(r0 + i)
            if not row:
                continue
            for j in range(dV):
                v = row.get(c0 + j)
                if v:
                    out.add_to(i, j, v)
        return out

    def derivative(self, mu: int) -> "JetMatrix":
        g = self.ring.gens[mu]
        return JetMatrix(self.rep, self.p, self.matrix.map(lambda v: v.diff(g)), self.ring)

    def evaluate(self, point: Sequence[Any]) -> SparseMatrix:
        pt = [self.ring.domain.convert(to_fraction(v).numerator) / self.ring.domain.convert(to_fraction(v).denominator) for v in point]
        return self.matrix.map(lambda v: v.evaluate(list(zip(self.ring.gens, pt))) if v.ring.ngens else v)

    def triangular(self) -> bool:
        idx = self.index
        dV = self.rep.dim
        for i, j, _ in self.matrix.items():
            if mi.order(idx[j // dV]) > mi.order(idx[i // dV]):
                return False
        return True

    def supertrace_weights(self) -> list[int]:
        return self.rep.parity_weights * len(self.index)

    def __sub__(self, other: "JetMatrix") -> "JetMatrix":
        return JetMatrix(self.rep, self.p, self.matrix - other.matrix, self.ring)

    def __add__(self, other: "JetMatrix") -> "JetMatrix":
        return JetMatrix(self.rep, self.p, self.matrix + other.matrix, self.ring)

    def __neg__(self) -> "JetMatrix":
        return JetMatrix(self.rep, self.p, -self.matrix, self.ring)

    def __matmul__(self, other: "JetMatrix") -> "JetMatrix":
        return JetMatrix(self.rep, self.p, self.matrix @ other.matrix, self.ring)

    def scale_poly(self, c: PolyElement) -> "JetMatrix":
        c = _convert(c, self.ring)
        return JetMatrix(self.rep, self.p, self.matrix.scale(c), self.ring)

    def is_zero(self) -> bool:
        return self.matrix.is_zero()


@lru_cache(maxsize=None)
def _positions(N: int, p: int) -> dict:
    return {m: i for i, m in enumerate(mi.enumerate_indices(N, p))}


def _ring_for(rep: RepSpec, *fields) -> Any:
    domain = rep.domain
    for f in fields:
        if f is not None and f.ring.domain == QQ_I:
            domain = QQ_I
    return poly_ring(rep.N, domain)


@lru_cache(maxsize=None)
def _rep_in_ring(rep: RepSpec, R) -> tuple:
    N = rep.N
    gl = [[rep.gl_matrix(nu, mu).map(R.ground_new) for mu in range(N)] for nu in range(N)]
    gauge = [rep.gauge_matrix(a).map(R.ground_new) for a in range(rep.gauge.dim)] if rep.gauge.dim else []
    return gl, gauge


def _place(out: SparseMatrix, r0: int, c0: int, mat: SparseMatrix, coeff: PolyElement) -> None:
    for i, j, v in mat.items():
        out.add_to(r0 + i, c0 + j, coeff * v)


def build_T(xi: PolyVectorField, p: int, rep: RepSpec, method: str = "recursion") -> JetMatrix:
    if p < 0:
        raise ValueError("p must be >= 0")
    R = _ring_for(rep, xi)
    xi = xi.to_ring(R)
    gl, _ = _rep_in_ring(rep, R)
    idx = mi.enumerate_indices(rep.N, p)
    pos = _positions(rep.N, p)
    dV = rep.dim
    out = SparseMatrix(len(idx) * dV, len(idx) * dV)
    rec = _TRecursion(xi)
    zero = mi.zero(rep.N)
    one = SparseMatrix.identity(dV, R.one)
    for n in idx:
        for m in idx:
            if mi.order(m) > mi.order(n):
                continue
            el = rec.get(zero, m, n) if method == "recursion" else T_explicit(xi, m, n)
            r0, c0 = pos[n] * dV, pos[m] * dV
            for key, c in el.items():
                if key == "I":
                    _place(out, r0, c0, one, c)
                else:
                    nu, mu = key
                    _place(out, r0, c0, gl[nu][mu], c)
    return JetMatrix(rep, p, out, R)


def build_J(X: PolyGaugeMap, p: int, rep: RepSpec) -> JetMatrix:
    if p < 0:
        raise ValueError("p must be >= 0")
    R = _ring_for(rep, X if X.coeffs else None)
    X = X.to_ring(R)
    _, gauge = _rep_in_ring(rep, R)
    idx = mi.enumerate_indices(rep.N, p)
    pos = _positions(rep.N, p)
    dV = rep.dim
    out = SparseMatrix(len(idx) * dV, len(idx) * dV)
    if not gauge:
        return JetMatrix(rep, p, out, R)
    if len(X.coeffs) != len(gauge):
        raise ValueError("gauge map has the wrong number of components")
    for n in idx:
        for m in idx:
            if mi.order(m) > mi.order(n):
                continue
            el = J_abstract(X, m, n)
            for a, c in el.items():
                _place(out, pos[n] * dV, pos[m] * dV, gauge[a], c)
    return JetMatrix(rep, p, out, R)


# ---------------------------------------------------------------------------
# identities


def _transport(xi: PolyVectorField, M: JetMatrix) -> JetMatrix:
    """xi^mu d_mu M"""
    acc = JetMatrix(M.rep, M.p, SparseMatrix(M.matrix.nrows, M.matrix.ncols), M.ring)
    for mu, c in enumerate(xi.to_ring(M.ring).components):
        if c:
            acc = acc + M.derivative(mu).scale_poly(c)
    return acc


def composition_defects(xi, eta, X, Y, p: int, rep: RepSpec) -> dict[str, JetMatrix]:
    """Residual matrices of the three composition identities (zero when they hold)."""
    out = {}
    if xi is not None and eta is not None:
        if rep.complex:
            xi, eta = xi.to_ring(poly_ring(rep.N, QQ_I)), eta.to_ring(poly_ring(rep.N, QQ_I))
        A, B = build_T(xi, p, rep), build_T(eta, p, rep)
        L = build_T(xi.bracket(eta), p, rep)
        out["T"] = L - _transport(xi, B) + _transport(eta, A) - (A @ B - B @ A)
    if rep.gauge.dim and X is not None and Y is not None:
        A, B = build_J(X, p, rep), build_J(Y, p, rep)
        L = build_J(X.bracket(Y, rep.gauge), p, rep)
        out["J"] = L - (A @ B - B @ A)
    if rep.gauge.dim and xi is not None and X is not None:
        Xc = X.to_ring(poly_ring(rep.N, QQ_I)) if rep.complex else X
        xic = xi.to_ring(Xc.ring)
        A, B = build_T(xic, p, rep), build_J(Xc, p, rep)
        moved = PolyGaugeMap(tuple(xic.apply(c) for c in Xc.coeffs), rep.N)
        L = build_J(moved, p, rep)
        out["TJ"] = L - _transport(xic, B) - (A @ B - B @ A)
    return out


def verify_composition(xi, eta, X, Y, p: int, rep: RepSpec) -> bool:
    return all(d.is_zero() for d in composition_defects(xi, eta, X, Y, p, rep).values())


def verify_intertwining(xi: PolyVectorField, p: int, rep: RepSpec) -> bool:
    """d_nu T(xi) == T(d_nu xi) for every direction."""
    A = build_T(xi, p, rep)
    for nu in range(rep.N):
        B = build_T(xi.diff(mi.unit(rep.N, nu)), p, rep)
        if not (A.derivative(nu) - B).is_zero():
            return False
    return True


# ---------------------------------------------------------------------------
# Taylor-expansion oracle


def taylor_oracle_T(xi: PolyVectorField, p: int, rep: RepSpec) -> SparseMatrix:
    """Jet matrix from direct symbolic Taylor expansion of the field law.

    The field transforms as d phi_a = -xi.d phi_a - d_nu xi^mu rho^b_a(T^nu_mu) phi_b,
    the trajectory as d q = xi(q). Jets phi_{a,n} = d_n phi_a(q) then move as
    -sum_m rho^b_a(T^m_n) phi_{b,m}; this reads the matrix off with sympy.
    Independent of the recursion and the binomial formula.
    """
    N = rep.N
    xs = sympy.symbols(f"x0:{N}")
    qs = sympy.symbols(f"q0:{N}")
    idx_all = mi.enumerate_indices(N, p + 1)
    idx = mi.enumerate_indices(N, p)
    dV = rep.dim
    jets = {(a, m): sympy.Symbol(f"phi_{a}_{'_'.join(map(str, m))}") for a in range(dV) for m in idx_all}
    # phi_a(x) = sum_m phi_{a,m} (x-q)^m / m!
    fields = []
    for a in range(dV):
        expr = 0
        for m in idx_all:
            mono = 1
            for v, k in enumerate(m):
                mono *= (xs[v] - qs[v]) ** k
            expr += jets[a, m] * mono / mi.factorial_index(m)
        fields.append(expr)
    xie = [sympy.sympify(c.as_expr()).subs(dict(zip(sympy.symbols(f"x0:{N}"), xs))) for c in xi.components]
    glm = [[rep.gl_matrix(nu, mu).to_dense() for mu in range(N)] for nu in range(N)]

    def _s(v):
        if hasattr(v, "y"):
            return sympy.Rational(int(v.x.numerator), int(v.x.denominator)) + sympy.I * sympy.Rational(int(v.y.numerator), int(v.y.denominator))
        f = to_fraction(v) if v else Fraction(0)
        return sympy.Rational(f.numerator, f.denominator)

    variation = []
    for a in range(dV):
        expr = -sum(xie[mu] * sympy.diff(fields[a], xs[mu]) for mu in range(N))
        for nu in range(N):
            for mu in range(N):
                dxi = sympy.diff(xie[mu], xs[nu])
                if dxi == 0:
                    continue
                for b in range(dV):
                    r = glm[nu][mu][b][a]
                    if r:
                        expr -= dxi * _s(r) * fields[b]
        variation.append(expr)
    out = SparseMatrix(len(idx) * dV, len(idx) * dV)
    pos = _positions(N, p)
    R = poly_ring(N, QQ_I if rep.complex else QQ)
    at_q = dict(zip(xs, qs))
    for a in range(dV):
        for n in idx:
            d = variation[a]
            for v, k in enumerate(n):
                if k:
                    d = sympy.diff(d, xs[v], k)
            d = d.subs(at_q)
            d += sum(xie[mu].subs(at_q) * jets[a, mi.add(n, mi.unit(N, mu))] for mu in range(N))
            d = sympy.expand(d)
            for b in range(dV):
                for m in idx:
                    coeff = d.coeff(jets[b, m])
                    if coeff != 0:
                        # -rho^b_a(T^m_n): row (n, b) col (m, a) in rho^.._.. layout
                        poly = R.from_expr(sympy.expand(-coeff.subs(dict(zip(qs, xs))))) if coeff.free_symbols else R.ground_new(R.domain.from_sympy(-coeff))
                        out.add_to(pos[n] * dV + b, pos[m] * dV + a, poly)
    return out


# ---------------------------------------------------------------------------
# supertrace lemmas


@dataclass
class LemmaLine:
    name: str
    enumerated: Any
    closed: Any
    corrected: Optional[Any] = None

    @property
    def holds(self) -> bool:
        return self.enumerated == self.closed

    @property
    def corrected_holds(self) -> bool:
        return self.enumerated == (self.corrected if self.corrected is not None else self.closed)


def momentum_operators(xi, X, p: int, rep: RepSpec) -> tuple[Optional[JetMatrix], Optional[JetMatrix]]:
    """Negated jet operators of the dual representation.

    These are the matrices whose supertraces the closed-form lemmas and
    the charge tables describe (gl part as rho, identity part with a minus).
    """
    dual = rep.dual()
    K = -build_T(xi, p, dual) if xi is not None else None
    KJ = -build_J(X, p, dual) if X is not None and rep.gauge.dim else None
    return K, KJ


def _nterm(N: int, p: int, s: int = 0) -> int:
    return mi.jet_count(N, p, s)


def trace_lemmas(xi, eta, X, Y, p: int, rep: RepSpec, params: Optional[RepParams] = None) -> list[LemmaLine]:
    """Enumerated supertrace sums against their closed forms.

    The quadratic diff-diff line also carries the corrected closed form
    with (Np-1 + Np-2) sd on the cross term and Np-2 sd on the div-div term.
    """
    N = rep.N
    params = params or rep_params_direct(rep)
    cplx = rep.complex or any(
        f is not None and f.ring.domain == QQ_I for f in (xi, eta, X, Y)
    )
    R = poly_ring(N, QQ_I if cplx else QQ)
    xi = xi.to_ring(R) if xi is not None else None
    eta = eta.to_ring(R) if eta is not None else None
    X = X.to_ring(R) if X is not None else None
    Y = Y.to_ring(R) if Y is not None else None
    w = None
    lines: list[LemmaLine] = []
    Np = lambda s=0: _nterm(N, p, s)  # noqa: E731
    q = lambda v: R.ground_new(R.domain.convert(v.numerator) / R.domain.convert(v.denominator)) if isinstance(v, Fraction) else R(v)  # noqa: E731

    idx = mi.enumerate_indices(N, p)
    sd = params.sd
    lines.append(LemmaLine("I", q(Fraction(len(idx)) * sd), q(Np() * sd)))

    K1, KJ1 = momentum_operators(xi, X, p, rep)
    K2, KJ2 = momentum_operators(eta, Y, p, rep)
    ref = K1 or KJ1
    if ref is not None:
        w = ref.supertrace_weights()
    if K1 is not None:
        div1 = xi.divergence()
        lines.append(LemmaLine("T", K1.matrix.weighted_trace(w, R.zero), div1 * q(Np() * params.k0 - Np(-1) * sd)))
    if K1 is not None and K2 is not None:
        div2 = eta.divergence()
        cross = sum(
            (xi.components[mu].diff(R.gens[nu]) * eta.components[nu].diff(R.gens[mu]) for mu in range(N) for nu in range(N)),
            R.zero,
        )
        enum = K1.matrix.trace_of_product(K2.matrix, w, R.zero)
        closed = cross * q(Np() * params.k1 + Np(-1) * sd) + div1 * div2 * q(
            Np() * params.k2 + Fraction(N + 1, N) * Np(-2) * sd - 2 * Np(-1) * params.k0
        )
        corrected = cross * q(Np() * params.k1 + (Np(-1) + Np(-2)) * sd) + div1 * div2 * q(
            Np() * params.k2 + Np(-2) * sd - 2 * Np(-1) * params.k0
        )
        lines.append(LemmaLine("TT", enum, closed, corrected))
    g = rep.gauge
    if g.dim and X is not None:
        delta = [q(d) for d in g.delta]
        dX = sum((X.coeffs[a] * delta[a] for a in range(g.dim)), R.zero)
        lines.append(LemmaLine("J", KJ1.matrix.weighted_trace(w, R.zero), dX * q(params.z * Np())))
        if Y is not None:
            XY = sum((X.coeffs[a] * Y.coeffs[a] for a in range(g.dim)), R.zero)
            lines.append(LemmaLine("JJ", KJ1.matrix.trace_of_product(KJ2.matrix, w, R.zero), XY * q(params.y * Np())))
        if K1 is not None:
            lines.append(
                LemmaLine(
                    "TJ",
                    K1.matrix.trace_of_product(KJ1.matrix, w, R.zero),
                    xi.divergence() * dX * q(Np() * params.kz - Np(-1) * params.z),
                )
            )
    return lines
