"""Observer functionals and the extended diffeomorphism/gauge brackets.

A local functional is a finite sum of terms  c * e^{ikt} * prod d^j q^mu/dt^j,
either pointwise in t or integrated over the circle. Integrated terms may
carry the 1/(2 pi i) prefactor as a flag, keeping all scalars in Q(i).
Coefficients live in Q(i)[c1..c7] so the seven abelian charges stay formal.

Integrated functionals are compared modulo total derivatives: ``ibp_reduce``
picks the canonical representative by exact elimination on the finite
monomial basis of each (k, index-multiset) block, removing the monomials
with the highest derivative weight first.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Iterable, Optional, Sequence

from sympy.polys.domains import QQ, QQ_I
from sympy.polys.rings import PolyElement, ring

from .jetops import PolyGaugeMap, PolyVectorField, poly_ring
from .repkit import gauge_algebra

CHARGE_NAMES = tuple(f"c{j}" for j in range(1, 8))
CRing, *CHARGES = ring(",".join(CHARGE_NAMES), QQ_I)
I_UNIT = QQ_I(0, 1)


class BudgetExceeded(ValueError):
    """A functional outgrew the configured weight/factor bounds."""


MAX_WEIGHT = 16
MAX_FACTORS = 14


def _c(v: Any) -> PolyElement:
    """Lift an int/Fraction/QQ_I scalar into the charge ring."""
    if isinstance(v, PolyElement):
        return v
    if isinstance(v, Fraction):
        return CRing.ground_new(QQ_I.convert(QQ(v.numerator, v.denominator)))
    if isinstance(v, int):
        return CRing.ground_new(QQ_I.convert(v))
    return CRing.ground_new(QQ_I.convert(v))


@dataclass(frozen=True)
class ChargeSymbols:
    values: tuple

    @classmethod
    def symbolic(cls) -> "ChargeSymbols":
        return cls(tuple(CHARGES))

    @classmethod
    def fixed(cls, *vals: Any) -> "ChargeSymbols":
        if len(vals) != 7:
            raise ValueError("seven charges are required")
        return cls(tuple(_c(v) for v in vals))

    def with_values(self, **kw: Any) -> "ChargeSymbols":
        vals = list(self.values)
        for name, v in kw.items():
            vals[CHARGE_NAMES.index(name)] = _c(v)
        return ChargeSymbols(tuple(vals))

    def __getitem__(self, j: int) -> PolyElement:
        return self.values[j - 1]


# ---------------------------------------------------------------------------
# circle functions


@dataclass(frozen=True)
class FourierPoly:
    """Finite sum of coeff * e^{ikt}; coefficients in Q(i)."""

    coeffs: tuple  # ((k, QQ_I), ...) sorted by k

    @classmethod
    def from_dict(cls, d: dict) -> "FourierPoly":
        return cls(tuple(sorted((int(k), QQ_I.convert(v) if not hasattr(v, "y") else v) for k, v in d.items() if v)))

    @classmethod
    def mode(cls, k: int, c: Any = 1) -> "FourierPoly":
        return cls.from_dict({k: c})

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def __add__(self, other: "FourierPoly") -> "FourierPoly":
        d = defaultdict(lambda: QQ_I.zero, self.as_dict())
        for k, v in other.coeffs:
            d[k] = d[k] + v
        return FourierPoly.from_dict(d)

    def __neg__(self) -> "FourierPoly":
        return FourierPoly(tuple((k, -v) for k, v in self.coeffs))

    def __sub__(self, other: "FourierPoly") -> "FourierPoly":
        return self + (-other)

    def __mul__(self, other: "FourierPoly") -> "FourierPoly":
        d: dict = defaultdict(lambda: QQ_I.zero)
        for k, a in self.coeffs:
            for l, b in other.coeffs:
                d[k + l] = d[k + l] + a * b
        return FourierPoly.from_dict(d)

    def scale(self, c: Any) -> "FourierPoly":
        return FourierPoly.from_dict({k: QQ_I.convert(c) * v for k, v in self.coeffs})

    def diff(self, n: int = 1) -> "FourierPoly":
        out = self
        for _ in range(n):
            out = FourierPoly.from_dict({k: QQ_I(0, k) * v for k, v in out.coeffs})
        return out

    def bracket(self, other: "FourierPoly") -> "FourierPoly":
        """f g' - g f'"""
        return self * other.diff() - other * self.diff()

    def mean(self) -> Any:
        return self.as_dict().get(0, QQ_I.zero)

    def is_zero(self) -> bool:
        return not self.coeffs

    def max_mode(self) -> int:
        return max((abs(k) for k, _ in self.coeffs), default=0)


# ---------------------------------------------------------------------------
# functionals

Mono = tuple  # sorted ((mu, j), ...)
Key = tuple  # (integrated, normalized, k, mono)


def _weight(m: Mono) -> int:
    return sum(j for _, j in m)


def _order_key(m: Mono) -> tuple:
    return (_weight(m), tuple(sorted((j for _, j in m), reverse=True)), m)


def _merge(a: Mono, b: Mono) -> Mono:
    return tuple(sorted(a + b))


class LocalFunctional:
    """Linear combination of (pointwise or integrated) observer monomials."""

    __slots__ = ("N", "terms")

    def __init__(self, N: int, terms: Optional[dict] = None):
        self.N = N
        self.terms: dict[Key, PolyElement] = terms if terms is not None else {}

    # construction ---------------------------------------------------------

    @classmethod
    def zero(cls, N: int) -> "LocalFunctional":
        return cls(N)

    @classmethod
    def q(cls, N: int, mu: int, j: int = 0, coeff: Any = 1) -> "LocalFunctional":
        if not 0 <= mu < N:
            raise IndexError(mu)
        return cls(N, {(False, False, 0, ((mu, j),)): _c(coeff)})

    @classmethod
    def constant(cls, N: int, coeff: Any = 1, k: int = 0) -> "LocalFunctional":
        return cls(N, {(False, False, k, ()): _c(coeff)})

    @classmethod
    def from_poly(cls, P: PolyElement, N: int) -> "LocalFunctional":
        """P(q(t)) for a polynomial P in x0..x_{N-1}."""
        out = cls(N)
        for exps, v in P.terms():
            mono = tuple((mu, 0) for mu, e in enumerate(exps) for _ in range(e))
            out._add((False, False, 0, mono), _c(v))
        return out

    @classmethod
    def from_fourier(cls, f: FourierPoly, N: int) -> "LocalFunctional":
        out = cls(N)
        for k, v in f.coeffs:
            out._add((False, False, k, ()), _c(v))
        return out

    # arithmetic -----------------------------------------------------------

    def _add(self, key: Key, v: PolyElement) -> None:
        if not v:
            return
        w = self.terms.get(key)
        w = v if w is None else w + v
        if w:
            self.terms[key] = w
        else:
            self.terms.pop(key, None)

    def copy(self) -> "LocalFunctional":
        return LocalFunctional(self.N, dict(self.terms))

    def __add__(self, other: "LocalFunctional") -> "LocalFunctional":
        out = self.copy()
        for k, v in other.terms.items():
            out._add(k, v)
        return out

    def __sub__(self, other: "LocalFunctional") -> "LocalFunctional":
        out = self.copy()
        for k, v in other.terms.items():
            out._add(k, -v)
        return out

    def __neg__(self) -> "LocalFunctional":
        return LocalFunctional(self.N, {k: -v for k, v in self.terms.items()})

    def scale(self, c: Any) -> "LocalFunctional":
        c = _c(c)
        out = LocalFunctional(self.N)
        for k, v in self.terms.items():
            out._add(k, c * v)
        return out

    def __mul__(self, other: "LocalFunctional") -> "LocalFunctional":
        """Pointwise product of two pointwise functionals."""
        if self.integrated_part_nonzero() or other.integrated_part_nonzero():
            raise ValueError("only pointwise functionals multiply")
        out = LocalFunctional(self.N)
        for (_, _, k1, m1), a in self.terms.items():
            for (_, _, k2, m2), b in other.terms.items():
                out._add((False, False, k1 + k2, _merge(m1, m2)), a * b)
        return out

    def integrated_part_nonzero(self) -> bool:
        return any(k[0] for k in self.terms)

    def pointwise(self) -> "LocalFunctional":
        return LocalFunctional(self.N, {k: v for k, v in self.terms.items() if not k[0]})

    def integrated(self) -> "LocalFunctional":
        return LocalFunctional(self.N, {k: v for k, v in self.terms.items() if k[0]})

    def integrate(self, normalized: bool = True, coeff: Any = 1) -> "LocalFunctional":
        """coeff * (1/2 pi i if normalized) * integral dt of a pointwise functional."""
        c = _c(coeff)
        out = LocalFunctional(self.N)
        for (integ, _, k, m), v in self.terms.items():
            if integ:
                raise ValueError("already integrated")
            out._add((True, normalized, k, m), c * v)
        return out

    def d_dt(self) -> "LocalFunctional":
        out = LocalFunctional(self.N)
        for (integ, norm, k, m), v in self.terms.items():
            if integ:
                raise ValueError("total derivative of an integrated functional")
            out._add((False, norm, k, m), _c(QQ_I(0, k)) * v if k else CRing.zero)
            for idx, (mu, j) in _distinct(m):
                mult = m.count((mu, j))
                nm = list(m)
                nm.remove((mu, j))
                nm.append((mu, j + 1))
                out._add((False, norm, k, tuple(sorted(nm))), v * mult)
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LocalFunctional):
            return NotImplemented
        return ibp_reduce(self - other).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"LocalFunctional({self.terms!r})"

    def max_weight(self) -> int:
        return max((_weight(k[3]) for k in self.terms), default=0)

    # variations -----------------------------------------------------------

    def vary(self, rule: Callable[[int, int], "LocalFunctional"]) -> "LocalFunctional":
        """Leibniz extension of q^{(j)mu} -> rule(mu, j) (a pointwise functional)."""
        out = LocalFunctional(self.N)
        for (integ, norm, k, m), v in self.terms.items():
            for _, fac in _distinct(m):
                mult = m.count(fac)
                rest = list(m)
                rest.remove(fac)
                img = rule(*fac)
                for (_, _, k2, m2), w in img.terms.items():
                    out._add((integ, norm, k + k2, _merge(tuple(rest), m2)), v * w * mult)
        return out


def _distinct(m: Mono):
    seen = set()
    for idx, fac in enumerate(m):
        if fac not in seen:
            seen.add(fac)
            yield idx, fac


# ---------------------------------------------------------------------------
# integration by parts


def _partitions(total: int, parts: int, cap: int) -> Iterable[tuple[int, ...]]:
    """Non-increasing tuples of `parts` non-negative ints summing to total."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(min(total, cap), -1, -1):
        if first * parts < total:
            break
        for rest in _partitions(total - first, parts - 1, first):
            yield (first,) + rest


def _block_monomials(mus: tuple[int, ...], weight: int) -> list[Mono]:
    counts: dict[int, int] = defaultdict(int)
    for mu in mus:
        counts[mu] += 1
    keys = sorted(counts)
    out: list[Mono] = []

    def rec(i: int, remaining: int, acc: list):
        if i == len(keys):
            if remaining == 0:
                out.append(tuple(sorted(acc)))
            return
        mu = keys[i]
        c = counts[mu]
        for w in range(remaining + 1):
            for part in _partitions(w, c, w):
                rec(i + 1, remaining - w, acc + [(mu, j) for j in part])

    rec(0, weight, [])
    return out


def _D(k: int, m: Mono) -> dict:
    out: dict = {}
    if k:
        out[m] = QQ_I(0, k)
    for _, fac in _distinct(m):
        mult = m.count(fac)
        nm = list(m)
        nm.remove(fac)
        nm.append((fac[0], fac[1] + 1))
        key = tuple(sorted(nm))
        out[key] = out.get(key, QQ_I.zero) + QQ_I.convert(mult)
    return {a: b for a, b in out.items() if b}


class _Echelon:
    """Rows spanning d/dt of a block's monomials, keyed by leading monomial."""

    def __init__(self, k: int, mus: tuple[int, ...]):
        self.k = k
        self.mus = mus
        self.rows: dict[Mono, dict] = {}
        self.done_weight = -1

    def extend(self, W: int) -> None:
        while self.done_weight < W - 1:
            w = self.done_weight + 1
            for m in _block_monomials(self.mus, w):
                row = self._reduce_row(_D(self.k, m))
                if row:
                    lead = max(row, key=_order_key)
                    inv = QQ_I.one / row[lead]
                    self.rows[lead] = {a: b * inv for a, b in row.items()}
            self.done_weight = w

    def _reduce_row(self, row: dict) -> dict:
        row = dict(row)
        while True:
            piv = [m for m in row if m in self.rows]
            if not piv:
                return row
            m = max(piv, key=_order_key)
            c = row[m]
            for a, b in self.rows[m].items():
                v = row.get(a, QQ_I.zero) - c * b
                if v:
                    row[a] = v
                else:
                    row.pop(a, None)


@lru_cache(maxsize=None)
def _echelon(k: int, mus: tuple[int, ...]) -> _Echelon:
    return _Echelon(k, mus)


def ibp_reduce(F: LocalFunctional, max_weight: Optional[int] = None, max_factors: Optional[int] = None) -> LocalFunctional:
    """Canonical representative of the integrated part modulo total derivatives.

    Pointwise terms pass through unchanged.
    """
    max_weight = MAX_WEIGHT if max_weight is None else max_weight
    max_factors = MAX_FACTORS if max_factors is None else max_factors
    out = LocalFunctional(F.N)
    blocks: dict = defaultdict(dict)
    for key, v in F.terms.items():
        integ, norm, k, m = key
        if not integ:
            out._add(key, v)
            continue
        if len(m) > max_factors or _weight(m) > max_weight:
            raise BudgetExceeded(f"term {m} exceeds weight {max_weight} / factors {max_factors}")
        mus = tuple(sorted(mu for mu, _ in m))
        blocks[(norm, k, mus)][m] = v
    for (norm, k, mus), vec in blocks.items():
        if not mus:
            if k == 0:
                out._add((True, norm, 0, ()), vec[()])
            continue
        W = max(_weight(m) for m in vec)
        ech = _echelon(k, mus)
        ech.extend(W)
        vec = dict(vec)
        while True:
            piv = [m for m in vec if m in ech.rows]
            if not piv:
                break
            m = max(piv, key=_order_key)
            c = vec[m]
            for a, b in ech.rows[m].items():
                val = vec.get(a, CRing.zero) - c * _c(b)
                if val:
                    vec[a] = val
                else:
                    vec.pop(a, None)
        for m, v in vec.items():
            out._add((True, norm, k, m), v)
    return out


# ---------------------------------------------------------------------------
# algebra elements


@dataclass
class DGROElement:
    N: int
    xi: Optional[PolyVectorField] = None
    f: Optional[FourierPoly] = None
    X: Optional[PolyGaugeMap] = None
    obs: LocalFunctional = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        R = poly_ring(self.N, QQ_I)
        if self.xi is not None:
            self.xi = None if self.xi.is_zero() else self.xi.to_ring(R)
        if self.X is not None:
            self.X = None if self.X.is_zero() else self.X.to_ring(R)
        if self.f is not None and self.f.is_zero():
            self.f = None
        if self.obs is None:
            self.obs = LocalFunctional(self.N)

    def __add__(self, other: "DGROElement") -> "DGROElement":
        return DGROElement(
            self.N,
            _opt_add(self.xi, other.xi),
            _opt_add(self.f, other.f),
            _gauge_add(self.X, other.X),
            self.obs + other.obs,
        )

    def scale(self, c: Any) -> "DGROElement":
        R = poly_ring(self.N, QQ_I)
        cq = QQ_I.convert(c) if not hasattr(c, "y") else c
        return DGROElement(
            self.N,
            self.xi.scale(R.ground_new(cq)) if self.xi else None,
            self.f.scale(cq) if self.f else None,
            PolyGaugeMap(tuple(R.ground_new(cq) * x for x in self.X.coeffs), self.N) if self.X else None,
            self.obs.scale(cq),
        )

    def __neg__(self) -> "DGROElement":
        return self.scale(-1)

    def __sub__(self, other: "DGROElement") -> "DGROElement":
        return self + (-other)

    def is_zero(self) -> bool:
        return self.xi is None and self.f is None and self.X is None and ibp_reduce(self.obs).is_zero()

    @classmethod
    def diff(cls, xi: PolyVectorField) -> "DGROElement":
        return cls(xi.N, xi=xi)

    @classmethod
    def reparam(cls, N: int, f: FourierPoly) -> "DGROElement":
        return cls(N, f=f)

    @classmethod
    def gauge(cls, X: PolyGaugeMap) -> "DGROElement":
        return cls(X.N, X=X)

    @classmethod
    def observable(cls, F: LocalFunctional) -> "DGROElement":
        return cls(F.N, obs=F)


def _opt_add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _gauge_add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return PolyGaugeMap(tuple(x + y for x, y in zip(a.coeffs, b.coeffs)), a.N)


def _pw(P: PolyElement, N: int) -> LocalFunctional:
    return LocalFunctional.from_poly(P, N)


def _qdot(N: int, rho: int) -> LocalFunctional:
    return LocalFunctional.q(N, rho, 1)


def _xi_rule(xi: PolyVectorField) -> Callable[[int, int], LocalFunctional]:
    cache: dict = {}

    def rule(mu: int, j: int) -> LocalFunctional:
        key = (mu, j)
        if key not in cache:
            v = _pw(xi.components[mu], xi.N) if j == 0 else rule(mu, j - 1).d_dt()
            cache[key] = v
        return cache[key]

    return rule


def _fun_rule(g: LocalFunctional) -> Callable[[int, int], LocalFunctional]:
    """q -> -g qdot: the reparametrization by a pointwise function g(t)."""
    N = g.N
    cache: dict = {}

    def rule(mu: int, j: int) -> LocalFunctional:
        key = (mu, j)
        if key not in cache:
            v = (g * _qdot(N, mu)).scale(-1) if j == 0 else rule(mu, j - 1).d_dt()
            cache[key] = v
        return cache[key]

    return rule


def act_diff(xi: PolyVectorField, F: LocalFunctional) -> LocalFunctional:
    """[L_xi, F]"""
    return F.vary(_xi_rule(xi))


def act_reparam(f: FourierPoly, F: LocalFunctional) -> LocalFunctional:
    """[L_f, F]"""
    return F.vary(_fun_rule(LocalFunctional.from_fourier(f, F.N)))


def _div(xi: PolyVectorField) -> PolyElement:
    return xi.divergence()


def _d(P: PolyElement, rho: int) -> PolyElement:
    return P.diff(P.ring.gens[rho])


# extension lines -------------------------------------------------------------


def ext_diff_diff(xi: PolyVectorField, eta: PolyVectorField, ch: ChargeSymbols) -> LocalFunctional:
    N = xi.N
    acc = LocalFunctional(N)
    div_eta = _pw(_div(eta), N)
    for rho in range(N):
        inner = LocalFunctional(N)
        c1 = sum(
            (_d(_d(xi.components[mu], nu), rho) * _d(eta.components[nu], mu) for mu in range(N) for nu in range(N)),
            xi.ring.zero,
        )
        if c1:
            inner = inner + _pw(c1, N).scale(ch[1])
        dd = _d(_div(xi), rho)
        if dd:
            inner = inner + (_pw(dd, N) * div_eta).scale(ch[2])
        if not inner.is_zero():
            acc = acc + _qdot(N, rho) * inner
    return acc.integrate()


def _f_weight(f: FourierPoly, N: int) -> LocalFunctional:
    """f'' - i f' as a pointwise functional."""
    return LocalFunctional.from_fourier(f.diff(2) - f.diff(1).scale(I_UNIT), N)


def ext_reparam_diff(f: FourierPoly, xi: PolyVectorField, ch: ChargeSymbols) -> LocalFunctional:
    """[L_f, L_xi]: (c3 / 4 pi i) int (f'' - i f') div xi(q)"""
    N = xi.N
    return (_f_weight(f, N) * _pw(_div(xi), N)).integrate(coeff=ch[3] * _c(Fraction(1, 2)))


def ext_reparam_reparam(f: FourierPoly, g: FourierPoly, ch: ChargeSymbols, N: int) -> LocalFunctional:
    """(c4 / 24 pi i) int (f'' g' - f' g)"""
    integrand = f.diff(2) * g.diff(1) - f.diff(1) * g
    return LocalFunctional.from_fourier(integrand, N).integrate(coeff=ch[4] * _c(Fraction(1, 12)))


def _delta(algebra: str) -> tuple:
    return gauge_algebra(algebra).delta


def ext_gauge_gauge(X: PolyGaugeMap, Y: PolyGaugeMap, ch: ChargeSymbols) -> LocalFunctional:
    """-(c5 / 2 pi i) sum_a int qdot^rho d_rho X_a Y_a"""
    N = X.N
    acc = LocalFunctional(N)
    for rho in range(N):
        s = sum((_d(x, rho) * y for x, y in zip(X.coeffs, Y.coeffs)), X.ring.zero)
        if s:
            acc = acc + _qdot(N, rho) * _pw(s, N)
    return acc.integrate(coeff=-ch[5])


def ext_reparam_gauge(f: FourierPoly, X: PolyGaugeMap, ch: ChargeSymbols, algebra: str) -> LocalFunctional:
    """(c6 / 4 pi i) delta^a int (f'' - i f') X_a"""
    N = X.N
    dX = sum((X.coeffs[a] * X.ring.domain.convert(QQ(d.numerator, d.denominator)) for a, d in enumerate(_delta(algebra)) if d), X.ring.zero)
    if not dX:
        return LocalFunctional(N)
    return (_f_weight(f, N) * _pw(dX, N)).integrate(coeff=ch[6] * _c(Fraction(1, 2)))


def ext_diff_gauge(xi: PolyVectorField, X: PolyGaugeMap, ch: ChargeSymbols, algebra: str) -> LocalFunctional:
    """-(c7 / 2 pi i) delta^a int qdot^rho X_a d_rho div xi"""
    N = X.N
    dX = sum((X.coeffs[a] * X.ring.domain.convert(QQ(d.numerator, d.denominator)) for a, d in enumerate(_delta(algebra)) if d), X.ring.zero)
    if not dX:
        return LocalFunctional(N)
    acc = LocalFunctional(N)
    div = _div(xi.to_ring(X.ring))
    for rho in range(N):
        s = dX * _d(div, rho)
        if s:
            acc = acc + _qdot(N, rho) * _pw(s, N)
    return acc.integrate(coeff=-ch[7])


# brackets --------------------------------------------------------------------


def bracket(a: DGROElement, b: DGROElement, ch: ChargeSymbols, algebra: str = "none") -> DGROElement:
    """Full extended bracket, including the action on observer functionals."""
    if a.N != b.N:
        raise ValueError("elements live in different dimensions")
    N = a.N
    g = gauge_algebra(algebra)
    xi = a.xi.bracket(b.xi) if a.xi is not None and b.xi is not None else None
    f = a.f.bracket(b.f) if a.f is not None and b.f is not None else None
    X = None
    if a.X is not None and b.X is not None and g.structure is not None:
        X = a.X.bracket(b.X, g)
    if a.xi is not None and b.X is not None:
        X = _gauge_add(X, b.X.transported(a.xi))
    if b.xi is not None and a.X is not None:
        moved = a.X.transported(b.xi)
        X = _gauge_add(X, PolyGaugeMap(tuple(-c for c in moved.coeffs), N))
    obs = LocalFunctional(N)
    # extensions
    if a.xi is not None and b.xi is not None:
        obs = obs + ext_diff_diff(a.xi, b.xi, ch)
    if a.f is not None and b.xi is not None:
        obs = obs + ext_reparam_diff(a.f, b.xi, ch)
    if b.f is not None and a.xi is not None:
        obs = obs - ext_reparam_diff(b.f, a.xi, ch)
    if a.f is not None and b.f is not None:
        obs = obs + ext_reparam_reparam(a.f, b.f, ch, N)
    if a.X is not None and b.X is not None:
        obs = obs + ext_gauge_gauge(a.X, b.X, ch)
    if a.f is not None and b.X is not None:
        obs = obs + ext_reparam_gauge(a.f, b.X, ch, algebra)
    if b.f is not None and a.X is not None:
        obs = obs - ext_reparam_gauge(b.f, a.X, ch, algebra)
    if a.xi is not None and b.X is not None:
        obs = obs + ext_diff_gauge(a.xi, b.X, ch, algebra)
    if b.xi is not None and a.X is not None:
        obs = obs - ext_diff_gauge(b.xi, a.X, ch, algebra)
    # action on observer functionals; gauge generators act trivially
    if not b.obs.is_zero():
        if a.xi is not None:
            obs = obs + act_diff(a.xi, b.obs)
        if a.f is not None:
            obs = obs + act_reparam(a.f, b.obs)
    if not a.obs.is_zero():
        if b.xi is not None:
            obs = obs - act_diff(b.xi, a.obs)
        if b.f is not None:
            obs = obs - act_reparam(b.f, a.obs)
    return DGROElement(N, xi, f, X, obs)


def jacobi_defect(a: DGROElement, b: DGROElement, c: DGROElement, ch: ChargeSymbols, algebra: str = "none") -> DGROElement:
    """Cyclic sum of nested brackets with the observer part ibp-reduced."""
    total = (
        bracket(bracket(a, b, ch, algebra), c, ch, algebra)
        + bracket(bracket(b, c, ch, algebra), a, ch, algebra)
        + bracket(bracket(c, a, ch, algebra), b, ch, algebra)
    )
    total.obs = ibp_reduce(total.obs)
    return total


# ---------------------------------------------------------------------------
# gauge fixing


def on_constraint_surface(F: LocalFunctional) -> LocalFunctional:
    """q0(t) = t: replace qdot^0 by 1 and drop higher derivatives of q^0."""
    out = LocalFunctional(F.N)
    for (integ, norm, k, m), v in F.terms.items():
        kept = []
        dead = False
        for mu, j in m:
            if mu == 0 and j >= 2:
                dead = True
                break
            if mu == 0 and j == 1:
                continue
            kept.append((mu, j))
        if not dead:
            out._add((integ, norm, k, tuple(kept)), v)
    return out


def _dirac_data(xi: PolyVectorField, ch: ChargeSymbols) -> tuple[LocalFunctional, LocalFunctional]:
    """[L_xi, q0(s)] and [L_xi, L(s)] as pointwise functionals of s."""
    N = xi.N
    a0 = _pw(xi.components[0], N)
    D = _pw(_div(xi), N)
    Dd = D.d_dt()
    a1 = (Dd.d_dt() + Dd.scale(I_UNIT)).scale(-ch[3] * _c(Fraction(1, 2)))
    return a0, a1


def dirac_fix(a: DGROElement, b: DGROElement, ch: ChargeSymbols) -> DGROElement:
    """Dirac bracket for the gauge q0(s) = s, L(s) = 0.

    Supported: a = L_xi, and b one of L_eta, L_f or a pointwise observer
    functional. The returned observer part is not put on the constraint
    surface; apply ``on_constraint_surface`` for that.
    """
    if a.xi is None or a.f is not None or a.X is not None or not a.obs.is_zero():
        raise ValueError("dirac_fix supports a pure diffeomorphism on the left")
    N = a.N
    a0, a1 = _dirac_data(a.xi, ch)
    base = bracket(a, b, ch)
    if b.xi is not None and b.f is None and b.X is None and b.obs.is_zero():
        e0, e1 = _dirac_data(b.xi, ch)
        b0, b1 = -e0, -e1
        b0d = b0.d_dt()
        c4 = (a0 * (b0d.d_dt().d_dt() + b0d)).integrate(coeff=-ch[4] * _c(Fraction(1, 12)))
        corr = c4 + (a0 * b1).integrate() - (a1 * b0).integrate()
        base.obs = base.obs + corr
        return base
    if b.f is not None and b.xi is None and b.X is None and b.obs.is_zero():
        fl = LocalFunctional.from_fourier(b.f, N)
        base.obs = base.obs - (a1 * fl).integrate()
        return base
    if b.xi is None and b.f is None and b.X is None:
        F = b.obs
        if F.integrated_part_nonzero():
            raise ValueError("dirac_fix supports pointwise observer functionals")
        base.obs = base.obs + F.vary(_fun_rule(a0))
        return base
    raise ValueError("element outside the supported sector")


def tdiff_lines(xi: PolyVectorField, eta: PolyVectorField, ch: ChargeSymbols) -> dict[str, LocalFunctional]:
    """Extension of the gauge-fixed diff bracket, one functional per charge.

    Dots are total t-derivatives of the composed functions xi(q(t)).
    """
    N = xi.N
    R = poly_ring(N, QQ_I)
    xi, eta = xi.to_ring(R), eta.to_ring(R)
    x0, e0 = _pw(xi.components[0], N), _pw(eta.components[0], N)
    Dx, De = _pw(_div(xi), N), _pw(_div(eta), N)
    c1 = LocalFunctional(N)
    for mu in range(N):
        for nu in range(N):
            a = _d(xi.components[mu], nu)
            b = _d(eta.components[nu], mu)
            if a and b:
                c1 = c1 + _pw(a, N).d_dt() * _pw(b, N)
    x0d, e0d = x0.d_dt(), e0.d_dt()
    return {
        "c1": c1.integrate(coeff=ch[1]),
        "c2": (Dx.d_dt() * De).integrate(coeff=ch[2]),
        "c3": (De * (x0d.d_dt() - x0d.scale(I_UNIT)) - Dx * (e0d.d_dt() - e0d.scale(I_UNIT))).integrate(
            coeff=ch[3] * _c(Fraction(1, 2))
        ),
        "c4": (x0d.d_dt() * e0d - x0d * e0).integrate(coeff=ch[4] * _c(Fraction(1, 12))),
    }


def dirac_report(xi: PolyVectorField, eta: PolyVectorField, ch: ChargeSymbols) -> dict[str, bool]:
    """Line-by-line agreement of dirac_fix with the gauge-fixed bracket."""
    N = xi.N
    A, B = DGROElement.diff(xi), DGROElement.diff(eta)
    res = dirac_fix(A, B, ch)
    out = {"vector field": res.xi == A.xi.bracket(B.xi) if res.xi is not None else A.xi.bracket(B.xi).is_zero()}
    lines = tdiff_lines(xi, eta, ch)
    for j, line in lines.items():
        only = ChargeSymbols.fixed(*[1 if f"c{k}" == j else 0 for k in range(1, 8)])
        got = dirac_fix(A, B, only)
        part = tdiff_lines(xi, eta, only)[j]
        out[j] = ibp_reduce(got.obs - part).is_zero()
    total = sum(lines.values(), LocalFunctional(N))
    out["all"] = ibp_reduce(res.obs - total).is_zero()
    for mu in range(N):
        got = dirac_fix(A, DGROElement.observable(LocalFunctional.q(N, mu)), ch).obs
        want = _pw(A.xi.components[mu], N) - LocalFunctional.q(N, mu, 1) * _pw(A.xi.components[0], N)
        out[f"q{mu}"] = (got - want).is_zero()
    out["q0 on surface"] = on_constraint_surface(
        dirac_fix(A, DGROElement.observable(LocalFunctional.q(N, 0)), ch).obs
    ).is_zero()
    return out


# ---------------------------------------------------------------------------
# the 12 c3 restriction


def _central(F: FourierPoly) -> Any:
    """(1/2 pi i) int dt F = -i * mean(F)"""
    return -I_UNIT * F.mean()


def kk_cocycle(m: int, ch: ChargeSymbols) -> PolyElement:
    """Central part of [K_f, K_g] for f = e^{-imt}, g = e^{imt} with q0(t) = t.

    K_f = L_xi + L_f with xi = f(x0) d_0. On q0 = t, d_0 xi^0(q) = f', all
    second derivatives are f'', and qdot^0 = 1.
    """
    f, g = FourierPoly.mode(-m), FourierPoly.mode(m)
    fd, gd = f.diff(), g.diff()
    total = CRing.zero
    # diff-diff: qdot^rho (c1 d_rho d_nu xi^mu d_mu eta^nu + c2 d_rho div xi div eta)
    total += (ch[1] + ch[2]) * _c(_central(f.diff(2) * gd))
    # reparam-diff both ways: (c3/4 pi i) int (f'' - i f') g'  - (g <-> f)
    w_f = f.diff(2) - fd.scale(I_UNIT)
    w_g = g.diff(2) - gd.scale(I_UNIT)
    total += ch[3] * _c(QQ_I(QQ(1, 2), 0)) * _c(_central(w_f * gd - w_g * fd))
    # reparam-reparam
    total += ch[4] * _c(QQ_I(QQ(1, 12), 0)) * _c(_central(f.diff(2) * gd - fd * g))
    return total


def kk_central_charge(ch: ChargeSymbols) -> PolyElement:
    """Virasoro central charge of the K_f subalgebra.

    [K_f, K_g] with f = e^{-imt}, g = e^{imt} has Lie part 2im K_1, so
    l_m = -i K_{e^{-imt}} obeys [l_m, l_-m] = 2m l_0 + c/12 (m^3 - m) + (trivial),
    i.e. the cocycle E(m) = -(c/12) m^3 + O(m).
    """
    e1, e2 = kk_cocycle(1, ch), kk_cocycle(2, ch)
    cubic = (e2 - 2 * e1) * _c(Fraction(1, 6))
    return -12 * cubic


# ---------------------------------------------------------------------------
# S/R basis


@dataclass(frozen=True)
class SRTerm:
    family: str  # "S" or "R"
    rho: Optional[int]
    nus: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.nus)


def sr_expand(F: LocalFunctional) -> dict[SRTerm, LocalFunctional]:
    """Split an integrated functional into S_n (qdot strings) and R_n (one qddot) parts.

    Each value is the coefficient function F(t, q) as a pointwise
    functional of q and Fourier modes, attached to the sorted index string.
    """
    out: dict[SRTerm, LocalFunctional] = {}
    for (integ, norm, k, m), v in F.terms.items():
        if not integ:
            raise ValueError("sr_expand needs an integrated functional")
        if not norm:
            raise ValueError("the S/R basis carries the 1/(2 pi i) normalization")
        dots = tuple(sorted(mu for mu, j in m if j == 1))
        ddots = [mu for mu, j in m if j == 2]
        if any(j > 2 for _, j in m) or len(ddots) > 1:
            raise ValueError(f"monomial {m} is outside the S/R span")
        rest = tuple(f for f in m if f[1] == 0)
        key = SRTerm("R", ddots[0], dots) if ddots else SRTerm("S", None, dots)
        coeff = out.setdefault(key, LocalFunctional(F.N))
        coeff._add((False, False, k, rest), v)
    return {k: v for k, v in out.items() if not v.is_zero()}


def sr_assemble(parts: dict[SRTerm, LocalFunctional]) -> LocalFunctional:
    """Inverse of sr_expand."""
    out = LocalFunctional(next(iter(parts.values())).N if parts else 1)
    for key, coeff in parts.items():
        N = coeff.N
        string = LocalFunctional.constant(N)
        for nu in key.nus:
            string = string * LocalFunctional.q(N, nu, 1)
        if key.family == "R":
            string = string * LocalFunctional.q(N, key.rho, 2)
        out = out + (string * coeff).integrate()
    return out
