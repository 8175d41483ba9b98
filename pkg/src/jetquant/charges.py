"""Abelian-charge calculus: base tables, reductions, model totals, large-p behaviour.

Values are exact. With an integer truncation order the counting functions
follow the binomial convention of ``multiindex.binom`` (zero outside the
range); with ``p = P`` (a sympy symbol) they become polynomials in p and
the results are polynomials too.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import factorial
from typing import Any, Iterable, Optional, Sequence, Union

import sympy

from . import multiindex as mi
from .repkit import (
    BOSON,
    FERMION,
    RepParams,
    RepSpec,
    SpeciesBlock,
    adjoint_irrep,
    rep_params,
    scalar,
    vector,
)
from .scalars import fmt_rational, to_fraction

P = sympy.Symbol("p")
Order = Union[int, sympy.Expr]

NOETHER_KINDS = ("diff", "rep", "gauge")
LONGITUDINAL = ("DD2", "DD1", "none")


def _symbolic(p: Order) -> bool:
    return not isinstance(p, int)


def counting(N: int, p: Order, shift: int = 0) -> Any:
    """C(N+p, p+shift); a polynomial in p when p is symbolic."""
    if not _symbolic(p):
        return Fraction(mi.jet_count(N, p, shift))
    k = N - shift
    if k < 0:
        return sympy.Integer(0)
    out = sympy.Integer(1)
    for i in range(k):
        out *= N + p - i
    return sympy.expand(out / factorial(k))


def _lift(v: Any, p: Order) -> Any:
    if _symbolic(p):
        f = to_fraction(v)
        return sympy.Rational(f.numerator, f.denominator)
    return to_fraction(v)


@dataclass(frozen=True)
class ChargeVector:
    values: tuple

    def __post_init__(self) -> None:
        if len(self.values) != 7:
            raise ValueError("a charge vector has seven entries")

    def __getitem__(self, j: int) -> Any:
        """1-based access: cv[4] is c4."""
        if not 1 <= j <= 7:
            raise IndexError(j)
        return self.values[j - 1]

    @property
    def symbolic(self) -> bool:
        return any(isinstance(v, sympy.Basic) and v.free_symbols for v in self.values)

    @classmethod
    def zero(cls) -> "ChargeVector":
        return cls((Fraction(0),) * 7)

    @classmethod
    def of(cls, *vals: Any) -> "ChargeVector":
        return cls(tuple(vals))

    def _norm(self, v: Any) -> Any:
        if isinstance(v, sympy.Basic):
            v = sympy.expand(v)
            if not v.free_symbols:
                return to_fraction(v)
        return v

    def __add__(self, other: "ChargeVector") -> "ChargeVector":
        return ChargeVector(tuple(self._norm(a + b) for a, b in zip(self.values, other.values)))

    def __sub__(self, other: "ChargeVector") -> "ChargeVector":
        return ChargeVector(tuple(self._norm(a - b) for a, b in zip(self.values, other.values)))

    def __neg__(self) -> "ChargeVector":
        return ChargeVector(tuple(self._norm(-a) for a in self.values))

    def scaled(self, c: Any) -> "ChargeVector":
        return ChargeVector(tuple(self._norm(c * a) for a in self.values))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChargeVector):
            return NotImplemented
        return all(sympy.expand(sympy.sympify(a) - sympy.sympify(b)) == 0 for a, b in zip(self.values, other.values))

    __hash__ = None  # type: ignore[assignment]

    def at(self, p: int) -> "ChargeVector":
        return ChargeVector(tuple(to_fraction(sympy.sympify(v).subs(P, p)) for v in self.values))

    def polys(self) -> list[sympy.Poly]:
        return [sympy.Poly(sympy.sympify(v), P, domain="QQ") for v in self.values]

    def to_json(self) -> dict:
        out = {}
        for j, v in enumerate(self.values, start=1):
            if isinstance(v, sympy.Basic) and v.free_symbols:
                poly = sympy.Poly(v, P, domain="QQ")
                out[f"c{j}"] = {str(k[0]): fmt_rational(c) for k, c in poly.terms()}
            else:
                out[f"c{j}"] = fmt_rational(v)
        return out


ParamsLike = Union[RepParams, RepSpec]


def _params(rho: ParamsLike) -> RepParams:
    return rho if isinstance(rho, RepParams) else rep_params(rho)


def c_phi(p: Order, N: int, rho: ParamsLike, lam: Any = 0) -> ChargeVector:
    """Field contribution c^(phi)_j(p, N; rho, lam)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    r = _params(rho)
    L = _lift(lam, p)
    sd, k0, k1, k2, y, z, kz = (_lift(v, p) for v in (r.sd, r.k0, r.k1, r.k2, r.y, r.z, r.kz))
    n0, n1, n2 = counting(N, p, 0), counting(N, p, -1), counting(N, p, -2)
    ratio = _lift(Fraction(N + 1, N), p)
    return ChargeVector((
        n0 * k1 + n1 * sd,
        n0 * k2 + ratio * n2 * sd - 2 * n1 * k0,
        (2 * L - 1) * (n0 * k0 - n1 * sd),
        2 * (1 - 6 * L + 6 * L * L) * n0 * sd,
        -n0 * y,
        (2 * L - 1) * n0 * z,
        n1 * z - n0 * kz,
    )).scaled(1)


def c_q(N: int) -> ChargeVector:
    """Observer-trajectory contribution."""
    return ChargeVector.of(Fraction(1), Fraction(0), Fraction(1), Fraction(2 * N), Fraction(0), Fraction(0), Fraction(0))


def c_e(lam: Any) -> ChargeVector:
    """Einbein contribution; only c4."""
    L = to_fraction(lam)
    z = Fraction(0)
    return ChargeVector.of(z, z, z, 2 * (1 - 6 * L + 6 * L * L), z, z, z)


def c_tilde(p: Order, N: int, rho: ParamsLike, lam: Any = 0) -> ChargeVector:
    """c(p, N+1) - c(p-1, N+1)."""
    r = _params(rho)
    return c_phi(p, N + 1, r, lam) - c_phi(p - 1, N + 1, r, lam)


def u_funcs(p: Order, N: int, rho: ParamsLike, lam: Any = 0) -> tuple:
    """Coefficients of the cohomologically trivial terms (u1, u2, u3).

    Defined for N >= 0; at N = 0 the counting functions degenerate to
    C(p, p+s).
    """
    r = _params(rho)
    L = _lift(lam, p)
    sd, k0, z = _lift(r.sd, p), _lift(r.k0, p), _lift(r.z, p)
    n0, n1 = counting(N, p, 0), counting(N, p, -1)
    vals = (-L * (n0 * k0 - n1 * sd), -L * z * n0, (L - L * L) * sd * n0 / 2)
    return tuple(to_fraction(v) if isinstance(v, sympy.Basic) and not v.free_symbols else v for v in vals)


def verify_u_reduction(p: int, N: int, rho: ParamsLike, lam: Any) -> bool:
    a = u_funcs(p, N, rho, lam)
    b = u_funcs(p - 1, N, rho, lam)
    c = u_funcs(p, N - 1, rho, lam)
    return all(x - y == w for x, y, w in zip(a, b, c))


def tilde_equals_plain(p: int, N: int, rho: ParamsLike, lam: Any = 0) -> list[bool]:
    """Per-j comparison of c_tilde with c_phi."""
    t, c = c_tilde(p, N, rho, lam), c_phi(p, N, rho, lam)
    return [t[j] == c[j] for j in range(1, 8)]


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class ModelSpec:
    N: int
    p: Order = 4
    fields: Optional[RepSpec] = None
    longitudinal: str = "DD2"
    el_antifields: bool = True
    include_trajectory: bool = True
    include_einbein: bool = True
    geodesic: bool = True
    noether: Optional[frozenset] = None  # None: rep, plus diff/gauge when fields exist
    noether_antifields: str = "keep"
    noether_weight: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.fields is None:
            object.__setattr__(self, "fields", RepSpec(self.N, ()))
        if self.fields.N != self.N:
            raise ValueError("field representation has a different N")
        if self.longitudinal not in LONGITUDINAL:
            raise ValueError(f"longitudinal must be one of {LONGITUDINAL}")
        if self.noether_antifields not in ("keep", "dismiss"):
            raise ValueError("noether_antifields must be 'keep' or 'dismiss'")
        if self.noether is not None:
            nn = frozenset(self.noether)
            bad = nn - set(NOETHER_KINDS)
            if bad:
                raise ValueError(f"unknown Noether kinds {sorted(bad)}")
            if "gauge" in nn and self.fields.gauge.dim == 0:
                raise ValueError("gauge Noether identities need a gauge algebra")
            object.__setattr__(self, "noether", nn)
        object.__setattr__(self, "noether_weight", to_fraction(self.noether_weight))

    @property
    def noether_kinds(self) -> frozenset:
        if self.noether is not None:
            return self.noether
        kinds = {"rep"}
        if self.fields.blocks:
            kinds.add("diff")
            if self.fields.gauge.dim:
                kinds.add("gauge")
        return frozenset(kinds)

    def block_reps(self) -> list[tuple[SpeciesBlock, RepSpec]]:
        return [(b, self.fields.with_blocks([b])) for b in self.fields.blocks]

    def noether_rep(self) -> Optional[RepSpec]:
        kinds = self.noether_kinds
        blocks = []
        if "diff" in kinds:
            blocks.append(vector())
        if "gauge" in kinds:
            blocks.append(SpeciesBlock(gauge=adjoint_irrep(self.fields.algebra)))
        if not blocks:
            return None
        return RepSpec(self.N, tuple(blocks), self.fields.algebra)

    def with_p(self, p: Order) -> "ModelSpec":
        return replace(self, p=p)


@lru_cache(maxsize=None)
def _cached_params(rep: RepSpec) -> RepParams:
    return rep_params(rep)


def sector_terms(model: ModelSpec) -> list[tuple[str, ChargeVector]]:
    """Contribution of every sector, each written with c_tilde where it applies."""
    N, p = model.N, model.p
    out: list[tuple[str, ChargeVector]] = []
    if not model.geodesic:
        if model.include_trajectory:
            out.append(("trajectory", c_q(N)))
        if model.include_einbein:
            out.append(("einbein", c_e(1)))
    for b, rep in model.block_reps():
        r = _cached_params(rep)
        lam = b.causal_weight
        name = b.name or "field"
        if model.longitudinal == "DD2":
            out.append((f"{name}", c_tilde(p, N - 1, r, lam)))
        elif model.longitudinal == "DD1":
            out.append((f"{name}", c_phi(p, N, r, lam) - c_phi(p - 1, N, r, 1)))
        else:
            out.append((f"{name}", c_phi(p, N, r, lam)))
        if model.el_antifields:
            rd = _cached_params(rep.dual())
            if model.longitudinal == "none":
                out.append((f"{name}*", -c_phi(p - b.el_order, N, rd, 0)))
            else:
                out.append((f"{name}*", -c_tilde(p - b.el_order, N - 1, rd, 0)))
    kinds = model.noether_kinds
    if "rep" in kinds:
        out.append(("noether:rep", c_e(1)))
    if model.noether_antifields == "keep":
        nrep = model.noether_rep()
        if nrep is not None:
            out.append(("noether:local", c_tilde(p - 3, N - 1, _cached_params(nrep), model.noether_weight)))
    return out


def total_charges(model: ModelSpec) -> ChargeVector:
    acc = ChargeVector.zero()
    for _, cv in sector_terms(model):
        acc = acc + cv
    return acc


def total_charges_expanded(model: ModelSpec) -> ChargeVector:
    """Same total, every sector summed from raw c_phi terms (two-route check).

    Trajectory and einbein appear with their geodesic antifields, the
    longitudinal and Bianchi-type antifields as separate c_phi terms.
    """
    N, p = model.N, model.p
    acc = ChargeVector.zero()
    if model.include_trajectory:
        acc = acc + c_q(N)
        if model.geodesic:
            acc = acc - c_q(N)
    if model.include_einbein:
        acc = acc + c_e(1)
        if model.geodesic:
            acc = acc - c_e(0)
    for b, rep in model.block_reps():
        r = rep_params(rep)
        rd = rep_params(rep.dual())
        lam, o = b.causal_weight, b.el_order
        acc = acc + c_phi(p, N, r, lam)
        if model.longitudinal == "DD2":
            acc = acc - c_phi(p - 1, N, r, lam)
        elif model.longitudinal == "DD1":
            acc = acc - c_phi(p - 1, N, r, 1)
        if model.el_antifields:
            acc = acc - c_phi(p - o, N, rd, 0)
            if model.longitudinal != "none":
                acc = acc + c_phi(p - o - 1, N, rd, 0)
    kinds = model.noether_kinds
    if "rep" in kinds:
        acc = acc + c_e(1)
    if model.noether_antifields == "keep":
        nrep = model.noether_rep()
        if nrep is not None:
            r = rep_params(nrep)
            acc = acc + c_phi(p - 3, N, r, model.noether_weight) - c_phi(p - 4, N, r, model.noether_weight)
    return acc


def u_total(model: ModelSpec) -> tuple:
    """Sum of the trivial-cocycle coefficients over field, antifield and Noether sectors."""
    N, p = model.N, model.p
    acc = [Fraction(0)] * 3 if not _symbolic(p) else [sympy.Integer(0)] * 3

    def add(vals, sign=1):
        for i, v in enumerate(vals):
            acc[i] = acc[i] + sign * v

    for b, rep in model.block_reps():
        add(u_funcs(p, N - 1, _cached_params(rep), b.causal_weight))
        if model.el_antifields:
            add(u_funcs(p - b.el_order, N - 1, _cached_params(rep.dual()), 0), -1)
    if model.noether_antifields == "keep":
        nrep = model.noether_rep()
        if nrep is not None:
            add(u_funcs(p - 3, N - 1, _cached_params(nrep), model.noether_weight))
    return tuple(sympy.expand(v) if isinstance(v, sympy.Basic) else v for v in acc)


def all_weights_zero(model: ModelSpec) -> bool:
    nrep = model.noether_rep() if model.noether_antifields == "keep" else None
    return all(b.causal_weight == 0 for b in model.fields.blocks) and (nrep is None or model.noether_weight == 0)


# ---------------------------------------------------------------------------
# large-p behaviour


@dataclass(frozen=True)
class Leading:
    degree: int  # -1 for the zero polynomial
    coeff: Fraction
    sub: Fraction = Fraction(0)

    def to_json(self) -> dict:
        return {"degree": self.degree, "leading": fmt_rational(self.coeff), "subleading": fmt_rational(self.sub)}


@dataclass(frozen=True)
class AsymptoticCoeffs:
    per_j: tuple[Leading, ...]
    total: ChargeVector

    def __getitem__(self, j: int) -> Leading:
        return self.per_j[j - 1]

    def to_json(self) -> dict:
        return {f"c{j}": lead.to_json() for j, lead in enumerate(self.per_j, start=1)}


def leading_terms(cv: ChargeVector) -> tuple[Leading, ...]:
    out = []
    for poly in cv.polys():
        if poly.is_zero:
            out.append(Leading(-1, Fraction(0)))
            continue
        d = poly.degree()
        coeffs = poly.all_coeffs()
        sub = coeffs[1] if len(coeffs) > 1 else 0
        out.append(Leading(d, to_fraction(coeffs[0]), to_fraction(sub)))
    return tuple(out)


def asymptotics(model: ModelSpec) -> AsymptoticCoeffs:
    m = model if _symbolic(model.p) else model.with_p(P)
    total = total_charges(m)
    return AsymptoticCoeffs(leading_terms(total), total)


def tilde_leading(N: int, rho: ParamsLike, lam: Any = 0) -> tuple[Leading, ...]:
    """Leading behaviour of c_tilde(p, N; rho, lam) by exact expansion."""
    return leading_terms(c_tilde(P, N, rho, lam))


def recorded_table(N: int, rho: ParamsLike, lam: Any = 0) -> tuple[tuple[int, Fraction], ...]:
    """The recorded large-p table for c_tilde(p, N; rho, lam): (power, coefficient)."""
    r = _params(rho)
    L = to_fraction(lam)
    f0, f1 = factorial(N), factorial(N + 1)
    return (
        (N + 1, r.sd / f1),
        (N + 2, r.sd / ((N + 1) * f1)),
        (N + 1, (1 - 2 * L) * r.sd / f1),
        (N, 2 * (1 - 6 * L + 6 * L * L) * r.sd / f0),
        (N, r.y / f0),
        (N, r.z / f0),
        (N + 1, r.z / f1),
    )


def table_agreement(N: int, rho: ParamsLike, lam: Any = 0) -> list[bool]:
    """Per-j: does the expansion's leading term match the recorded table?"""
    lead = tilde_leading(N, rho, lam)
    out = []
    for (n, a), got in zip(recorded_table(N, rho, lam), lead):
        if a == 0:
            out.append(got.degree < n)
        else:
            out.append(got.degree == n and got.coeff == a)
    return out


# ---------------------------------------------------------------------------
# finiteness scan


@dataclass(frozen=True)
class Species:
    """A scalar field family counted by its dimension."""

    label: str
    parity: str
    el_order: int

    def block(self) -> SpeciesBlock:
        return scalar(parity=self.parity, el_order=self.el_order, name=self.label)


DEFAULT_SPECIES = (
    Species("boson", BOSON, 2),
    Species("fermion", FERMION, 1),
    Species("auxiliary", BOSON, 0),
)


@dataclass
class ScanReport:
    N: int
    max_dim: int
    species: tuple[Species, ...]
    accepted: list[tuple[int, ...]]
    rejected: int

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "max_dim": self.max_dim,
            "species": [s.label for s in self.species],
            "accepted": [list(c) for c in self.accepted],
            "rejected": self.rejected,
        }


def _field_degrees(N: int) -> list[int]:
    """Power at which field and antifield terms cancel, per j (c_tilde at N-1)."""
    return [n for n, _ in recorded_table(N - 1, RepParams.zero())]


def finiteness_scan(N: int = 2, max_dim: int = 8, species: Sequence[Species] = DEFAULT_SPECIES) -> ScanReport:
    """Field contents whose total charges have no p^(n-1) term, Noether antifields dismissed.

    Each species contributes linearly, so its polynomial is computed once
    and candidates are scanned as integer combinations.
    """
    species = tuple(species)
    base = ModelSpec(N, P, noether=frozenset(), noether_antifields="dismiss")
    per_species = []
    for s in species:
        m = replace(base, fields=RepSpec(N, (s.block(),)))
        per_species.append([sympy.Poly(sympy.sympify(v), P, domain="QQ") for v in total_charges(m).values])
    degrees = _field_degrees(N)
    # coefficient of p^(n-1) per species and j
    top = [[poly.coeff_monomial(P ** (n - 1)) if n >= 1 else poly.coeff_monomial(1) for poly, n in zip(polys, degrees)] for polys in per_species]
    accepted, rejected = [], 0
    for counts in product(range(max_dim + 1), repeat=len(species)):
        ok = all(sum(c * top[i][j] for i, c in enumerate(counts)) == 0 for j in range(7))
        if ok:
            accepted.append(counts)
        else:
            rejected += 1
    return ScanReport(N, max_dim, species, accepted, rejected)


def brute_force_condition(counts: Sequence[int], species: Sequence[Species] = DEFAULT_SPECIES) -> bool:
    """sum over species of el_order * sd == 0."""
    return sum(c * s.el_order * (1 if s.parity == BOSON else -1) for c, s in zip(counts, species)) == 0


def empty_model(N: int, p: Order = 4) -> ModelSpec:
    return ModelSpec(N, p)
