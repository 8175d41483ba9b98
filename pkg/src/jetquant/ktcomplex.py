"""Frozen-mode Koszul-Tate complexes for toy actions.

Jets are t-independent and the observer sits at unit speed along x0 with
unit einbein, so every constraint is linear in the jets and Q is quadratic.
The differential d = [Q, .] then acts as a degree-preserving derivation of
the super-polynomial algebra in coordinates (fields, antifields) and their
momenta, and cohomology is computed by exact rank per block of
(ghost number, momentum number, polynomial degree).

Sectors:
    E         EL antifields, d phi*_m = E_m
    D         longitudinal antifields, d beta_m = -phi_{m+0}
    B         reducibility of D against E (ghost number -2)
    geodesic  linearized einbein constraint v.u - e'
    noether   toy Noether identities sum_alpha r_alpha E_alpha = 0, plus a
              ghost number -3 layer when B is present, since the identity
              also holds on the beta and so overlaps the B relations
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import sympy

from . import multiindex as mi

BOSON, FERMION = 0, 1


# ---------------------------------------------------------------------------
# toy actions


@dataclass
class ToyAction:
    """Lagrangian polynomial in the jets of a few scalar fields."""

    name: str
    N: int
    n_fields: int
    lagrangian: Callable[["JetSymbols"], sympy.Expr]
    parities: tuple[int, ...] = ()
    noether: tuple[tuple[Fraction, ...], ...] = ()

    def __post_init__(self) -> None:
        if not self.parities:
            self.parities = (BOSON,) * self.n_fields
        if any(len(r) != self.n_fields for r in self.noether):
            raise ValueError("Noether kernel length must match the number of fields")


class JetSymbols:
    """Lazily created sympy symbols phi_{alpha, m}."""

    def __init__(self, N: int):
        self.N = N
        self._sym: dict = {}
        self._rev: dict = {}

    def __call__(self, alpha: int, m: Sequence[int] = ()) -> sympy.Symbol:
        m = tuple(m) if m else (0,) * self.N
        key = (alpha, m)
        if key not in self._sym:
            s = sympy.Symbol(f"phi{alpha}_" + "_".join(map(str, m)))
            self._sym[key] = s
            self._rev[s] = key
        return self._sym[key]

    def d(self, mu: int, alpha: int = 0, m: Sequence[int] = ()) -> sympy.Symbol:
        m = tuple(m) if m else (0,) * self.N
        return self(alpha, mi.add(m, mi.unit(self.N, mu)))

    def key(self, s: sympy.Symbol) -> tuple:
        return self._rev[s]

    def total_derivative(self, expr: sympy.Expr, mu: int) -> sympy.Expr:
        out = sympy.Integer(0)
        for s in expr.free_symbols:
            if s in self._rev:
                alpha, m = self._rev[s]
                out += sympy.diff(expr, s) * self(alpha, mi.add(m, mi.unit(self.N, mu)))
        return sympy.expand(out)

    def apply_derivatives(self, expr: sympy.Expr, m: Sequence[int]) -> sympy.Expr:
        for mu, k in enumerate(m):
            for _ in range(k):
                expr = self.total_derivative(expr, mu)
        return expr


def euler_lagrange(a: ToyAction, J: JetSymbols) -> list[sympy.Expr]:
    """E^alpha = sum_n (-D)^n dL/dphi_{alpha,n}."""
    L = sympy.expand(a.lagrangian(J))
    out = []
    for alpha in range(a.n_fields):
        E = sympy.Integer(0)
        for s in L.free_symbols:
            beta, n = J.key(s)
            if beta != alpha:
                continue
            term = J.apply_derivatives(sympy.diff(L, s), n)
            E += (-1) ** mi.order(n) * term
        out.append(sympy.expand(E))
    return out


def el_order(E: sympy.Expr, J: JetSymbols) -> int:
    return max((mi.order(J.key(s)[1]) for s in E.free_symbols), default=0)


def el_jets(a: ToyAction, p: int) -> dict[tuple[int, tuple], sympy.Expr]:
    """Taylor coefficients E^alpha_{,m} for |m| <= p - o_alpha."""
    J = JetSymbols(a.N)
    out = {}
    for alpha, E in enumerate(euler_lagrange(a, J)):
        o = el_order(E, J)
        if p < o:
            raise ValueError(f"p={p} is below the EL order {o} of field {alpha}")
        for m in mi.enumerate_indices(a.N, p - o):
            out[(alpha, m)] = J.apply_derivatives(E, m)
    return out


def el_orders(a: ToyAction) -> tuple[int, ...]:
    J = JetSymbols(a.N)
    return tuple(el_order(E, J) for E in euler_lagrange(a, J))


# presets ---------------------------------------------------------------------


def _aux(J: JetSymbols) -> sympy.Expr:
    return sympy.Rational(1, 2) * J(0) ** 2


def _harmonic(J: JetSymbols) -> sympy.Expr:
    return sympy.Rational(1, 2) * (J.d(0) ** 2 - J(0) ** 2)


def _free_scalar(J: JetSymbols) -> sympy.Expr:
    return sympy.Rational(1, 2) * (J.d(0) ** 2 - J.d(1) ** 2)


def _shift_pair(J: JetSymbols) -> sympy.Expr:
    return sympy.Rational(1, 2) * (J(0) - J(1)) ** 2


def preset(name: str, N: Optional[int] = None, noether_kernel: Optional[Sequence] = None) -> ToyAction:
    """auxiliary | harmonic | free-scalar | u1-toy"""
    if name == "auxiliary":
        return ToyAction(name, N or 1, 1, _aux)
    if name == "harmonic":
        if N not in (None, 1):
            raise ValueError("the harmonic preset lives in N=1")
        return ToyAction(name, 1, 1, _harmonic)
    if name == "free-scalar":
        if N not in (None, 2):
            raise ValueError("the free-scalar preset lives in N=2")
        return ToyAction(name, 2, 1, _free_scalar)
    if name == "u1-toy":
        kernel = tuple(Fraction(x) for x in (noether_kernel or (1, 1)))
        return ToyAction(name, N or 1, 2, _shift_pair, noether=(kernel,))
    raise KeyError(f"unknown preset {name!r}")


PRESETS = ("auxiliary", "harmonic", "free-scalar", "u1-toy")


# ---------------------------------------------------------------------------
# graded basis


@dataclass(frozen=True)
class Generator:
    label: str
    species: str
    parity: int
    gh: int
    mom: int
    conjugate: int  # index of the canonically conjugate generator
    is_momentum: bool


@dataclass
class GradedBasis:
    generators: list[Generator] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.generators)

    def __getitem__(self, i: int) -> Generator:
        return self.generators[i]

    def add_pair(self, label: str, species: str, parity: int, gh: int) -> int:
        """Append a coordinate and its momentum; return the coordinate index."""
        i = len(self.generators)
        self.generators.append(Generator(label, species, parity, gh, 0, i + 1, False))
        self.generators.append(Generator("P(" + label + ")", species + "-momentum", parity, -gh, 1, i, True))
        return i

    def index(self, label: str) -> int:
        for i, g in enumerate(self.generators):
            if g.label == label:
                return i
        raise KeyError(label)


@dataclass
class KTGenerator:
    """Q = sum_a C_a P_a with each constraint C_a linear in coordinates."""

    action: ToyAction
    p: int
    basis: GradedBasis
    constraints: dict[int, dict[int, Fraction]]  # antifield -> {coordinate: coeff}
    sectors: tuple[str, ...]
    longitudinal: str = "DD2"

    @property
    def resolved(self) -> bool:
        """Sector choice expected to resolve the stationary surface."""
        s = set(self.sectors)
        if "D" in s and "B" not in s:
            return False
        if self.action.noether and "noether" not in s:
            return False
        return True

    def differential(self) -> list[dict]:
        """d on each generator as a linear form {generator: coeff}."""
        n = len(self.basis)
        img: list[dict] = [dict() for _ in range(n)]
        for a, row in self.constraints.items():
            img[a] = dict(row)
            Pa = self.basis[a].conjugate
            for y, M in row.items():
                Py = self.basis[y].conjugate
                sign = -1 if self.basis[y].parity == 0 else 1
                img[Py][Pa] = img[Py].get(Pa, Fraction(0)) + sign * M
        for d in img:
            for k in [k for k, v in d.items() if not v]:
                del d[k]
        return img

    def describe(self) -> list[str]:
        lines = []
        for a, row in sorted(self.constraints.items()):
            rhs = " + ".join(f"{v}*{self.basis[y].label}" for y, v in sorted(row.items()))
            lines.append(f"d {self.basis[a].label} = {rhs or '0'}")
        return lines


SECTORS = ("E", "D", "B", "geodesic", "noether")


def _linear(expr: sympy.Expr, coord: dict) -> dict[int, Fraction]:
    poly = sympy.Poly(expr, *coord.keys()) if expr.free_symbols else None
    out: dict[int, Fraction] = {}
    if poly is None:
        if expr != 0:
            raise ValueError("constant EL term")
        return out
    if poly.total_degree() > 1:
        raise NotImplementedError("only linear EL expressions fit the frozen complex")
    gens = list(coord.keys())
    for monom, c in poly.terms():
        if sum(monom) == 0:
            if c:
                raise ValueError("constant EL term")
            continue
        s = gens[monom.index(1)]
        out[coord[s]] = Fraction(int(c.p), int(c.q))
    return out


def build_Q(a: ToyAction, p: int, sectors: Iterable[str] = ("E",), longitudinal: str = "DD2") -> KTGenerator:
    sectors = tuple(dict.fromkeys(sectors))
    unknown = set(sectors) - set(SECTORS)
    if unknown:
        raise ValueError(f"unknown sectors {sorted(unknown)}")
    if "E" not in sectors:
        raise ValueError("the EL sector is mandatory")
    if "B" in sectors and "D" not in sectors:
        raise ValueError("the B sector needs the D sector")
    if "noether" in sectors and not a.noether:
        raise ValueError(f"preset {a.name!r} has no Noether identity")
    if longitudinal not in ("DD1", "DD2"):
        raise ValueError(longitudinal)
    B = GradedBasis()
    J = JetSymbols(a.N)
    N = a.N
    coord: dict = {}
    phi_idx: dict = {}
    for alpha in range(a.n_fields):
        for m in mi.enumerate_indices(N, p):
            i = B.add_pair(f"phi{alpha}{list(m)}", "field", a.parities[alpha], 0)
            phi_idx[(alpha, m)] = i
            coord[J(alpha, m)] = i
    cons: dict[int, dict[int, Fraction]] = {}
    E = el_jets(a, p)
    orders = el_orders(a)
    E_idx: dict = {}
    E_lin: dict = {}
    for (alpha, m), expr in E.items():
        i = B.add_pair(f"phi*{alpha}{list(m)}", "antifield", 1 - a.parities[alpha], -1)
        E_idx[(alpha, m)] = i
        E_lin[(alpha, m)] = _linear(expr, coord)
        cons[i] = E_lin[(alpha, m)]
    beta_idx: dict = {}
    if "D" in sectors:
        # frozen time, unit velocity along x0: d beta_m = -phi_{m+0}
        # (DD1 and DD2 coincide after linearizing e^{-1} around e = 1)
        for alpha in range(a.n_fields):
            for m in mi.enumerate_indices(N, p - 1):
                i = B.add_pair(f"beta{alpha}{list(m)}", "antifield", 1 - a.parities[alpha], -1)
                beta_idx[(alpha, m)] = i
                cons[i] = {phi_idx[(alpha, mi.add(m, mi.unit(N, 0)))]: Fraction(-1)}
    if "B" in sectors:
        for (alpha, m), row in E_lin.items():
            if mi.order(m) > p - orders[alpha] - 1:
                continue
            i = B.add_pair(f"b*{alpha}{list(m)}", "reducibility", a.parities[alpha], -2)
            img: dict[int, Fraction] = defaultdict(Fraction)
            for y, c in row.items():
                gen = _phi_key(phi_idx, y)
                img[beta_idx[gen]] += c
            img[E_idx[(alpha, mi.add(m, mi.unit(N, 0)))]] += 1
            cons[i] = dict(img)
    if "geodesic" in sectors:
        # O ~ v.u - e' around unit speed along x0
        u0 = B.add_pair("u0", "trajectory", 0, 0)
        for mu in range(1, N):
            B.add_pair(f"u{mu}", "trajectory", 0, 0)
        ep = B.add_pair("e'", "einbein", 0, 0)
        es = B.add_pair("e*", "einbein-antifield", 1, -1)
        cons[es] = {u0: Fraction(1), ep: Fraction(-1)}
    if "noether" in sectors:
        for k, r in enumerate(a.noether):
            o = max(orders)
            for m in mi.enumerate_indices(N, p - o):
                i = B.add_pair(f"b{k}{list(m)}", "noether-antifield", 0, -2)
                row = {}
                for alpha, c in enumerate(r):
                    if c:
                        sign = -1 if a.parities[alpha] else 1
                        row[E_idx[(alpha, m)]] = sign * c
                cons[i] = row
                if "B" not in sectors or m[0] == 0:
                    continue
                # b_{m} overlaps the B relations at m - 0: d c = b_m - sum r b*_{m-0}
                base = mi.sub(m, mi.unit(N, 0))
                c = B.add_pair(f"c{k}{list(base)}", "noether-overlap", 1, -3)
                over = {i: Fraction(1)}
                for alpha, coeff in enumerate(r):
                    if coeff:
                        sign = -1 if a.parities[alpha] else 1
                        over[B.index(f"b*{alpha}{list(base)}")] = -sign * coeff
                cons[c] = over
    return KTGenerator(a, p, B, cons, sectors, longitudinal)


def _phi_key(phi_idx: dict, y: int) -> tuple:
    for key, i in phi_idx.items():
        if i == y:
            return key
    raise KeyError(y)


# ---------------------------------------------------------------------------
# super-polynomials

Mono = tuple  # non-decreasing generator indices; odd ones at most once


def canonical(word: Sequence[int], parity: Sequence[int]) -> tuple[int, Mono]:
    """Sort a word of generators; return (sign, monomial) with sign 0 if it vanishes."""
    w = list(word)
    sign = 1
    # insertion sort counting odd-odd transpositions
    for i in range(1, len(w)):
        j = i
        while j > 0 and w[j - 1] > w[j]:
            if parity[w[j - 1]] and parity[w[j]]:
                sign = -sign
            w[j - 1], w[j] = w[j], w[j - 1]
            j -= 1
    for i in range(1, len(w)):
        if w[i] == w[i - 1] and parity[w[i]]:
            return 0, ()
    return sign, tuple(w)


def apply_derivation(img: list[dict], poly: dict, parity: Sequence[int]) -> dict:
    """Odd derivation determined by its values on generators."""
    out: dict = defaultdict(Fraction)
    for mono, c in poly.items():
        before = 0
        for i, g in enumerate(mono):
            s0 = -1 if before % 2 else 1
            for h, v in img[g].items():
                sign, m = canonical(mono[:i] + (h,) + mono[i + 1 :], parity)
                if sign:
                    out[m] += s0 * sign * c * v
            before += parity[g]
    return {m: v for m, v in out.items() if v}


def monomials(basis: GradedBasis, degree: int) -> Iterable[Mono]:
    parity = [g.parity for g in basis.generators]
    n = len(basis)

    def rec(start: int, left: int, acc: tuple):
        yield acc
        if left == 0:
            return
        for g in range(start, n):
            nxt = g + 1 if parity[g] else g
            yield from rec(nxt, left - 1, acc + (g,))

    yield from rec(0, degree, ())


def bidegree(basis: GradedBasis, mono: Mono) -> tuple[int, int]:
    return sum(basis[g].gh for g in mono), sum(basis[g].mom for g in mono)


# ---------------------------------------------------------------------------
# exact linear algebra


def rank(rows: Iterable[dict]) -> int:
    """Rank of a list of sparse rows over Q."""
    pivots: dict = {}
    r = 0
    for row in rows:
        row = dict(row)
        while row:
            lead = min(row)
            if lead not in pivots:
                inv = 1 / row[lead]
                pivots[lead] = {k: v * inv for k, v in row.items()}
                r += 1
                break
            c = row[lead]
            for k, v in pivots[lead].items():
                nv = row.get(k, 0) - c * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
    return r


def _in_span(rows: list[dict], target: dict) -> bool:
    return rank(rows + [target]) == rank(rows)


@dataclass
class _Blocks:
    by_block: dict  # (gh, mom, degree) -> list of monomials
    images: dict  # mono -> image poly


def _blocks(Q: KTGenerator, d: int) -> _Blocks:
    basis = Q.basis
    parity = [g.parity for g in basis.generators]
    img = Q.differential()
    by_block: dict = defaultdict(list)
    images: dict = {}
    for mono in monomials(basis, d):
        g, l = bidegree(basis, mono)
        by_block[(g, l, len(mono))].append(mono)
        images[mono] = apply_derivation(img, {mono: Fraction(1)}, parity)
    return _Blocks(by_block, images)


def check_nilpotent(Q: KTGenerator, d: int) -> bool:
    """d^2 = 0 on every monomial of degree <= d."""
    parity = [g.parity for g in Q.basis.generators]
    img = Q.differential()
    for mono in monomials(Q.basis, d):
        once = apply_derivation(img, {mono: Fraction(1)}, parity)
        if apply_derivation(img, once, parity):
            return False
    return True


def check_grading(Q: KTGenerator) -> bool:
    """d raises ghost number by one and preserves momentum number on generators."""
    for i, row in enumerate(Q.differential()):
        for h in row:
            if Q.basis[h].gh != Q.basis[i].gh + 1 or Q.basis[h].mom != Q.basis[i].mom:
                return False
    return True


def cohomology_dims(Q: KTGenerator, d: int) -> dict[tuple[int, int], int]:
    """dim H^g_l restricted to polynomial degree <= d, nonzero entries only."""
    bl = _blocks(Q, d)
    rk: dict = {}
    for key, monos in bl.by_block.items():
        rk[key] = rank(bl.images[m] for m in monos)
    out: dict = defaultdict(int)
    for (g, l, deg), monos in bl.by_block.items():
        dim_ker = len(monos) - rk[(g, l, deg)]
        dim_im = rk.get((g - 1, l, deg), 0)
        h = dim_ker - dim_im
        if h:
            out[(g, l)] += h
    return dict(sorted(out.items()))


# ---------------------------------------------------------------------------
# frozen-mode states


def state_poly(Q: KTGenerator, terms: dict) -> dict:
    """Normalize {tuple of generator labels or indices: coeff} into a polynomial."""
    parity = [g.parity for g in Q.basis.generators]
    out: dict = defaultdict(Fraction)
    for word, c in terms.items():
        idx = [Q.basis.index(w) if isinstance(w, str) else w for w in word]
        if any(Q.basis[i].is_momentum for i in idx):
            raise ValueError("states are built from coordinates acting on the vacuum")
        sign, m = canonical(idx, parity)
        if sign:
            out[m] += sign * Fraction(c)
    return {m: v for m, v in out.items() if v}


def apply_Q(Q: KTGenerator, state: dict) -> dict:
    parity = [g.parity for g in Q.basis.generators]
    return apply_derivation(Q.differential(), state, parity)


def physical_state_check(Q: KTGenerator, state: dict) -> str:
    """non-physical | physical-exact | physical-nontrivial for a homogeneous state."""
    if apply_Q(Q, state):
        return "non-physical"
    if not state:
        return "physical-exact"
    degs = {len(m) for m in state}
    ghs = {bidegree(Q.basis, m)[0] for m in state}
    if len(degs) != 1 or len(ghs) != 1:
        raise ValueError("state must be homogeneous in degree and ghost number")
    deg, g = degs.pop(), ghs.pop()
    bl = _blocks(Q, deg)
    rows = [bl.images[m] for m in bl.by_block.get((g - 1, 0, deg), [])]
    return "physical-exact" if _in_span(rows, state) else "physical-nontrivial"


def pairing(Q: KTGenerator, bra: Sequence, ket: dict) -> Fraction:
    """<0| P_{y1}..P_{yk} Psi |0> with momenta acting as left derivatives."""
    parity = [g.parity for g in Q.basis.generators]
    cur = dict(ket)
    for y in reversed([Q.basis.index(w) if isinstance(w, str) else w for w in bra]):
        if Q.basis[y].is_momentum:
            y = Q.basis[y].conjugate
        nxt: dict = defaultdict(Fraction)
        for mono, c in cur.items():
            before = 0
            for i, g in enumerate(mono):
                if g == y:
                    s = -1 if (parity[y] and before % 2) else 1
                    nxt[mono[:i] + mono[i + 1 :]] += s * c
                    if parity[y]:
                        break
                before += parity[g]
        # even generators repeat: the loop above already summed each occurrence
        cur = {m: v for m, v in nxt.items() if v}
    return cur.get((), Fraction(0))


def orthogonality_samples(Q: KTGenerator, degree: int = 2) -> bool:
    """<bra of ghost g'| ket of ghost g> vanishes unless g + g' = 0."""
    coords = [i for i, g in enumerate(Q.basis.generators) if not g.is_momentum]
    for k in range(1, degree + 1):
        for word in itertools.combinations_with_replacement(coords, k):
            ket = state_poly(Q, {word: 1})
            if not ket:
                continue
            g = bidegree(Q.basis, next(iter(ket)))[0]
            for bword in itertools.combinations_with_replacement(coords, k):
                gb = -sum(Q.basis[b].gh for b in bword)
                bra = [Q.basis[b].conjugate for b in bword]
                if g + gb != 0 and pairing(Q, bra, ket):
                    return False
    return True
