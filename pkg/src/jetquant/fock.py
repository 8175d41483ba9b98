"""Exact Fock-space oracle for normal-ordered bilinears in field/momentum modes.

Modes obey [pi^i(r), phi_j(s)} = delta^i_j delta_{r+s,0}. The ket vacuum is
annihilated by phi(r<0) and pi(r<=0); every other mode creates. A pair of
modes that can contract is a *slot* (i, r): its creator is phi_i(r) for
r >= 0 and pi^i(-r) for r < 0.

Amplitudes can live in any commutative ring whose zero is falsy (Fraction,
sympy domain elements, polynomials), so anomalies of operators with
polynomial coefficients come out as polynomials.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

from .sparse import SparseMatrix

BOSON, FERMION = 1, -1


class CutoffExceeded(ValueError):
    pass


@dataclass(frozen=True, order=True)
class ModeLabel:
    """phi_i(r) or pi^i(r) as an operator label."""

    kind: str  # "phi" or "pi"
    index: int
    mode: int

    def slot(self) -> tuple[int, int]:
        return (self.index, self.mode) if self.kind == "phi" else (self.index, -self.mode)

    def creates(self) -> bool:
        return self.mode >= 0 if self.kind == "phi" else self.mode > 0


Word = tuple  # sorted tuple of slots (index, r)


class FockState:
    """Finite combination of normal-ordered creation words acting on |0>."""

    __slots__ = ("terms", "parities")

    def __init__(self, parities: Sequence[int], terms: Optional[dict] = None):
        self.parities = tuple(parities)
        self.terms: dict[Word, Any] = terms if terms is not None else {}

    @classmethod
    def vacuum(cls, parities: Sequence[int], one: Any = Fraction(1)) -> "FockState":
        return cls(parities, {(): one})

    def _add(self, word: Word, amp: Any) -> None:
        if not amp:
            return
        w = self.terms.get(word)
        w = amp if w is None else w + amp
        if w:
            self.terms[word] = w
        else:
            self.terms.pop(word, None)

    def __add__(self, other: "FockState") -> "FockState":
        out = FockState(self.parities, dict(self.terms))
        for w, a in other.terms.items():
            out._add(w, a)
        return out

    def __sub__(self, other: "FockState") -> "FockState":
        return self + other.scaled(-1)

    def scaled(self, c: Any) -> "FockState":
        out = FockState(self.parities)
        for w, a in self.terms.items():
            out._add(w, c * a)
        return out

    def vev(self, zero: Any = Fraction(0)) -> Any:
        """<0|state>: only the empty word survives the bra vacuum."""
        return self.terms.get((), zero)

    def is_zero(self) -> bool:
        return not self.terms

    def max_mode(self) -> int:
        return max((abs(r) for w in self.terms for _, r in w), default=0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FockState):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"FockState({self.terms!r})"

    # single-mode actions -------------------------------------------------

    def _fermionic(self, slot) -> bool:
        return self.parities[slot[0]] == FERMION

    def create(self, slot) -> "FockState":
        out = FockState(self.parities)
        ferm = self._fermionic(slot)
        for w, a in self.terms.items():
            pos = 0
            while pos < len(w) and w[pos] < slot:
                pos += 1
            if ferm:
                if pos < len(w) and w[pos] == slot:
                    continue
                sign = -1 if sum(1 for s in w[:pos] if self._fermionic(s)) % 2 else 1
                out._add(w[:pos] + (slot,) + w[pos:], a if sign == 1 else -a)
            else:
                out._add(w[:pos] + (slot,) + w[pos:], a)
        return out

    def annihilate(self, slot, kappa: int) -> "FockState":
        """d_slot acting, with [d, c} = kappa on the matching creator."""
        out = FockState(self.parities)
        ferm = self._fermionic(slot)
        for w, a in self.terms.items():
            if slot not in w:
                continue
            pos = w.index(slot)
            if ferm:
                sign = -1 if sum(1 for s in w[:pos] if self._fermionic(s)) % 2 else 1
                out._add(w[:pos] + w[pos + 1:], (kappa * sign) * a)
            else:
                mult = w.count(slot)
                out._add(w[:pos] + w[pos + 1:], (kappa * mult) * a)
        return out

    def act(self, label: ModeLabel) -> "FockState":
        slot = label.slot()
        if label.creates():
            return self.create(slot)
        if label.kind == "phi":
            # [phi(r), pi(-r)} = -(-1)^parity
            return self.annihilate(slot, -self.parities[label.index])
        return self.annihilate(slot, 1)


def one_particle(parities: Sequence[int], label: ModeLabel) -> FockState:
    if not label.creates():
        raise ValueError(f"{label} annihilates the vacuum")
    return FockState.vacuum(parities).act(label)


@dataclass(frozen=True)
class BilinearTerm:
    """sum_r (a + b r + c s) M_ij :phi_i(r) pi^j(s-r):"""

    matrix: SparseMatrix
    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)
    c: Fraction = Fraction(0)

    def weight(self, r: int, s: int) -> Fraction:
        return self.a + self.b * r + self.c * s


@dataclass(frozen=True)
class BilinearOperator:
    parities: tuple[int, ...]
    terms: tuple[BilinearTerm, ...]
    shift: int = 0
    normal_ordered: bool = True

    def with_shift(self, s: int) -> "BilinearOperator":
        return BilinearOperator(self.parities, self.terms, s, self.normal_ordered)

    @classmethod
    def from_matrix(cls, matrix: SparseMatrix, parities: Sequence[int], shift: int = 0) -> "BilinearOperator":
        """Mode-independent bilinear sum_r M_ij :phi_i(r) pi^j(s-r):."""
        return cls(tuple(parities), (BilinearTerm(matrix, Fraction(1)),), shift)

    @property
    def dim(self) -> int:
        return len(self.parities)


def _relevant_modes(op: BilinearOperator, state: FockState) -> set[int]:
    s = op.shift
    rs = set(range(0, s)) if s > 0 else set()
    for w in state.terms:
        for _, r in w:
            if r < 0:
                rs.add(r)  # phi(r) annihilates slot (i, r)
            else:
                rs.add(r + s)  # pi(s-r) annihilates slot (j, r-s)
    return rs


def apply(op: BilinearOperator, state: FockState, cutoff: Optional[int] = None) -> FockState:
    """Exact image of a normal-ordered bilinear on a state."""
    if cutoff is not None and state.max_mode() + abs(op.shift) > cutoff:
        raise CutoffExceeded(f"state modes {state.max_mode()} + |shift| {abs(op.shift)} exceed cutoff {cutoff}")
    s = op.shift
    out = FockState(state.parities)
    for r in sorted(_relevant_modes(op, state)):
        u = s - r
        for term in op.terms:
            w = term.weight(r, s)
            if not w:
                continue
            for i, j, m in term.matrix.items():
                phi, pi = ModeLabel("phi", i, r), ModeLabel("pi", j, u)
                if not op.normal_ordered or not pi.creates():
                    img = state.act(pi).act(phi)
                else:
                    img = state.act(phi).act(pi)
                    if state.parities[i] == FERMION and state.parities[j] == FERMION:
                        img = img.scaled(-1)
                if not img.is_zero():
                    out = out + img.scaled(w * m)
    return out


def commutator_vev(A: BilinearOperator, B: BilinearOperator, one: Any = Fraction(1), zero: Any = Fraction(0)) -> Any:
    vac = FockState.vacuum(A.parities, one)
    ab = apply(A, apply(B, vac)).vev(zero)
    ba = apply(B, apply(A, vac)).vev(zero)
    return ab - ba


def anomaly(A: BilinearOperator, B: BilinearOperator, m: int, one: Any = Fraction(1), zero: Any = Fraction(0)) -> Any:
    """<0|[A_m, B_-m]|0>.

    The classical part of the commutator is a normal-ordered bilinear at
    shift 0, whose vacuum value vanishes, so nothing is subtracted.
    """
    if A.parities != B.parities:
        raise ValueError("operators act on different fibers")
    return commutator_vev(A.with_shift(m), B.with_shift(-m), one, zero)


def supertrace_product(A: SparseMatrix, B: SparseMatrix, parities: Sequence[int], zero: Any = Fraction(0)) -> Any:
    return A.trace_of_product(B, list(parities), zero)


# ---------------------------------------------------------------------------
# Virasoro measurement


@dataclass(frozen=True)
class WeightedPair:
    """A field/momentum pair family of causal weight lam."""

    lam: Fraction
    parity: int = BOSON
    multiplicity: int = 1


def _pairs(system: Iterable[Any]) -> list[WeightedPair]:
    out = []
    for item in system:
        if isinstance(item, WeightedPair):
            out.append(item)
        else:
            lam, parity, mult = item
            if isinstance(parity, str):
                parity = BOSON if parity == "boson" else FERMION
            out.append(WeightedPair(Fraction(lam), parity, int(mult)))
    return out


def reparametrization_operator(system: Iterable[Any]) -> BilinearOperator:
    """L_s = sum_r (r - lam s) :phi(r) pi(s-r):, summed over the system.

    This is L_f for f = exp(i s t) in units of 2 pi i; it obeys
    [L_m, L_n] = (n - m) L_{m+n} + anomaly.
    """
    pairs = _pairs(system)
    parities: list[int] = []
    terms = []
    offset = 0
    dim = sum(p.multiplicity for p in pairs)
    for pair in pairs:
        proj = SparseMatrix(dim, dim)
        for k in range(pair.multiplicity):
            proj.add_to(offset + k, offset + k, Fraction(1))
            parities.append(pair.parity)
        offset += pair.multiplicity
        terms.append(BilinearTerm(proj, Fraction(0), Fraction(1), -pair.lam))
    return BilinearOperator(tuple(parities), tuple(terms))


@dataclass(frozen=True)
class VirasoroFit:
    c: Fraction
    h: Fraction
    values: tuple[Fraction, Fraction]


def virasoro_fit(system: Iterable[Any], cutoff: int = 2) -> VirasoroFit:
    """Fit <0|[l_m, l_-m]|0> = c/12 (m^3 - m) + 2 m h at m = 1, 2.

    Field modes carry exp(-i r t), so the positive-energy mode l_m is the
    generator at shift -m; then [l_m, l_n] = (m - n) l_{m+n} + ...
    """
    if cutoff < 2:
        raise CutoffExceeded("the two-mode solve needs cutoff >= 2")
    gen = reparametrization_operator(system)
    a1 = anomaly(gen, gen, -1)
    a2 = anomaly(gen, gen, -2)
    h = a1 / 2
    c = 2 * (a2 - 4 * h)
    return VirasoroFit(c, h, (a1, a2))


def virasoro_charge(system: Iterable[Any], cutoff: int = 2) -> Fraction:
    """Central charge measured from <0|[ell_m, ell_-m]|0> at m = 1, 2."""
    return virasoro_fit(system, cutoff).c


# ---------------------------------------------------------------------------
# conventions


def vacuum_conventions_check(max_mode: int = 3) -> dict[str, bool]:
    par = (BOSON, FERMION)
    vac = FockState.vacuum(par)
    rs = range(-max_mode, max_mode + 1)
    out: dict[str, bool] = {}
    out["ket annihilators"] = all(
        vac.act(ModeLabel("phi", i, r)).is_zero() == (r < 0) and vac.act(ModeLabel("pi", i, r)).is_zero() == (r <= 0)
        for i in range(2)
        for r in rs
    )
    # <0| is killed by creators from the right, so every one-mode vev vanishes
    out["field vev zero"] = all(vac.act(ModeLabel(k, i, r)).vev() == 0 for k in ("phi", "pi") for i in range(2) for r in rs)
    # <0| phi(r>=0) = 0: <0| phi(r) |psi> = 0 for any psi
    probes = [vac.act(ModeLabel("pi", 0, 2)), vac.act(ModeLabel("phi", 1, 1)), vac]
    out["bra annihilators"] = all(
        psi.act(ModeLabel("phi", i, r)).vev() == 0 for psi in probes for i in range(2) for r in range(0, max_mode + 1)
    ) and all(psi.act(ModeLabel("pi", i, r)).vev() == 0 for psi in probes for i in range(2) for r in range(1, max_mode + 1))
    # canonical relation on a probe
    ok = True
    for psi in probes:
        for i in range(2):
            for r in rs:
                for s_ in rs:
                    a = psi.act(ModeLabel("phi", i, s_)).act(ModeLabel("pi", i, r))
                    b = psi.act(ModeLabel("pi", i, r)).act(ModeLabel("phi", i, s_))
                    got = a + b if par[i] == FERMION else a - b
                    want = psi if r + s_ == 0 else FockState(par)
                    ok = ok and got == want
    out["canonical relation"] = ok
    # constant shift of the zero mode: (phi(0) + c) has the same commutators
    c = Fraction(7, 3)
    ok = True
    for psi in probes:
        for r in rs:
            plain = psi.act(ModeLabel("phi", 0, 0)).act(ModeLabel("pi", 0, r)) - psi.act(ModeLabel("pi", 0, r)).act(ModeLabel("phi", 0, 0))
            shifted = (
                psi.act(ModeLabel("phi", 0, 0)).act(ModeLabel("pi", 0, r)) + psi.scaled(c).act(ModeLabel("pi", 0, r))
            ) - (psi.act(ModeLabel("pi", 0, r)).act(ModeLabel("phi", 0, 0)) + psi.act(ModeLabel("pi", 0, r)).scaled(c))
            ok = ok and plain == shifted
    out["shifted variable brackets"] = ok
    fit = virasoro_fit([(0, BOSON, 1)])
    out["m=1 gives 2h"] = fit.values[0] == 2 * fit.h
    return out


def operator_from_jet(jm: Any) -> BilinearOperator:
    """Bilinear with a jet matrix as its internal matrix (rows and columns over the jet fiber)."""
    return BilinearOperator.from_matrix(jm.matrix, jm.supertrace_weights())


def jet_anomaly(A: Any, B: Any, m: int) -> Any:
    """Anomaly of two jet-matrix bilinears, as a polynomial in the background point."""
    R = A.ring
    return anomaly(operator_from_jet(A), operator_from_jet(B), m, R.one, R.zero)
