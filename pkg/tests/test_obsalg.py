import random

import pytest
from hypothesis import given, settings, strategies as st
from sympy.polys.domains import QQ_I

from jetquant import obsalg as oa
from jetquant.jetops import PolyVectorField, random_gauge_map, random_vector_field
from jetquant.modelio import jacobi_sample

LF = oa.LocalFunctional
CH = oa.ChargeSymbols.symbolic()


def q(N, mu, j=0):
    return LF.q(N, mu, j)


def random_pointwise(rng, N, factors=3, derivs=2):
    out = LF.zero(N)
    for _ in range(rng.randint(1, 3)):
        term = LF.constant(N, rng.randint(-3, 3) or 1, k=rng.randint(-2, 2))
        for _ in range(rng.randint(0, factors)):
            term = term * q(N, rng.randrange(N), rng.randint(0, derivs))
        out = out + term
    return out


class TestFourier:
    def test_mode_derivative(self):
        f = oa.FourierPoly.mode(3, 2)
        assert f.diff().as_dict() == {3: QQ_I(0, 6)}
        assert f.diff(2).as_dict() == {3: QQ_I(-18, 0)}

    def test_bracket_is_antisymmetric(self):
        f = oa.FourierPoly.from_dict({1: 1, -2: 3})
        g = oa.FourierPoly.from_dict({0: 2, 2: -1})
        assert (f.bracket(g) + g.bracket(f)).is_zero()

    def test_mean_picks_zero_mode(self):
        f = oa.FourierPoly.from_dict({0: 5, 1: 1})
        assert f.mean() == QQ_I(5, 0)
        assert (f * oa.FourierPoly.mode(-1)).mean() == QQ_I(1, 0)


class TestIBP:
    def test_total_derivatives_vanish(self):
        N = 2
        F = q(N, 0) * q(N, 0) * q(N, 1, 1)
        assert oa.ibp_reduce(F.d_dt().integrate()).is_zero()

    def test_qddot_q_is_minus_qdot_squared(self):
        N = 1
        lhs = (q(N, 0, 2) * q(N, 0)).integrate()
        rhs = (q(N, 0, 1) * q(N, 0, 1)).integrate(coeff=-1)
        assert lhs == rhs

    def test_oscillating_constant_integrates_to_zero(self):
        assert LF.constant(2, 3, k=2).integrate() == LF.zero(2)
        assert not oa.ibp_reduce(LF.constant(2, 3, k=0).integrate()).is_zero()

    def test_pointwise_terms_pass_through(self):
        F = q(2, 1, 1)
        assert oa.ibp_reduce(F).terms == F.terms

    def test_canonical_form_is_stable(self):
        rng = random.Random(4)
        F = random_pointwise(rng, 2).integrate()
        once = oa.ibp_reduce(F)
        assert oa.ibp_reduce(once).terms == once.terms
        assert oa.ibp_reduce(F, max_weight=12).terms == once.terms

    def test_budget(self):
        F = (q(1, 0, 9) * q(1, 0, 9)).integrate()
        with pytest.raises(oa.BudgetExceeded):
            oa.ibp_reduce(F, max_weight=10)

    @settings(max_examples=40)
    @given(st.integers(0, 10**6), st.integers(1, 3))
    def test_integral_of_derivative_is_zero(self, seed, N):
        F = random_pointwise(random.Random(seed), N)
        assert oa.ibp_reduce(F.d_dt().integrate()).is_zero()

    @settings(max_examples=30)
    @given(st.integers(0, 10**6))
    def test_reduction_is_linear(self, seed):
        rng = random.Random(seed)
        F, G = random_pointwise(rng, 2).integrate(), random_pointwise(rng, 2).integrate()
        assert oa.ibp_reduce(F + G).terms == (oa.ibp_reduce(F) + oa.ibp_reduce(G)).terms


class TestActions:
    def test_diff_acts_as_derivation(self):
        rng = random.Random(8)
        xi = random_vector_field(2, 2, rng)
        F, G = random_pointwise(rng, 2), random_pointwise(rng, 2)
        lhs = oa.act_diff(xi, F * G)
        rhs = oa.act_diff(xi, F) * G + F * oa.act_diff(xi, G)
        assert lhs == rhs

    def test_translation_moves_q(self):
        xi = PolyVectorField.from_exprs(2, [1, 0])
        assert oa.act_diff(xi, q(2, 0)) == LF.constant(2, 1)
        assert oa.act_diff(xi, q(2, 1)).is_zero()


class TestBrackets:
    @pytest.mark.parametrize("algebra", ["none", "u1", "su2", "u1+su2"])
    def test_antisymmetry(self, algebra):
        rng = random.Random(algebra)
        for _ in range(3):
            a, b = (jacobi_sample(2, 2, 2, algebra, rng) for _ in range(2))
            assert (oa.bracket(a, b, CH, algebra) + oa.bracket(b, a, CH, algebra)).is_zero()

    @pytest.mark.parametrize("algebra", ["none", "u1", "su2", "u1+su2"])
    def test_jacobi(self, algebra):
        rng = random.Random(17)
        for _ in range(4):
            a, b, c = (jacobi_sample(2, 3, 3, algebra, rng) for _ in range(3))
            assert oa.jacobi_defect(a, b, c, CH, algebra).is_zero()

    def test_jacobi_with_observables(self):
        rng = random.Random(21)
        a, b = (jacobi_sample(2, 2, 2, "u1", rng) for _ in range(2))
        c = oa.DGROElement.observable(random_pointwise(rng, 2, derivs=1).integrate())
        assert oa.jacobi_defect(a, b, c, CH, "u1").is_zero()

    def test_broken_reparam_weight_fails_jacobi(self, monkeypatch):
        rng = random.Random(3)
        triples = [[jacobi_sample(2, 2, 2, "u1+su2", rng) for _ in range(3)] for _ in range(3)]
        monkeypatch.setattr(oa, "_f_weight", lambda f, N: LF.from_fourier(f, N))
        assert not any(oa.jacobi_defect(*t, CH, "u1+su2").is_zero() for t in triples)

    def test_gauge_gauge_cocycle_needs_delta(self):
        X = random_gauge_map(1, 2, 1, random.Random(1))
        Y = random_gauge_map(1, 2, 1, random.Random(2))
        assert not oa.ext_gauge_gauge(X, Y, CH).is_zero()


class TestGaugeFixed:
    @pytest.mark.parametrize("N", [2, 3])
    def test_dirac_report(self, N):
        rng = random.Random(N)
        for _ in range(2):
            report = oa.dirac_report(random_vector_field(N, 2, rng), random_vector_field(N, 2, rng), CH)
            assert all(report.values()), report

    def test_time_coordinate_commutes(self):
        rng = random.Random(5)
        xi = random_vector_field(2, 2, rng)
        res = oa.dirac_fix(oa.DGROElement.diff(xi), oa.DGROElement.observable(q(2, 0)), CH)
        assert oa.on_constraint_surface(res.obs).is_zero()

    def test_kk_restriction(self):
        c = CH
        assert oa.kk_central_charge(c.with_values(c1=0, c2=0, c4=0)) == 12 * c[3]
        assert oa.kk_central_charge(oa.ChargeSymbols.fixed(0, 0, 0, 1, 0, 0, 0)) == oa.CRing.one
        assert oa.kk_central_charge(c) == 12 * (c[1] + c[2] + c[3]) + c[4]


class TestSR:
    def test_round_trip(self):
        N = 2
        F = (q(N, 0) * q(N, 1, 1) * q(N, 0, 1) + q(N, 1, 2) * q(N, 1) + LF.constant(N, 2, k=1)).integrate()
        parts = oa.sr_expand(F)
        assert {(t.family, t.rho, t.nus) for t in parts} == {("S", None, (0, 1)), ("R", 1, ()), ("S", None, ())}
        assert oa.sr_assemble(parts).terms == F.terms

    def test_rejects_third_derivatives(self):
        with pytest.raises(ValueError):
            oa.sr_expand(q(1, 0, 3).integrate())
        with pytest.raises(ValueError):
            oa.sr_expand((q(1, 0, 2) * q(1, 0, 2)).integrate())

    def test_rejects_pointwise(self):
        with pytest.raises(ValueError):
            oa.sr_expand(q(1, 0))
