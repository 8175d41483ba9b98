from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sympy.polys.domains import QQ_I

from jetquant import repkit as rk
from jetquant.scalars import to_qqi
from jetquant.sparse import SparseMatrix

F = Fraction


def params(block, N=2, algebra=None):
    return rk.rep_params_direct(rk.single(N, block, algebra))


def test_act_gl_vector_matrix_unit():
    irrep = rk.GlIrrep(1, 0)
    e0, e1 = irrep.basis(2)
    assert rk.act_gl(irrep, 2, 0, 1, e1) == {e0: 1}
    assert rk.act_gl(irrep, 2, 0, 1, e0) == {}


def test_act_gl_density_is_pure_weight():
    irrep = rk.GlIrrep(0, 0, F(3))
    (t,) = irrep.basis(2)
    assert rk.act_gl(irrep, 2, 1, 1, t) == {t: -3}
    assert rk.act_gl(irrep, 2, 0, 1, t) == {}


@pytest.mark.parametrize("N", [1, 2, 3])
def test_vector_trace_is_identity(N):
    rep = rk.single(N, rk.vector())
    total = SparseMatrix(N, N)
    for mu in range(N):
        total = total + rep.gl_matrix(mu, mu)
    assert total == SparseMatrix.identity(N, F(1))


@pytest.mark.parametrize("N", [1, 2, 3])
def test_gl_commutation(N):
    """[T^a_b, T^c_d] = d^c_b T^a_d - d^a_d T^c_b on every explicit block."""
    for block in (rk.vector(), rk.covector(), rk.sym2(), rk.antisym2(), rk.scalar(F(1, 2))):
        rep = rk.single(N, block)
        if rep.dim == 0:
            continue
        zero = SparseMatrix(rep.dim, rep.dim)
        T = [[rep.gl_matrix(a, b) for b in range(N)] for a in range(N)]
        for a in range(N):
            for b in range(N):
                for c in range(N):
                    for d in range(N):
                        lhs = T[a][b] @ T[c][d] - T[c][d] @ T[a][b]
                        rhs = (T[a][d] if c == b else zero) - (T[c][b] if a == d else zero)
                        assert lhs == rhs


def test_vector_params():
    for N in (2, 3, 4):
        r = params(rk.vector(), N)
        assert (r.sd, r.k0, r.k1, r.k2) == (N, 1, 1, 0)


def test_trivial_scalar_params():
    assert params(rk.scalar()) == rk.RepParams(F(1), *(F(0),) * 6)


def test_fermion_flips_every_parameter():
    for block in (rk.vector, rk.sym2, rk.covector):
        assert params(block(parity=rk.FERMION), 3) == params(block(), 3).scaled(-1)


def test_su2_adjoint_on_scalar():
    r = params(rk.scalar(gauge=rk.adjoint_irrep("su2")), 2, "su2")
    assert (r.y, r.z) == (2, 0)


def test_u1_charge_and_dual():
    rep = rk.single(2, rk.scalar(gauge=rk.gauge_irrep("u1", "0", 2)), "u1")
    r, rd = rk.rep_params_direct(rep), rk.rep_params_direct(rk.dual_rep(rep))
    assert (r.y, r.z) == (4, 2)
    assert rd.z == -2


REPS = [
    rk.scalar(),
    rk.scalar(F(1)),
    rk.scalar(F(-1, 2)),
    rk.vector(),
    rk.covector(),
    rk.sym2(),
    rk.sym2(lower=True),
    rk.antisym2(),
]


@pytest.mark.parametrize("N", [2, 3])
@pytest.mark.parametrize("block", REPS, ids=lambda b: repr(b.gl))
def test_dual_relations(N, block):
    rep = rk.single(N, block)
    r, rd = rk.rep_params_direct(rep), rk.rep_params_direct(rk.dual_rep(rep))
    assert (rd.sd, rd.k1, rd.y, rd.z) == (r.sd, r.k1, r.y, -r.z)


@pytest.mark.parametrize("N", [2, 3])
@pytest.mark.parametrize("block", REPS, ids=lambda b: repr(b.gl))
def test_closed_form_agrees(N, block):
    rep = rk.single(N, block)
    a, b = rk.rep_params_direct(rep), rk.rep_params_closed(rep)
    assert (a.sd, a.k1, a.y, a.z) == (b.sd, b.k1, b.y, b.z)


def test_index_count_label_differs_for_vector():
    # counting indices overshoots k0 by a factor N for the vector
    rep = rk.single(3, rk.vector())
    counted = rk.rep_params_closed(rep, rk.annotate(rep, convention="index_count"))
    assert counted.k0 == 3 and rk.rep_params_direct(rep).k0 == 1


def test_gauge_closed_forms():
    for alg, label, q in (("su2", "1/2", 0), ("su2", "1", 0), ("u1", "0", 3)):
        rep = rk.single(2, rk.vector(gauge=rk.gauge_irrep(alg, label, q)), alg)
        a, b = rk.rep_params_direct(rep), rk.rep_params_closed(rep)
        assert (a.sd, a.k1, a.y, a.z) == (b.sd, b.k1, b.y, b.z)
        if alg == "su2":
            assert a.z == 0


@pytest.mark.parametrize("alg", ["u1", "su2", "u1+su2"])
def test_gauge_algebra_relations(alg):
    g = rk.gauge_algebra(alg)
    g.check()
    label = "0" if alg == "u1" else "1/2"
    irrep = rk.gauge_irrep(alg, label, 0 if alg == "su2" else 1)
    J = irrep.matrices
    for a in range(g.dim):
        for b in range(g.dim):
            lhs = J[a] @ J[b] - J[b] @ J[a]
            rhs = SparseMatrix(irrep.dim, irrep.dim)
            for c in range(g.dim):
                if g.f(a, b, c):
                    rhs = rhs + J[c].scale(QQ_I(0, 1) * to_qqi(g.f(a, b, c)))
            assert lhs == rhs


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(range(len(REPS))), min_size=1, max_size=3), st.lists(st.booleans(), min_size=3, max_size=3))
def test_params_additive_over_blocks(choice, fermionic):
    blocks = [replace(REPS[i], parity=rk.FERMION if f else rk.BOSON) for i, f in zip(choice, fermionic)]
    total = rk.rep_params_direct(rk.RepSpec(2, tuple(blocks)))
    acc = rk.RepParams.zero()
    for b in blocks:
        acc = acc + rk.rep_params_direct(rk.RepSpec(2, (b,)))
    assert total == acc


def test_mixed_algebra_has_no_isotropic_trace():
    rep = rk.single(2, rk.scalar(gauge=rk.gauge_irrep("u1+su2", "1/2", 1)), "u1+su2")
    with pytest.raises(rk.PatternMismatch):
        rk.rep_params_direct(rep)
    with pytest.raises(rk.MissingAnnotation):
        rk.rep_params_closed(rep)


def test_su3_has_no_explicit_matrices():
    irrep = rk.gauge_irrep("su3", "3")
    with pytest.raises(rk.MissingAnnotation):
        irrep.matrices


def test_bad_inputs():
    with pytest.raises(ValueError):
        rk.GlIrrep(1, 0, symmetry=rk.SYM)
    with pytest.raises(ValueError):
        rk.SpeciesBlock(parity="ghost")
    with pytest.raises(ValueError):
        rk.RepSpec(2, (rk.scalar(gauge=rk.gauge_irrep("u1", "0", 1)),), "su2")
