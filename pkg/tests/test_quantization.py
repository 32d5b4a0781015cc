from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from oracles import (brute_monomial_action, c_sym, cut_and_join, eisenstein_oracle,
                     partition_count_oracle, scalar_to_sympy, sigma_oracle)
from qkdv.diffpoly import DiffPoly, b_operator, dx
from qkdv.hierarchy import densities
from qkdv.partitions import LambdaElement, partitions_of, schur
from qkdv.quantization import (OperatorMatrix, apply, diagonal, diagonal_function, hook_tk,
                               hopf_eigenvalue, infinite_eigenvalue, l_operator, matrix_on,
                               moment_sk, pairing_qseries, q_bracket, q_series, qk_function,
                               quantize, trace_on)
from qkdv.quasimodular import QSeries, eisenstein, qm_to_series
from qkdv.scalar import Scalar

F = Fraction
u = DiffPoly.u
C = Scalar.monomial(c=1)


def as_sympy(f: LambdaElement) -> dict:
    return {tuple(k): scalar_to_sympy(v) for k, v in f.terms.items()}


# -- the examples in the text ------------------------------------------------------

def test_u0_is_c():
    for lam in [(), (1,), (3, 1, 1)]:
        f = LambdaElement.p(*lam)
        assert apply(quantize(u(0)), f) == f.scale(C)


def test_dx_image_quantizes_to_zero():
    for h in [u(0, 0, 0), u(0, 2), u(1, 1, 0)]:
        op = quantize(dx(h))
        for n in range(6):
            assert matrix_on(op, n).is_zero()


def test_u0_squared():
    assert apply(quantize(u(0, 0)), LambdaElement.p(3, 1)) == LambdaElement.p(3, 1).scale(C * C + 8)
    M = matrix_on(quantize(u(0, 0)), 3)
    assert M.is_diagonal()
    assert all(M.entry(l, l) == C * C + 6 for l in partitions_of(3))


@pytest.mark.parametrize("n", range(1, 7))
def test_u0_cubed_is_cut_and_join(n):
    op = quantize(u(0, 0, 0))
    for lam in partitions_of(n):
        got = op.apply_partition(lam)
        want = {mu: Scalar.const(6 * v) for mu, v in cut_and_join(tuple(lam)).items()}
        diag = C * C * C + C.scale(6 * n)
        want[tuple(lam)] = want.get(tuple(lam), Scalar.const(0)) + diag
        assert got == {k: v for k, v in want.items() if v}


def test_u0_cubed_matrix_n2():
    M = matrix_on(quantize(u(0, 0, 0)), 2)
    diag = C * C * C + C.scale(12)
    assert M.rows() == [[diag, Scalar.const(6)], [Scalar.const(6), diag]]


def test_matrix_n0():
    M = matrix_on(quantize(densities("kdv", 1)[1]), 0)
    assert M.basis == [()]
    assert len(M.rows()) == 1


# -- brute-force oracle over Fourier modes -------------------------------------------

SMALL_MONOMIALS = [(0,), (0, 0), (1, 1), (0, 2), (0, 1), (1, 2), (0, 0, 0), (0, 0, 1),
                   (0, 1, 1), (0, 0, 2), (1, 1, 2), (0, 0, 0, 0), (0, 0, 1, 1), (3,), (2, 2)]


@pytest.mark.parametrize("a", SMALL_MONOMIALS)
def test_monomial_action_matches_brute_force(a):
    op = quantize(u(*a))
    for n in range(5):
        for lam in partitions_of(n):
            assert as_sympy(LambdaElement(op.apply_partition(lam))) == \
                brute_monomial_action(a, tuple(lam))


@settings(max_examples=10)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=3),
       st.sampled_from([(2, 1), (3,), (1, 1, 1), (2, 2), (3, 1)]))
def test_action_matches_brute_force_random(a, lam):
    a = tuple(sorted(a))
    got = as_sympy(LambdaElement(quantize(u(*a)).apply_partition(lam)))
    assert got == brute_monomial_action(a, lam)


# -- structural properties -----------------------------------------------------------

@pytest.mark.parametrize("k", range(0, 4))
def test_matrices_z_symmetric(k):
    op = quantize(densities("kdv", 3)[k])
    for n in range(7):
        assert matrix_on(op, n).is_z_symmetric()


def test_z_symmetry_is_not_vacuous():
    M = OperatorMatrix(2, {((2,), (1, 1)): Scalar.const(1)})
    assert not M.is_z_symmetric()


@pytest.mark.parametrize("a", [(0, 0, 2), (1, 1, 0, 0), (0, 3, 1), (2, 2, 0)])
def test_trace_and_diagonal_agree_with_matrix(a):
    op = quantize(u(*a))
    for n in range(7):
        M = matrix_on(op, n)
        assert trace_on(op, n) == M.trace()
        for lam in partitions_of(n):
            assert diagonal(op, lam) == M.entry(lam, lam)


@pytest.mark.parametrize("a", [(0, 1), (1, 2), (0, 0, 1), (0, 1, 2), (1, 1, 1), (0, 0, 0, 3)])
def test_odd_parity(a):
    op = quantize(u(*a))
    for n in range(6):
        M = matrix_on(op, n)
        assert all(v.is_imaginary() for v in M.entries.values())
    assert q_series(op, 16).is_zero()


def test_trace_examples():
    assert trace_on(quantize(u(0, 0)), 2) == (C * C + 4).scale(2)
    for n in range(8):
        assert trace_on(quantize(DiffPoly.const(1)), n) == Scalar.const(partition_count_oracle(n))


def test_matrix_json_roundtrip():
    M = matrix_on(quantize(densities("kdv", 2)[2]), 4)
    assert OperatorMatrix.from_json(M.to_json()) == M


# -- q-series and q-brackets ---------------------------------------------------------

def _rational_series(values, N):
    return QSeries([Scalar.coerce(v) for v in values], N)


def test_q_series_u0_squared():
    N = 15
    g2 = eisenstein_oracle(2, N)
    want = [Scalar.const(2 * x) for x in g2]
    want[0] = want[0] + C * C + F(1, 12)
    assert q_series(quantize(u(0, 0)), N) == QSeries(want, N)


def test_q_series_g0():
    N = 15
    shift = QSeries([C * C / 2] + [Scalar.const(0)] * N, N)
    assert q_series(quantize(densities("kdv", 0)[0]), N) == eisenstein(2, N) + shift


def test_q_bracket_examples():
    N = 15
    one = q_bracket(qk_function(0), N)
    assert one == _rational_series([1] + [0] * N, N)
    for k in (2, 4, 6, 8):
        assert q_bracket(moment_sk(k), N) == _rational_series(eisenstein_oracle(k, N), N)
    assert q_bracket(qk_function(2), N) == _rational_series(eisenstein_oracle(2, N), N)


def test_qk_examples():
    for n in range(7):
        for lam in partitions_of(n):
            assert qk_function(0)(lam) == Scalar.const(1)
            assert qk_function(1)(lam) == Scalar.const(0)
            assert qk_function(2)(lam) == Scalar.const(n - F(1, 24))


def test_moment_and_hook_examples():
    assert moment_sk(2)((3, 1)) == Scalar.const(4 - F(1, 24))
    assert moment_sk(4)(()) == Scalar.const(F(1, 240))
    # T_2 = (1/2)(2 Q_0 Q_2 - Q_1^2) = Q_2
    for lam in partitions_of(5):
        assert hook_tk(2)(lam) == qk_function(2)(lam)


@pytest.mark.parametrize("k", range(2, 9))
def test_l_operator_diagonals(k):
    L = l_operator(k)
    S = moment_sk(k)
    T = hook_tk(k)
    for n in range(7):
        for lam in partitions_of(n):
            assert diagonal_function(L, "monomial")(lam) == S(lam)
            if k % 2 == 0:
                assert diagonal_function(L, "schur")(lam) == T(lam)


@pytest.mark.parametrize("k", [2, 4, 6])
def test_s_and_t_have_same_bracket(k):
    assert q_bracket(moment_sk(k), 14) == q_bracket(hook_tk(k), 14)


def test_l_operator_is_diagonal_on_p():
    for k in (2, 4, 6):
        for n in range(6):
            assert matrix_on(l_operator(k), n).is_diagonal()


def test_hopf_eigenvalue_small():
    # E_{-1} = c, E_0 = c^2/2 + Q_2
    for lam in partitions_of(4):
        assert hopf_eigenvalue(-1)(lam) == C
        assert hopf_eigenvalue(0)(lam) == C * C / 2 + qk_function(2)(lam)


@pytest.mark.parametrize("k", range(-2, 4))
def test_dubrovin_diagonalization(k):
    op = quantize(densities("kdv", 3)[k].subs(eps=0))
    E = hopf_eigenvalue(k)
    for n in range(7):
        for lam in partitions_of(n):
            s = schur(lam)
            assert apply(op, s) == s.scale(E(lam))


def test_infinite_eigenvalue_k0():
    for lam in partitions_of(4):
        assert infinite_eigenvalue(0)(lam) == C * C / 2 + moment_sk(2)(lam)


# -- pairing formula -----------------------------------------------------------------

@pytest.mark.parametrize("a", [(0,), (0, 0), (1, 1), (0, 0, 0), (0, 0, 2), (1, 1, 0, 0),
                               (0, 0, 0, 0), (2, 2), (1, 3), (0, 1)])
def test_pairing_matches_trace(a):
    N = 14
    assert q_series(quantize(u(*a)), N) == qm_to_series(pairing_qseries(a), N)
    assert q_series(quantize(b_operator(u(*a))), N) == \
        qm_to_series(pairing_qseries(a, reduced=True), N)


def test_c_derivative_lemma():
    # d/dc {g-bar}_q = {(dg/du0)-bar}_q
    g = densities("kdv", 3)[3]
    lhs = q_series(quantize(g), 12).diff("c")
    rhs = q_series(quantize(g.partial(0)), 12)
    assert lhs == rhs


def test_sympy_oracle_sanity():
    assert sigma_oracle(1, 6) == 12
    assert sp.expand(c_sym ** 2) == c_sym ** 2


@pytest.mark.parametrize("k", [3, 5, 7])
def test_hook_tk_vanishes_for_odd_k(k):
    # the i and k - i terms cancel, so only even k carries information
    for n in range(6):
        for lam in partitions_of(n):
            assert not hook_tk(k)(lam)
