from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from oracles import dense_dx_invert
from qkdv.diffpoly import (DiffPoly, b_operator, d_operator, diffpoly_from_json, diffpoly_to_json,
                           dx, dx_invert, hbar_normalize, nu, parity_split, render, u0_integrate,
                           weight_decompose)
from qkdv.errors import NotInImage
from qkdv.hierarchy import densities
from qkdv.scalar import Scalar

F = Fraction
u = DiffPoly.u
EPS = Scalar.monomial(eps=1)
MU = Scalar.monomial(mu=1)


@st.composite
def monomials(draw, max_degree=4, max_index=4):
    n = draw(st.integers(0, max_degree))
    return tuple(sorted(draw(st.lists(st.integers(0, max_index), min_size=n, max_size=n))))


@st.composite
def diffpolys(draw, max_terms=4, max_degree=4, max_index=4, params=False):
    out = DiffPoly()
    for _ in range(draw(st.integers(0, max_terms))):
        m = draw(monomials(max_degree, max_index))
        coeff = draw(st.fractions(min_value=-9, max_value=9, max_denominator=9))
        key = (0, draw(st.integers(0, 2)), draw(st.integers(0, 2))) if params else (0, 0, 0)
        out = out + DiffPoly({m: Scalar({key: (coeff, F(0))})})
    return out


def test_dx_examples():
    assert dx(u(0)) == u(1)
    assert dx(u(0, 0)) == u(0, 1).scale(2)
    assert dx(DiffPoly.const(1)) == DiffPoly()


def test_dx_invert_examples():
    assert dx_invert(u(0, 1).scale(2)) == u(0, 0)
    assert dx_invert(DiffPoly()) == DiffPoly()
    with pytest.raises(NotInImage):
        dx_invert(u(0))


@given(diffpolys(params=True))
def test_dx_invert_roundtrip(q):
    q = q - DiffPoly({(): q.coefficient()}) if () in q.terms else q
    assert dx_invert(dx(q)) == q


@given(diffpolys(max_degree=3, max_index=3))
def test_dx_invert_matches_dense_solve(p):
    for w, part in weight_decompose(p).items():
        if w <= 1:
            continue
        rational = {m: s.constant_value() for m, s in part.terms.items()}
        expected = dense_dx_invert(rational)
        if expected is None:
            with pytest.raises(NotInImage):
                dx_invert(part)
        else:
            got = dx_invert(part)
            assert {m: s.constant_value() for m, s in got.terms.items()} == expected
            assert dx(got) == part


def test_weight_decompose_examples():
    assert weight_decompose(u(0, 0).scale(F(1, 2))) == {2: u(0, 0).scale(F(1, 2))}
    assert weight_decompose(u(2).scale(EPS / 24)) == {2: u(2).scale(EPS / 24)}
    assert weight_decompose(u(0) + u(1)) == {1: u(0), 2: u(1)}


@given(diffpolys(params=True))
def test_weight_properties(p):
    parts = weight_decompose(p)
    total = DiffPoly()
    for w, part in parts.items():
        assert part.is_homogeneous(w)
        assert set(weight_decompose(dx(part))) <= {w + 1}
        assert weight_decompose(d_operator(part)).get(w, DiffPoly()) == d_operator(part)
        total = total + part
    assert total == p


def test_parity_split_examples():
    assert parity_split(u(0, 2)) == (u(0, 2), DiffPoly())
    assert parity_split(u(1)) == (DiffPoly(), u(1))
    assert parity_split(u(0) + u(1)) == (u(0), u(1))


def test_b_operator_examples():
    assert b_operator(u(0)) == u(0)
    assert b_operator(u(0, 0).scale(F(1, 2))) == u(0, 0).scale(F(1, 2)) - DiffPoly.const(F(1, 24))
    assert b_operator(u(1, 1)) == u(1, 1) + DiffPoly.const(F(1, 120))
    assert nu(0, 1) == 0


@given(diffpolys(max_degree=6, max_index=5))
def test_b_operator_properties(p):
    assert b_operator(b_operator(p), inverse=True) == p
    assert b_operator(dx(p)) == dx(b_operator(p))
    assert b_operator(p.partial(0)) == b_operator(p).partial(0)


def test_d_operator_examples():
    assert d_operator(u(2).scale(EPS)) == u(2).scale(EPS)
    assert d_operator(u(0, 0, 0)) == DiffPoly()
    assert d_operator(u(0).scale(EPS * EPS * MU)) == u(0).scale(EPS * EPS * MU * 3)


def test_u0_integrate_examples():
    assert u0_integrate(u(0)) == u(0, 0).scale(F(1, 2))
    assert u0_integrate(DiffPoly.const(1)) == u(0)
    assert u0_integrate(u(0, 0, 2)) == u(0, 0, 0, 2).scale(F(1, 3))


@given(diffpolys(params=True))
def test_u0_integrate_inverts_partial(p):
    assert u0_integrate(p).partial(0) == p


def test_hbar_examples():
    assert hbar_normalize(u(0), -1) == {0: u(0)}
    assert hbar_normalize(DiffPoly.const(1), -2) == {0: DiffPoly.const(1)}
    assert hbar_normalize(u(2).scale(EPS / 24), 0) == {0: u(2).scale(EPS / 24)}


@pytest.mark.parametrize("mode", ["kdv", "ilw"])
def test_hbar_exponents_nonnegative(mode):
    table = densities(mode, 3, 2 if mode == "ilw" else None)
    for k, g in table.items():
        parts = hbar_normalize(g, k)
        assert min(parts) >= 0
        total = DiffPoly()
        for part in parts.values():
            total = total + part
        assert total == g


def test_render_and_json():
    g0 = densities("kdv", 0)[0]
    assert render(g0) == "u0^2/2 - 1/24 + (eps/24) u2"
    assert render(u(0)) == "u0"
    assert diffpoly_from_json(diffpoly_to_json(g0)) == g0
