import random

import pytest
import sympy as sp

from conftest import from_sympy, to_sympy

from jetgroupoid import samplers as S
from jetgroupoid.algebroid import (GroupJetSection, JetSection, MatrixAlgebraSpec, SemidirectSection,
                                   TrivialSection, ad, anchor, bracket_group_jet, bracket_jet,
                                   bracket_semidirect, bracket_trivial, conv, lie_derivative)
from jetgroupoid.errors import DimensionMismatch
from jetgroupoid.poly import Poly, PolyMatrix, PolyVectorField, random_poly
from jetgroupoid.rational import q

x = Poly.var(1, 0)
one = Poly.const(1, 1)
DX = PolyVectorField.coordinate(1, 0)
XDX = PolyVectorField.euler(1, 0)
E = PolyMatrix.constant(1, [[1, 0], [0, 2]])
E12 = PolyMatrix.constant(1, [[0, 1], [0, 0]])
E21 = PolyMatrix.constant(1, [[0, 0], [1, 0]])


def jacobi(br, a, b, c):
    return br(a, br(b, c)) + br(b, br(c, a)) + br(c, br(a, b))


def test_conv_convention():
    assert conv(E12, E21) == E21 @ E12 - E12 @ E21


def test_bracket_trivial_examples():
    a = TrivialSection(DX, E.scale(x))
    b = TrivialSection(XDX, PolyMatrix.zero(1, 2))
    assert bracket_trivial(a, a).is_zero()
    assert bracket_trivial(a, b) == TrivialSection(DX, E.scale(-x))
    z = PolyVectorField.zero(1)
    pure = bracket_trivial(TrivialSection(z, E12), TrivialSection(z, E21))
    assert pure == TrivialSection(z, conv(E12, E21))


def test_bracket_trivial_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        bracket_trivial(TrivialSection.zero(1, 2), TrivialSection.zero(1, 3))


def test_matrix_subalgebra():
    diag = MatrixAlgebraSpec(2, [[[1, 0], [0, 0]], [[0, 0], [0, 1]]])
    TrivialSection(DX, E.scale(x), diag)
    with pytest.raises(ValueError):
        TrivialSection(DX, E12, diag)
    with pytest.raises(ValueError):
        MatrixAlgebraSpec(2, [[[0, 1], [0, 0]], [[0, 0], [1, 0]]])


def test_trivial_laws_random():
    rng = random.Random(1)
    for _ in range(6):
        a, b, c = (S.random_trivial_section(rng, 2, 2, degree=2) for _ in range(3))
        assert (bracket_trivial(a, b) + bracket_trivial(b, a)).is_zero()
        assert jacobi(bracket_trivial, a, b, c).is_zero()
        f = random_poly(rng, 2, 2)
        lhs = bracket_trivial(a, b.scale(f))
        rhs = bracket_trivial(a, b).scale(f) + b.scale(a.theta.apply(f))
        assert lhs == rhs
        assert anchor(bracket_trivial(a, b)) == a.theta.bracket(b.theta)


def test_ad():
    a = TrivialSection(DX, E.scale(x))
    b = TrivialSection(XDX, PolyMatrix.zero(1, 2))
    assert ad(a, a).is_zero()
    assert ad(a, b) == TrivialSection(-DX, E.scale(x))
    rng = random.Random(2)
    xi, s1, s2 = (S.random_trivial_section(rng, 1, 2, degree=2) for _ in range(3))
    assert ad(xi, s1 + s2.scale(Poly.const(1, 3))) == ad(xi, s1) + ad(xi, s2).scale(Poly.const(1, 3))


def test_bracket_jet_examples():
    a, b = JetSection.holonomic(DX, 2), JetSection.holonomic(XDX, 2)
    assert bracket_jet(a, b) == JetSection.holonomic(DX.bracket(XDX), 2)
    lhs = bracket_jet(JetSection([(x, DX)], 1), JetSection.holonomic(DX, 1))
    assert lhs == JetSection.holonomic(-DX, 1)
    assert bracket_jet(a, a).is_zero()
    with pytest.raises(DimensionMismatch):
        bracket_jet(a, JetSection.holonomic(DX, 1))


def test_anchor():
    assert anchor(TrivialSection(XDX, E)) == XDX
    assert anchor(JetSection.zero(1, 2)) == PolyVectorField.zero(1)
    a, b = JetSection([(x, DX)], 1), JetSection.holonomic(DX, 1)
    assert anchor(bracket_jet(a, b)) == anchor(a).bracket(anchor(b))


def test_jet_section_representation_independent():
    two_x = x * 2
    a1 = JetSection([(x, DX), (x, XDX)], 2)
    a2 = JetSection([(two_x, DX.scale(Poly.const(1, q("1/2")))), (x, XDX)], 2)
    a3 = JetSection([(x, DX + XDX)], 2)
    assert a1 == a2 == a3
    b = JetSection([(x * x, XDX)], 2)
    assert bracket_jet(a1, b) == bracket_jet(a2, b) == bracket_jet(a3, b)


def test_jet_laws_random():
    rng = random.Random(3)
    for _ in range(4):
        a, b, c = (S.random_jet_section(rng, 2, 2, degree=2) for _ in range(3))
        assert (bracket_jet(a, b) + bracket_jet(b, a)).is_zero()
        assert jacobi(bracket_jet, a, b, c).is_zero()
        assert anchor(bracket_jet(a, b)) == anchor(a).bracket(anchor(b))


def test_bracket_group_jet_examples():
    a = GroupJetSection.holonomic(E.scale(x), 1)
    b = GroupJetSection.holonomic(E, 1)
    assert bracket_group_jet(a, b).is_zero()
    lhs = bracket_group_jet(GroupJetSection.holonomic(E12.scale(x), 1), GroupJetSection.holonomic(E21, 1))
    assert lhs == GroupJetSection.holonomic(conv(E12, E21).scale(x), 1)
    f = x * x + 1
    c, d = GroupJetSection.holonomic(E12, 2), GroupJetSection.holonomic(E21.scale(x), 2)
    assert bracket_group_jet(c.scale(f), d) == bracket_group_jet(c, d).scale(f)


def test_lie_derivative_examples():
    lam = GroupJetSection.holonomic(E.scale(x), 1)
    assert lie_derivative(JetSection.zero(1, 1), lam).is_zero()
    assert lie_derivative(JetSection.holonomic(DX, 1), lam) == GroupJetSection.holonomic(E, 1)


def test_lie_derivative_sympy_oracle():
    # holonomic terms: the value is the jet of theta(zeta), differentiated symbolically
    X, Y = sp.symbols("x y")
    rng = random.Random(4)
    for _ in range(5):
        theta = S.random_field(rng, 2, 2)
        zeta = S.random_matrix_poly(rng, 2, 2, 2)
        th = [to_sympy(c, (X, Y)) for c in theta.components]
        rows = []
        for row in zeta.rows:
            out = []
            for e in row:
                expr = to_sympy(e, (X, Y))
                out.append(from_sympy(th[0] * sp.diff(expr, X) + th[1] * sp.diff(expr, Y), (X, Y)))
            rows.append(out)
        expect = GroupJetSection.holonomic(PolyMatrix(rows), 2)
        got = lie_derivative(JetSection.holonomic(theta, 2), GroupJetSection.holonomic(zeta, 2))
        assert got == expect


def test_lie_derivative_on_function_coefficient():
    # constant zeta: only theta(f) survives
    lam = GroupJetSection([(x * x * x, E12)], 2)
    got = lie_derivative(JetSection.holonomic(XDX, 2), lam)
    assert got == GroupJetSection([(x * x * x * 3, E12)], 2)
    for y in ((q(2),), (q("-1/3"),)):
        assert got.at(y)[0][1] == Poly.const(1, 3 * y[0] ** 3)


def test_lie_derivative_properties():
    rng = random.Random(5)
    for _ in range(4):
        xi, xi2 = S.random_jet_section(rng, 1, 2, degree=2), S.random_jet_section(rng, 1, 2, degree=2)
        lam, lam2 = (S.random_group_jet_section(rng, 1, 2, 2, degree=2) for _ in range(2))
        f = Poly.from_dict(1, {"0": 1, "1": 2, "2": -1})
        # derivation of the fibre bracket
        lhs = lie_derivative(xi, bracket_group_jet(lam, lam2))
        rhs = bracket_group_jet(lie_derivative(xi, lam), lam2) + bracket_group_jet(lam, lie_derivative(xi, lam2))
        assert lhs == rhs
        # representation
        lhs = lie_derivative(bracket_jet(xi, xi2), lam)
        rhs = lie_derivative(xi, lie_derivative(xi2, lam)) - lie_derivative(xi2, lie_derivative(xi, lam))
        assert lhs == rhs
        # module structure
        assert lie_derivative(xi.scale(f), lam) == lie_derivative(xi, lam).scale(f)
        lhs = lie_derivative(xi, lam.scale(f))
        assert lhs == lam.scale(anchor(xi).apply(f)) + lie_derivative(xi, lam).scale(f)


def test_semidirect_examples():
    rng = random.Random(6)
    xi, xi2 = S.random_jet_section(rng, 1, 2, degree=2), S.random_jet_section(rng, 1, 2, degree=2)
    lam, lam2 = (S.random_group_jet_section(rng, 1, 2, 2, degree=2) for _ in range(2))
    z = GroupJetSection.zero(1, 2, 2)
    zj = JetSection.zero(1, 2)
    assert bracket_semidirect(SemidirectSection(xi, z), SemidirectSection(xi2, z)) == \
        SemidirectSection(bracket_jet(xi, xi2), z)
    assert bracket_semidirect(SemidirectSection(zj, lam), SemidirectSection(zj, lam2)) == \
        SemidirectSection(zj, bracket_group_jet(lam, lam2))
    a = SemidirectSection(xi, lam)
    assert bracket_semidirect(a, a).is_zero()
    mixed = bracket_semidirect(SemidirectSection(xi, z), SemidirectSection(zj, lam))
    assert mixed.lam == lie_derivative(xi, lam)


def test_semidirect_jacobi():
    rng = random.Random(7)
    secs = [SemidirectSection(S.random_jet_section(rng, 1, 2, degree=2),
                              S.random_group_jet_section(rng, 1, 2, 2, degree=2)) for _ in range(3)]
    assert jacobi(bracket_semidirect, *secs).is_zero()
