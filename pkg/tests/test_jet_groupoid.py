import random

import pytest

from jetgroupoid import samplers as S
from jetgroupoid.algebroid import JetSection, bracket_jet, right_invariant_defect
from jetgroupoid.errors import NonComposable, NotInvertible
from jetgroupoid.jet_groupoid import (JetArrow, arrow_compose, arrow_invert, project, prolong_diffeo_action,
                                      prolong_vector_field, prolong_vector_field_perturbative, pushforward_right)
from jetgroupoid.multijet import TruncatedJet, jet_compose, jet_of_polynomial
from jetgroupoid.poly import Poly, PolyVectorField
from jetgroupoid.rational import q

x = Poly.var(1, 0)


def is_zero(jet):
    return all(not p.coeffs for p in jet.components)


def arrow_of(p, base=0, k=2):
    return JetArrow.of_map([p], [base], k)


def test_compose_examples():
    b = arrow_of(x + x * x)
    assert arrow_compose(JetArrow.identity([0], 2), b) == b
    assert arrow_compose(arrow_of(x + x * x), b) == arrow_of(x + x * x * 2)


def test_compose_linear_jacobians():
    P = [[1, 1], [0, 1]]
    Q = [[2, 0], [1, 1]]
    a = JetArrow(TruncatedJet.linear(P, [0, 0], [0, 0], 2))
    b = JetArrow(TruncatedJet.linear(Q, [0, 0], [0, 0], 2))
    assert arrow_compose(a, b).jet.jacobian() == [[3, 1], [1, 1]]


def test_compose_endpoints_and_error():
    a = arrow_of(x * 2, base=1)
    b = arrow_of(x + 1, base=0)
    c = arrow_compose(a, b)
    assert c.source == (0,) and c.target == (2,)
    with pytest.raises(NonComposable):
        arrow_compose(b, b)


def test_invert_examples():
    f = arrow_of(x * 2 + x * x)
    inv = arrow_invert(f)
    assert inv == arrow_of(x * q("1/2") - x * x * q("1/8"))
    assert arrow_compose(f, inv) == JetArrow.identity(f.target, 2)
    ident = JetArrow.identity([q(3)], 3)
    assert arrow_invert(ident) == ident


def test_singular_arrow_rejected():
    with pytest.raises(NotInvertible):
        arrow_of(x * x)


def test_groupoid_axioms_random():
    rng = random.Random(2)
    for _ in range(25):
        a, b, c = map(JetArrow, S.random_composable_triple(rng, rng.randint(1, 3), rng.randint(1, 3)))
        assert arrow_compose(arrow_compose(a, b), c) == arrow_compose(a, arrow_compose(b, c))
        assert arrow_compose(a, JetArrow.identity(a.source, a.order)) == a
        assert arrow_compose(arrow_invert(b), b) == JetArrow.identity(b.source, b.order)


def test_project_examples():
    a = arrow_of(x + x * x * 2)
    assert project(a, 2) == a
    assert project(a, 1) == JetArrow.identity([0], 1)
    b = arrow_of(x + x * x)
    assert project(arrow_compose(b, b), 1) == arrow_compose(project(b, 1), project(b, 1))
    with pytest.raises(ValueError):
        project(a, 3)


def test_projection_is_morphism_random():
    rng = random.Random(4)
    for _ in range(15):
        a, b, _ = map(JetArrow, S.random_composable_triple(rng, 2, 3))
        for h in range(4):
            assert project(arrow_compose(a, b), h) == arrow_compose(project(a, h), project(b, h))


def test_prolong_diffeo_action():
    X = JetArrow.identity([1], 2)
    assert prolong_diffeo_action([x], X) == X
    Y = prolong_diffeo_action([x * 2], X)
    assert Y.target == (2,) and Y.jet.jacobian() == [[2]]


def test_prolong_diffeo_commutes_with_right_translation():
    rng = random.Random(9)
    phi = [x + x * x * q("1/3")]
    for _ in range(10):
        a, b, _ = map(JetArrow, S.random_composable_triple(rng, 1, 3))
        assert prolong_diffeo_action(phi, arrow_compose(a, b)) == arrow_compose(prolong_diffeo_action(phi, a), b)


def test_prolong_vector_field_examples():
    # target y = 2, Jacobian a = 3
    X = JetArrow(TruncatedJet.linear([[q(3)]], [q(5)], [q(2)], 1))
    assert is_zero(prolong_vector_field(PolyVectorField.zero(1), X))
    v = prolong_vector_field(PolyVectorField.euler(1, 0), X)
    assert v.value == (2,)
    assert v.coefficient((1,)) == (3,)


def test_prolong_vector_field_right_invariant():
    rng = random.Random(12)
    for _ in range(10):
        theta = S.random_field(rng, 2, 2)
        a, b, _ = map(JetArrow, S.random_composable_triple(rng, 2, 2))
        lhs = prolong_vector_field(theta, arrow_compose(a, b))
        assert lhs == pushforward_right(prolong_vector_field(theta, a), b)


def test_prolong_agrees_with_perturbation():
    rng = random.Random(13)
    for _ in range(10):
        theta = S.random_field(rng, 2, 3)
        a = S.random_invertible_jet(rng, 2, 3)
        X = JetArrow(a)
        assert prolong_vector_field(theta, X) == prolong_vector_field_perturbative(theta, X)


def test_prolong_is_linear():
    rng = random.Random(14)
    X = JetArrow(S.random_invertible_jet(rng, 2, 2))
    s, t = S.random_field(rng, 2, 2), S.random_field(rng, 2, 2)
    lhs = prolong_vector_field(s + t.scale(Poly.const(2, 3)), X)
    u, w = prolong_vector_field(s, X), prolong_vector_field(t, X)
    assert lhs == TruncatedJet(X.source, X.order, [p + r * 3 for p, r in zip(u.components, w.components)])


def test_prolonged_brackets_match_jet_bracket():
    # right-invariant fields of j_k mu bracket like the sections themselves
    dx, xdx = PolyVectorField.coordinate(1, 0), PolyVectorField.euler(1, 0)
    a, b = JetSection.holonomic(dx, 2), JetSection.holonomic(xdx, 2)
    assert bracket_jet(a, b) == JetSection.holonomic(dx.bracket(xdx), 2)
    for X in (arrow_of(x + x * x), arrow_of(x * 3 - x * x, base=q("1/2"))):
        assert is_zero(right_invariant_defect(a, b, X))

def test_right_invariant_defect_random():
    rng = random.Random(21)
    for _ in range(8):
        xi = S.random_jet_section(rng, 2, 2)
        eta = S.random_jet_section(rng, 2, 2)
        X = JetArrow(S.random_invertible_jet(rng, 2, 2))
        assert is_zero(right_invariant_defect(xi, eta, X)) 

def test_jet_of_polynomial_value_is_target():
    j = jet_of_polynomial([x * x + 1], [2], 1)
    X = JetArrow(j)
    assert X.source == (2,) and X.target == (5,)
    assert jet_compose(JetArrow.identity([5], 1).jet, X.jet) == X.jet
