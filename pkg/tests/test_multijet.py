import random

import pytest
import sympy as sp

from conftest import from_sympy, to_sympy
from jetgroupoid import samplers as S
from jetgroupoid.errors import DimensionMismatch, NonComposable, NotInvertible
from jetgroupoid.multijet import (MultiIndex, TruncatedJet, jet_add, jet_compose, jet_invert, jet_mul,
                                  jet_of_polynomial, jet_scale)
from jetgroupoid.poly import Poly, random_poly
from jetgroupoid.rational import q

x = Poly.var(1, 0)


def jet1(value, coeffs, base=0, k=2):
    return TruncatedJet.from_coeffs([base], [value], k, {str(a): [c] for a, c in coeffs.items()})


def test_multi_index():
    a = MultiIndex.parse("2,0,1")
    assert a.order == 3 and str(a) == "2,0,1"
    assert a == MultiIndex((2, 0, 1))
    with pytest.raises(ValueError):
        MultiIndex((1, -1))


def test_jet_of_square_at_zero():
    j = jet_of_polynomial(x * x, [0], 2)
    assert j.value == (0,)
    assert j.coefficient((1,)) == (0,)
    assert j.coefficient((2,)) == (1,)


def test_jet_of_identity():
    ident = [Poly.var(3, i) for i in range(3)]
    j = jet_of_polynomial(ident, [q(1), q("2/3"), q(-4)], 1)
    assert j.value == (1, q("2/3"), -4)
    assert j.jacobian() == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def test_jet_at_one():
    j = jet_of_polynomial(x * 2 + x * x, [1], 2)
    assert j.value == (3,)
    assert j.coefficient((1,)) == (4,)
    assert j.coefficient((2,)) == (1,)


def test_jet_of_polynomial_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        jet_of_polynomial(x, [0, 0], 1)


def test_compose_example():
    outer = jet1(0, {1: 1, 2: 1})
    inner = jet1(0, {1: 1, 2: 1})
    assert jet_compose(outer, inner) == jet1(0, {1: 1, 2: 2})


def test_compose_identity():
    a = jet1(3, {1: 2, 2: 5}, base=1)
    assert jet_compose(TruncatedJet.identity([3], 2), a) == a
    assert jet_compose(a, TruncatedJet.identity([1], 2)) == a


def test_compose_linear_chain_rule():
    A = [[1, 2], [3, 4]]
    B = [[0, 1], [-1, q("1/2")]]
    outer = TruncatedJet.linear(A, [0, 0], [0, 0], 1)
    inner = TruncatedJet.linear(B, [0, 0], [0, 0], 1)
    AB = [[sum(q(A[i][l]) * B[l][j] for l in range(2)) for j in range(2)] for i in range(2)]
    assert jet_compose(outer, inner).jacobian() == AB


def test_compose_rejects_mismatched_points():
    with pytest.raises(NonComposable, match="α\\(g\\) ≠ β\\(h\\)"):
        jet_compose(jet1(0, {1: 1}, base=5), jet1(1, {1: 1}))


def test_invert_example():
    f = jet1(0, {1: 2, 2: 1})
    assert jet_invert(f) == jet1(0, {1: q("1/2"), 2: q("-1/8")})


def test_invert_identity_and_linear():
    ident = TruncatedJet.identity([q(2), q(-1)], 3)
    assert jet_invert(ident) == ident
    lin = TruncatedJet.linear([[2, 1], [1, 1]], [0, 0], [1, 1], 1)
    inv = jet_invert(lin)
    assert inv.jacobian() == [[1, -1], [-1, 2]]
    assert inv.base == (1, 1) and inv.value == (0, 0)


def test_inverse_laws_exact():
    rng = random.Random(11)
    for _ in range(20):
        a = S.random_invertible_jet(rng, rng.randint(1, 3), rng.randint(1, 4))
        ai = jet_invert(a)
        assert jet_compose(a, ai) == TruncatedJet.identity(a.value, a.order)
        assert jet_compose(ai, a) == TruncatedJet.identity(a.base, a.order)


def test_singular_jacobian_rejected():
    with pytest.raises(NotInvertible):
        jet_invert(jet1(0, {2: 1}))


def test_ring_ops():
    assert jet_add(jet1(0, {1: 1, 2: 1}), jet1(0, {1: 1, 2: -1})) == jet1(0, {1: 2})
    assert jet_mul(jet1(0, {1: 1}), jet1(0, {1: 1})) == jet1(0, {2: 1})
    assert jet_scale(3, jet_of_polynomial(x * x, [0], 2)) == jet_of_polynomial(x * x * 3, [0], 2)
    with pytest.raises(DimensionMismatch):
        jet_add(jet1(0, {1: 1}), jet1(0, {1: 1}, base=1))


def test_truncation_consistency_against_sympy():
    rng = random.Random(7)
    X, Y = sp.symbols("x y")
    for _ in range(10):
        k = rng.randint(1, 4)
        base = S.random_point(rng, 2, 5)
        f = [random_poly(rng, 2, 3, bound=5) for _ in range(2)]
        g = [random_poly(rng, 2, 3, bound=5) for _ in range(2)]
        jf = jet_of_polynomial(f, base, k)
        jg = jet_of_polynomial(g, jf.value, k)
        subs = {X: to_sympy(f[0], (X, Y)), Y: to_sympy(f[1], (X, Y))}
        composed = [from_sympy(to_sympy(c, (X, Y)).subs(subs, simultaneous=True), (X, Y)) for c in g]
        assert jet_compose(jg, jf) == jet_of_polynomial(composed, base, k)


def test_coefficients_are_taylor_coefficients():
    X, Y = sp.symbols("x y")
    p = from_sympy(X ** 3 * Y + 2 * X * Y ** 2 - Y, (X, Y))
    j = jet_of_polynomial(p, [q(1), q(2)], 3)
    expr = to_sympy(p, (X, Y))
    for alpha, vec in j.coeffs.items():
        d = sp.diff(expr, X, alpha[0], Y, alpha[1]).subs({X: 1, Y: 2})
        d = d / (sp.factorial(alpha[0]) * sp.factorial(alpha[1]))
        assert vec[0] == q(f"{sp.Rational(d).p}/{sp.Rational(d).q}")


def test_no_stored_coefficient_beyond_order():
    j = TruncatedJet([0], 2, [x * x * x + x])
    assert j.coeffs == {MultiIndex((1,)): (1,)}
    with pytest.raises(ValueError):
        TruncatedJet.from_coeffs([0], [0], 2, {"3": [1]})
