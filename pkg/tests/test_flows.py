import math
import random

import numpy as np
import pytest
from scipy.linalg import expm

from jetgroupoid import samplers as S
from jetgroupoid.algebroid import JetSection, TrivialSection
from jetgroupoid.errors import BlowUp
from jetgroupoid.flows import (FlowConfig, ad_defect, anchor_defect, bch_defect, derivative_defect,
                               exp_group_jet, exp_jet, exp_section, exp_trivial, exp_trivial_element,
                               exp_trivial_path, flow_vector_field, group_jet_product, group_law_defect,
                               loglog_slope, projection_defect, stencil_jet, translation_action,
                               trivial_compose, trivial_unit, TrivialElement)
from jetgroupoid.multijet import TruncatedJet
from jetgroupoid.poly import Poly, PolyMatrix, PolyVectorField
from jetgroupoid.rational import q

x = Poly.var(1, 0)
DX = PolyVectorField.coordinate(1, 0)
XDX = PolyVectorField.euler(1, 0)
E12 = PolyMatrix.constant(1, [[0, 1], [0, 0]])
BCH_TS = (0.2, 0.1, 0.05, 0.025)


def field(*comps):
    return PolyVectorField(list(comps))


def test_config_validation(monkeypatch):
    with pytest.raises(ValueError):
        FlowConfig(step=0)
    monkeypatch.setenv("JETG_STEP", "0.01")
    assert FlowConfig.from_env().step == 0.01
    assert FlowConfig.from_env(step=0.002).step == 0.002


def test_flow_examples():
    assert np.allclose(flow_vector_field(PolyVectorField.zero(2), [1, 2], 3.0), [1, 2])
    assert abs(flow_vector_field(XDX, [1], 1.0)[0] - math.e) < 1e-8
    with pytest.raises(BlowUp):
        flow_vector_field(field(x * x), [1], 1.0)


def test_blowup_time_is_reported():
    with pytest.raises(BlowUp) as exc:
        flow_vector_field(field(x * x), [1], 1.5)
    assert abs(exc.value.t - 1.0) < 1e-3


def test_linear_fields_are_global():
    # affine flows: compare with the exponential of the augmented matrix
    rng = random.Random(3)
    for _ in range(4):
        theta = S.random_linear_field(rng, 2, bound=1)
        aug = np.zeros((3, 3))
        for i, c in enumerate(theta.components):
            aug[i, 2] = float(c.coeffs.get((0, 0), 0))
            aug[i, 0] = float(c.coeffs.get((1, 0), 0))
            aug[i, 1] = float(c.coeffs.get((0, 1), 0))
        for t in (10.0, -10.0):
            got = flow_vector_field(theta, [0.5, -0.25], t)
            expect = (expm(aug * t) @ np.array([0.5, -0.25, 1.0]))[:2]
            assert np.allclose(got, expect, rtol=1e-6, atol=1e-8)


def test_exp_trivial_examples():
    y, g = exp_trivial(TrivialSection(DX, PolyMatrix.zero(1, 2)), [0.3], 0.7)
    assert np.allclose(y, [1.0]) and np.allclose(g, np.eye(2))
    h = PolyMatrix.constant(1, [[0, 1], [0, 0]])
    y, g = exp_trivial(TrivialSection(PolyVectorField.zero(1), h), [0.3], 0.7)
    assert np.allclose(g, [[1, 0.7], [0, 1]], atol=1e-12)
    lam = x * 2 + 1
    h = PolyMatrix([[lam, Poly.zero(1)], [Poly.zero(1), lam]])
    _, g = exp_trivial(TrivialSection(PolyVectorField.zero(1), h), [0.5], 0.8)
    assert np.allclose(g, math.exp(0.8 * 2) * np.eye(2), atol=1e-8, rtol=0)


def test_path_samples():
    xi = TrivialSection(XDX, PolyMatrix.constant(1, [[1]]))
    path = exp_trivial_path(xi, [1.0], 1.0, samples=4)
    assert [p.t for p in path] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert np.allclose(path[0].g, np.eye(1))
    for p in path:
        assert abs(p.point[0] - math.exp(p.t)) < 1e-8
        assert abs(p.g[0, 0] - math.exp(p.t)) < 1e-8


def test_group_law_examples():
    xi = TrivialSection(XDX, PolyMatrix.zero(1, 1))
    assert group_law_defect(xi, [1], 0.5, 0.0) < 1e-12
    assert group_law_defect(xi, [1], 0.5, 0.5) < 1e-7
    xi = TrivialSection(DX, E12.scale(x))
    assert group_law_defect(xi, [0.2], 0.4, -0.3) < 1e-6


def test_group_law_and_derivative_random():
    rng = random.Random(5)
    for _ in range(4):
        xi = S.random_trivial_section(rng, 2, 2, degree=1, linear=True, bound=2)
        pt = S.random_point(rng, 2, 2)
        assert group_law_defect(xi, pt, 0.3, -0.4) < 1e-6
        assert derivative_defect(xi, pt) < 1e-4
        assert anchor_defect(xi, pt, 0.5) < 1e-6


def test_exp_jet_examples():
    a = exp_jet(JetSection.holonomic(DX, 1), [0], 1.0)
    assert abs(a.jet.value[0] - 1) < 1e-12 and abs(a.jet.jacobian()[0][0] - 1) < 1e-12
    b = exp_jet(JetSection.holonomic(XDX, 1), [1], 1.0)
    assert abs(b.jet.value[0] - math.e) < 1e-6
    assert abs(b.jet.jacobian()[0][0] - math.e) < 1e-6


def test_exp_jet_matches_closed_form_flow():
    # theta = x^2 d/dx has flow x / (1 - t x)
    x0, t = 0.2, 0.5
    a = exp_jet(JetSection.holonomic(field(x * x), 3), [x0], t).jet
    d = 1 - t * x0
    expect = {(1,): 1 / d ** 2, (2,): t / d ** 3, (3,): t * t / d ** 4}
    assert abs(a.value[0] - x0 / d) < 1e-9
    for alpha, c in expect.items():
        assert abs(a.coefficient(alpha)[0] - c) < 1e-8


def test_exp_jet_matches_stencil_fit():
    X, Y = Poly.var(2, 0), Poly.var(2, 1)
    theta = field(Y + X * X * q("1/4"), -X)
    a = exp_jet(JetSection.holonomic(theta, 2), [0.1, 0.2], 0.5).jet
    fit = stencil_jet(lambda p: flow_vector_field(theta, p, 0.5, FlowConfig(step=1e-3)), [0.1, 0.2], 2)
    for alpha, vec in fit:
        if sum(alpha) == 0:
            assert np.allclose(vec, [float(v) for v in a.value], atol=1e-6)
        else:
            assert np.allclose(vec, [float(v) for v in a.coefficient(alpha)], atol=1e-4)


def test_projection_and_anchor_for_jets():
    rng = random.Random(8)
    xi = S.random_jet_section(rng, 1, 2, degree=2, bound=2)
    assert projection_defect(xi, [0.1], 0.3) < 1e-6
    assert anchor_defect(xi, [0.1], 0.3) < 1e-6
    assert group_law_defect(xi, [0.1], 0.2, 0.1) < 1e-6


def test_bch_commuting_case():
    X = PolyVectorField.coordinate(2, 0)
    Y = PolyVectorField.coordinate(2, 1)
    a, b = TrivialSection(X, PolyMatrix.zero(2, 1)), TrivialSection(Y, PolyMatrix.zero(2, 1))
    assert bch_defect(a, b, 0.1, [0.3, -0.2]) < 1e-8


def test_bch_order_and_sign_control():
    z = PolyMatrix.zero(1, 1)
    a, b = TrivialSection(DX, z), TrivialSection(XDX, z)
    slope = lambda c: loglog_slope(BCH_TS, [bch_defect(a, b, t, [0.5], bracket_coeff=c) for t in BCH_TS])
    assert abs(slope(-0.5) - 3) <= 0.2
    assert abs(slope(0.0) - 2) <= 0.2
    assert abs(slope(0.5) - 2) <= 0.2


def test_translation_unit_section():
    unit = lambda p: trivial_unit(p, 2)
    g = TrivialElement(np.array([1.0]), np.array([[1.0, 2.0], [0.0, 1.0]]), np.array([0.5]))
    for kind in ("right", "left", "conjugation"):
        out = translation_action(unit, g, kind)
        assert np.allclose(out.y, g.y) and np.allclose(out.g, g.g) and np.allclose(out.x, g.x)


def test_translation_pair_groupoid():
    # trivial fibre group: elements are pairs (y, x)
    f = lambda p: 2 * p + 1
    sigma = lambda p: TrivialElement(f(np.asarray(p)), np.eye(1), np.asarray(p))
    g = TrivialElement(np.array([4.0]), np.eye(1), np.array([0.5]))
    out = translation_action(sigma, g, "right")
    assert np.allclose(out.y, [4.0]) and np.allclose(out.x, [f(0.5)])


def test_conjugation_maps_units_to_units():
    xi = TrivialSection(XDX, E12.scale(x))
    sec = exp_section(xi, 0.4)
    out = translation_action(sec, trivial_unit([0.7], 2), "conjugation")
    assert np.allclose(out.y, out.x) and np.allclose(out.g, np.eye(2))


def test_ad_finite_difference():
    xi = TrivialSection(DX, E12.scale(x))
    sigma = TrivialSection(XDX, PolyMatrix.constant(1, [[0, 0], [1, 0]]))
    assert ad_defect(xi, sigma, [0.3]) < 1e-4
    rng = random.Random(9)
    for _ in range(2):
        a = S.random_trivial_section(rng, 1, 2, degree=1, linear=True, bound=2)
        b = S.random_trivial_section(rng, 1, 2, degree=1, linear=True, bound=2)
        assert ad_defect(a, b, [0.25]) < 1e-4


def test_exp_group_jet_examples():
    zero = exp_group_jet(PolyMatrix.zero(1, 2), [q(1)], q(1), 2)
    assert zero == TruncatedJet((q(1),), 2, [Poly.const(1, 1), Poly.zero(1), Poly.zero(1), Poly.const(1, 1)])
    j = exp_group_jet(E12.scale(x), [q(3)], q(1), 1)
    assert j.value == (1, 3, 0, 1)
    assert j.coefficient((1,)) == (0, 1, 0, 0)


def test_exp_group_jet_against_scipy():
    rng = random.Random(10)
    for _ in range(4):
        zeta = S.random_matrix_poly(rng, 1, 2, 2, bound=2)
        x0, t = 0.3, 0.6
        j = exp_group_jet(zeta, [x0], t, 2)
        ev = lambda p: expm(t * np.array([[float(e.evaluate([q(p[0])])) for e in row] for row in zeta.rows]))
        assert np.allclose(np.array(j.value, dtype=float).reshape(2, 2), ev([x0]), atol=1e-10)
        fit = stencil_jet(lambda p: ev([float(p[0])]).ravel(), [x0], 2, h=0.05)
        for alpha, vec in fit:
            if sum(alpha):
                assert np.allclose(vec, [float(v) for v in j.coefficient(alpha)], atol=1e-5)


def test_exp_group_jet_scalar_one_parameter_law():
    zeta = PolyMatrix([[x * x + 1]])
    a = exp_group_jet(zeta, [0.2], 0.3, 3)
    b = exp_group_jet(zeta, [0.2], 0.5, 3)
    c = exp_group_jet(zeta, [0.2], 0.8, 3)
    prod = group_jet_product(a, b, 1)
    assert np.allclose([float(v) for v in prod.flat()], [float(v) for v in c.flat()], atol=1e-12)


def test_trivial_compose_checks_endpoints():
    a = trivial_unit([0.0], 1)
    b = trivial_unit([1.0], 1)
    with pytest.raises(ValueError):
        trivial_compose(a, b)
    el = exp_trivial_element(TrivialSection(DX, PolyMatrix.zero(1, 1)), [0.0], 1.0)
    assert np.allclose(trivial_compose(b, el).y, [1.0])
