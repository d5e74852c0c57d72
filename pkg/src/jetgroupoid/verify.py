"""Property suites behind the acceptance criteria; shared by the tests and the CLI."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import samplers as S
from .algebroid import (GroupJetSection, JetSection, SemidirectSection, TrivialSection, anchor,
                        bracket_group_jet, bracket_jet, bracket_semidirect, bracket_trivial)
from .errors import BlowUp
from .finite_groupoid import (check_axioms, cosets, cyclic_group, dihedral_group, is_normal, klein_group,
                              product_subgroupoid, quotient, symmetric_group, trivial_groupoid)
from .flows import (FlowConfig, bch_defect, derivative_defect, exp_group_jet, exp_trivial, flow_vector_field,
                    group_law_defect, loglog_slope, projection_defect)
from .linear_groupoid import (JetVectorSection, LinearOperator, VectorSection, apply, commutator,
                              composite_commutator, operator_flow_residual, prolong_operator, symbol_check)
from .multijet import TruncatedJet, jet_compose, jet_invert, jet_of_polynomial
from .poly import Poly, PolyMatrix, PolyVectorField, random_poly
from .rational import q


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: float
    threshold: str
    elapsed: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"criterion {self.number} {status}: {self.name} | measured {self.measured:.3g} "
                f"(needs {self.threshold}) | {self.elapsed:.2f} s{' | ' + self.detail if self.detail else ''}")


def _timed(fn):
    def run(seed: int = 0, cfg: FlowConfig | None = None) -> CriterionResult:
        start = time.perf_counter()
        res = fn(seed, cfg or FlowConfig())
        res.elapsed = time.perf_counter() - start
        return res
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


# 1. exact groupoid axioms of jets

@_timed
def criterion_1(seed, cfg, cases: int = 1000):
    """Associativity, unit and inverse laws on random composable jet triples, bit-exact."""
    rng = S.rng_for(seed)
    failures = 0
    for _ in range(cases):
        n, k = rng.randint(1, 3), rng.randint(1, 4)
        a, b, c = S.random_composable_triple(rng, n, k)
        ok = jet_compose(jet_compose(a, b), c) == jet_compose(a, jet_compose(b, c))
        for x in (a, b, c):
            xi = jet_invert(x)
            ok &= jet_compose(x, xi) == TruncatedJet.identity(x.value, k)
            ok &= jet_compose(xi, x) == TruncatedJet.identity(x.base, k)
            ok &= jet_compose(TruncatedJet.identity(x.value, k), x) == x
            ok &= jet_compose(x, TruncatedJet.identity(x.base, k)) == x
        failures += not ok
    return CriterionResult(1, "exact jet groupoid axioms", failures == 0, failures, "0 failures, < 30 s", 0.0,
                           f"{cases} triples")


# 2. finite quotients

_GROUPS = {"Z4": lambda: cyclic_group(4), "Z2xZ2": klein_group, "S3": lambda: symmetric_group(3),
           "D4": lambda: dihedral_group(4)}


@_timed
def criterion_2(seed, cfg, cases: int = 50):
    """Random ``M x H x M`` quotients by normal ``M x N x M``; non-normal rejection."""
    rng = S.rng_for(seed)
    names = sorted(_GROUPS)
    groups = {k: f() for k, f in _GROUPS.items()}
    failures, rejected, nonnormal_cases = 0, 0, 0
    for _ in range(cases):
        name = rng.choice(names)
        h = groups[name]
        pts = list(range(rng.randint(1, 4)))
        g = trivial_groupoid(pts, h)
        normals = h.normal_subgroups()
        nsub = rng.choice(normals)
        sigma = product_subgroupoid(g, pts, nsub)
        blocks = cosets(g, sigma)
        flat = [a for b in blocks for a in b]
        ok = len(flat) == len(set(flat)) == len(g.arrows)
        qt = quotient(g, sigma)
        ok &= check_axioms(qt).ok
        ok &= len(qt.arrows) == len(pts) ** 2 * h.order // len(nsub)
        others = [s for s in h.subgroups() if s not in normals]
        if others:
            nonnormal_cases += 1
            bad = product_subgroupoid(g, pts, rng.choice(others))
            res = is_normal(g, bad)
            if not res and res.witness is not None:
                rejected += 1
            else:
                ok = False
        failures += not ok
    passed = failures == 0 and rejected == nonnormal_cases
    return CriterionResult(2, "finite quotient correctness", passed, failures, "0 failures, < 10 s", 0.0,
                           f"{cases} groupoids, {rejected}/{nonnormal_cases} non-normal rejected")


# 3. bracket laws

def _vf_laws(rng, n, k, m, deg):
    a, b, c = (S.random_field(rng, n, deg) for _ in range(3))
    f = random_poly(rng, n, deg)
    ok = a.bracket(b) == -b.bracket(a)
    ok &= (a.bracket(b.bracket(c)) + b.bracket(c.bracket(a)) + c.bracket(a.bracket(b))).is_zero()
    ok &= a.bracket(b.scale(f)) == a.bracket(b).scale(f) + b.scale(a.apply(f))
    return ok


def _trivial_laws(rng, n, k, m, deg):
    a, b, c = (S.random_trivial_section(rng, n, m, deg) for _ in range(3))
    f = random_poly(rng, n, deg)
    ok = bracket_trivial(a, b) == -bracket_trivial(b, a)
    ok &= (bracket_trivial(a, bracket_trivial(b, c)) + bracket_trivial(b, bracket_trivial(c, a))
           + bracket_trivial(c, bracket_trivial(a, b))).is_zero()
    ok &= bracket_trivial(a, b.scale(f)) == bracket_trivial(a, b).scale(f) + b.scale(a.theta.apply(f))
    ok &= anchor(bracket_trivial(a, b)) == anchor(a).bracket(anchor(b))
    return ok


def _jet_laws(rng, n, k, m, deg):
    a, b, c = (S.random_jet_section(rng, n, k, deg, terms=1) for _ in range(3))
    f = random_poly(rng, n, deg)
    ok = bracket_jet(a, b) == -bracket_jet(b, a)
    ok &= (bracket_jet(a, bracket_jet(b, c)) + bracket_jet(b, bracket_jet(c, a))
           + bracket_jet(c, bracket_jet(a, b))).is_zero()
    ok &= bracket_jet(a, b.scale(f)) == bracket_jet(a, b).scale(f) + b.scale(anchor(a).apply(f))
    ok &= anchor(bracket_jet(a, b)) == anchor(a).bracket(anchor(b))
    return ok


def _group_laws(rng, n, k, m, deg):
    a, b, c = (S.random_group_jet_section(rng, n, m, k, deg) for _ in range(3))
    f, g = random_poly(rng, n, deg), random_poly(rng, n, deg)
    ok = bracket_group_jet(a, b) == -bracket_group_jet(b, a)
    ok &= (bracket_group_jet(a, bracket_group_jet(b, c)) + bracket_group_jet(b, bracket_group_jet(c, a))
           + bracket_group_jet(c, bracket_group_jet(a, b))).is_zero()
    ok &= bracket_group_jet(a.scale(f), b.scale(g)) == bracket_group_jet(a, b).scale(f * g)
    return ok


def _semidirect_laws(rng, n, k, m, deg):
    def rnd():
        return SemidirectSection(S.random_jet_section(rng, n, k, deg, terms=1),
                                 S.random_group_jet_section(rng, n, m, k, deg, terms=1))
    a, b, c = rnd(), rnd(), rnd()
    f = random_poly(rng, n, deg)
    br = bracket_semidirect
    ok = br(a, b) == -br(b, a)
    ok &= (br(a, br(b, c)) + br(b, br(c, a)) + br(c, br(a, b))).is_zero()
    ok &= br(a, b.scale(f)) == br(a, b).scale(f) + b.scale(anchor(a.xi).apply(f))
    ok &= anchor(br(a, b).xi) == anchor(a.xi).bracket(anchor(b.xi))
    return ok


_LAWS = [("vector fields", _vf_laws), ("trivial", _trivial_laws), ("jet", _jet_laws),
         ("group jet", _group_laws), ("semi-direct", _semidirect_laws)]


@_timed
def criterion_3(seed, cfg, cases: int = 200):
    """Antisymmetry, Jacobi, Leibniz and the anchor homomorphism, exactly."""
    rng = S.rng_for(seed)
    failed = []
    for i in range(cases):
        name, fn = _LAWS[i % len(_LAWS)]
        n, k, m, deg = rng.randint(1, 2), rng.randint(0, 3), rng.randint(1, 3), rng.randint(1, 3)
        if not fn(rng, n, k, m, deg):
            failed.append(name)
    return CriterionResult(3, "bracket laws", not failed, len(failed), "0 failures, < 60 s", 0.0,
                           f"{cases} cases" + (f"; failing: {sorted(set(failed))}" if failed else ""))


# 4. one-parameter group law

def _unit_exact(xi, x, cfg) -> bool:
    y, g = exp_trivial(xi, x, 0.0, cfg)
    return bool(np.array_equal(y, np.array([float(v) for v in x])) and np.array_equal(g, np.eye(xi.m)))


@_timed
def criterion_4(seed, cfg, cases: int = 50):
    """``Exp (t+u) = Exp t . Exp u`` for linear-growth sections; ``Exp 0`` exact; derivative at 0."""
    rng = S.rng_for(seed)
    worst_law, worst_der, unit_ok = 0.0, 0.0, True
    for _ in range(cases):
        n, m = rng.randint(1, 2), rng.randint(1, 3)
        xi = S.random_trivial_section(rng, n, m, degree=1, linear=True, bound=2)
        x = [float(S.random_rational(rng, 2)) for _ in range(n)]
        t, u = rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)
        worst_law = max(worst_law, group_law_defect(xi, x, t, u, cfg))
        worst_der = max(worst_der, derivative_defect(xi, x, cfg))
        unit_ok &= _unit_exact(xi, x, cfg)
    passed = worst_law <= 1e-6 and worst_der <= 1e-4 and unit_ok
    return CriterionResult(4, "one-parameter group law", passed, worst_law, "<= 1e-6", 0.0,
                           f"derivative defect {worst_der:.3g} (<= 1e-4), Exp 0 exact: {unit_ok}")


# 5. BCH order

BCH_TS = (0.2, 0.1, 0.05, 0.025)


def bch_slopes(xi1, xi2, x, cfg, ts=BCH_TS):
    with_b = [bch_defect(xi1, xi2, t, x, cfg) for t in ts]
    without = [bch_defect(xi1, xi2, t, x, cfg, bracket_coeff=0.0) for t in ts]
    return loglog_slope(ts, with_b), loglog_slope(ts, without)


def _nonzero_at(sec: TrivialSection, x) -> bool:
    return any(c.evaluate(x) != 0 for c in sec.theta.components) or any(
        e.evaluate(x) != 0 for row in sec.h.rows for e in row)


def bch_pairs(seed, scale="1/4"):
    """The fixed pair ``(d/dx, 0), (x d/dx, 0)`` and three random linear-growth pairs.

    Random pairs are scaled down so that the sampled ``t`` lie in the asymptotic
    range, and must have a non-vanishing bracket and double bracket at the base
    point (otherwise there is no second or third order term to measure).
    """
    rng = S.rng_for(seed)
    one, x = Poly.const(1, q(1)), Poly.var(1, 0)
    zero = PolyMatrix.zero(1, 1)
    pairs = [(TrivialSection(PolyVectorField([one]), zero), TrivialSection(PolyVectorField([x]), zero), [0.5])]
    while len(pairs) < 4:
        n, m = rng.randint(1, 2), rng.randint(1, 2)
        a = S.random_trivial_section(rng, n, m, degree=1, linear=True, bound=2).scale(q(scale))
        b = S.random_trivial_section(rng, n, m, degree=1, linear=True, bound=2).scale(q(scale))
        pt = [S.random_rational(rng, 1) for _ in range(n)]
        c = bracket_trivial(a, b)
        if not _nonzero_at(c, pt):
            continue
        if not (_nonzero_at(bracket_trivial(a, c), pt) or _nonzero_at(bracket_trivial(b, c), pt)):
            continue
        pairs.append((a, b, [float(v) for v in pt]))
    return pairs


@_timed
def criterion_5(seed, cfg):
    """Log-log slope of the BCH defect: 3 with the bracket term, 2 without."""
    slopes = [bch_slopes(a, b, x, cfg) for a, b, x in bch_pairs(seed)]
    ok = all(abs(s3 - 3.0) <= 0.2 and abs(s2 - 2.0) <= 0.2 for s3, s2 in slopes)
    worst = max(abs(s3 - 3.0) for s3, _ in slopes)
    detail = "slopes " + ", ".join(f"{s3:.2f}/{s2:.2f}" for s3, s2 in slopes) + " (with/without bracket)"
    return CriterionResult(5, "BCH order study", ok, worst, "|slope - 3| <= 0.2 and |slope' - 2| <= 0.2", 0.0, detail)


# 6. projection compatibility

@_timed
def criterion_6(seed, cfg, cases: int = 20):
    """``rho_1 (Exp t Xi) = Exp t (rho_1 Xi)`` for random order-2 jet sections."""
    rng = S.rng_for(seed)
    worst = 0.0
    for _ in range(cases):
        n = rng.randint(1, 2)
        xi = JetSection([(random_poly(rng, n, 1, 0.6, 2), S.random_field(rng, n, 2, 0.6, 2)) for _ in range(2)], 2, n)
        x = [float(S.random_rational(rng, 2)) / 4 for _ in range(n)]
        t = rng.uniform(-0.5, 0.5)
        worst = max(worst, projection_defect(xi, x, t, 1, cfg))
    return CriterionResult(6, "projection compatibility", worst <= 1e-6, worst, "<= 1e-6", 0.0, f"{cases} sections")


# 7. linear groupoid calculus

def _jet_commutator_ok(rng, d1, d2, n, m, k) -> bool:
    sec = JetVectorSection([(random_poly(rng, n, 2, 0.6, 5), S.random_vector_section(rng, n, m, 3, 5))
                            for _ in range(2)], k, n, m)
    p1, p2 = prolong_operator(d1, k), prolong_operator(d2, k)
    return prolong_operator(commutator(d1, d2), k)(sec) == p1(p2(sec)) - p2(p1(sec))


@_timed
def criterion_7(seed, cfg, cases: int = 100, flow_cases: int = 10):
    """Leibniz and symbol identities, commutator, flow residual and prolongation homomorphism."""
    rng = S.rng_for(seed)
    failures = 0
    for _ in range(cases):
        n, m = rng.randint(1, 2), rng.randint(1, 3)
        d1, d2 = S.random_operator(rng, n, m), S.random_operator(rng, n, m)
        s = S.random_vector_section(rng, n, m)
        f = random_poly(rng, n, 2)
        ok = apply(d1, s.scale(f)) == apply(d1, s).scale(f) + s.scale(d1.theta.apply(f))
        ok &= symbol_check(d1, f, s)
        ok &= apply(commutator(d1, d2), s) == composite_commutator(d1, d2, s)
        ok &= _jet_commutator_ok(rng, d1, d2, n, m, rng.randint(0, 2))
        failures += not ok
    worst = 0.0
    for _ in range(flow_cases):
        n, m = rng.randint(1, 2), rng.randint(1, 2)
        d = S.random_operator(rng, n, m, degree=1, linear=True, bound=2)
        s = S.random_vector_section(rng, n, m, 2, 3)
        x = [float(S.random_rational(rng, 2)) for _ in range(n)]
        worst = max(worst, operator_flow_residual(d, s, x, rng.uniform(-0.5, 0.5), cfg))
    passed = failures == 0 and worst <= 1e-4
    return CriterionResult(7, "linear groupoid calculus", passed, worst, "exact identities, flow residual <= 1e-4",
                           0.0, f"{cases} operators, {failures} exact failures")


# 8. closed forms

def closed_form_checks(cfg: FlowConfig) -> dict:
    x = Poly.var(1, 0)
    euler = flow_vector_field(PolyVectorField([x]), [1.0], 1.0, cfg)[0]
    exp_err = abs(euler - math.e)
    # square-zero, so the closed form I + t h is exact
    nil = PolyMatrix.constant(1, [[0, 3, q("1/2")], [0, 0, 0], [0, 0, 0]])
    sec = TrivialSection(PolyVectorField([x]), nil)
    nil_err = 0.0
    for t in (-0.7, 0.3, 1.0):
        _, g = exp_trivial(sec, [0.2], t, cfg)
        expect = np.eye(3) + t * np.array([[0, 3, 0.5], [0, 0, 0], [0, 0, 0]])
        nil_err = max(nil_err, float(np.max(np.abs(g - expect))))
    blow_t = None
    try:
        flow_vector_field(PolyVectorField([x * x]), [1.0], 1.0, cfg)
    except BlowUp as exc:
        blow_t = exc.t
    return {"exp_error": exp_err, "nilpotent_error": nil_err, "blowup_t": blow_t}


@_timed
def criterion_8(seed, cfg):
    """``x d/dx`` gives ``e^t``; nilpotent constant ``h`` gives ``I + t h``; ``x^2 d/dx`` blows up."""
    r = closed_form_checks(cfg)
    ok = r["exp_error"] <= 1e-8 and r["nilpotent_error"] <= 1e-10 and r["blowup_t"] is not None
    return CriterionResult(8, "closed-form flows", ok, max(r["exp_error"], r["nilpotent_error"]),
                           "e^t <= 1e-8, I + th <= 1e-10, blow-up reported", 0.0,
                           f"blow-up reported at t={r['blowup_t']}")


# 9. fibration in groups

def polynomial_matrix_exp(zeta: PolyMatrix, t) -> PolyMatrix:
    """``sum_j (t zeta)^j / j!`` for nilpotent ``zeta``: a finite polynomial sum."""
    n, m = zeta.nvars, zeta.shape[0]
    total = PolyMatrix.identity(n, m)
    term = PolyMatrix.identity(n, m)
    for j in range(1, m + 1):
        term = (term @ zeta).scale(q(t) / j)
        total = total + term
    if not (term @ zeta).is_zero():
        raise ValueError("matrix polynomial is not nilpotent")
    return total


@_timed
def criterion_9(seed, cfg, cases: int = 100, exp_cases: int = 20):
    """``Exp t j_k zeta = j_k(exp t zeta)`` exactly for nilpotent ``zeta``; bilinearity of the bracket."""
    rng = S.rng_for(seed)
    failures = 0
    for _ in range(exp_cases):
        n, m, k = rng.randint(1, 2), rng.randint(2, 3), rng.randint(1, 2)
        zeta = S.random_nilpotent(rng, n, m)
        x = S.random_point(rng, n, 3)
        t = S.random_rational(rng, 3)
        expect = jet_of_polynomial([e for row in polynomial_matrix_exp(zeta, t).rows for e in row], x, k)
        failures += exp_group_jet(zeta, x, t, k, cfg) != expect
    for _ in range(cases):
        n, m, k = rng.randint(1, 2), rng.randint(1, 3), rng.randint(0, 3)
        a, b = S.random_group_jet_section(rng, n, m, k, 2), S.random_group_jet_section(rng, n, m, k, 2)
        f, g = random_poly(rng, n, 2), random_poly(rng, n, 2)
        failures += bracket_group_jet(a.scale(f), b.scale(g)) != bracket_group_jet(a, b).scale(f * g)
    return CriterionResult(9, "fibration-in-groups exponential", failures == 0, failures, "0 failures", 0.0,
                           f"{exp_cases} exponentials, {cases} bilinearity cases")


CRITERIA: dict[int, Callable] = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
                                 6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9}

SUITES = {
    "jet": [1], "groupoid": [2], "algebroid": [3, 9], "flow": [4, 5, 6, 8], "linop": [7],
    "all": list(CRITERIA),
}


def run_suite(name: str, seed: int = 0, cfg: FlowConfig | None = None) -> list[CriterionResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return [CRITERIA[i](seed, cfg) for i in SUITES[name]]


def format_table(results: list[CriterionResult], timings: bool = False) -> str:
    """Fixed-width pass/fail table; timings are optional so reports stay byte-identical."""
    head = f"{'#':>2}  {'criterion':<34} {'result':<6} {'defect':>10}  detail"
    lines = [head, "-" * len(head)]
    for r in results:
        tail = r.detail + (f" [{r.elapsed:.2f} s]" if timings else "")
        lines.append(f"{r.number:>2}  {r.name:<34} {'PASS' if r.passed else 'FAIL':<6} {r.measured:>10.3g}  {tail}")
    return "\n".join(lines) + "\n"


__all__ = ["CriterionResult", "CRITERIA", "SUITES", "run_suite", "format_table", "bch_slopes", "bch_pairs",
           "closed_form_checks", "polynomial_matrix_exp"] + [f"criterion_{i}" for i in range(1, 10)]
