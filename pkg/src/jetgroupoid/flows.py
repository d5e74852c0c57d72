"""Exponential maps by numerical integration (classical RK4).

Trivial-groupoid elements are triples ``(y, G, x)`` (target, matrix, source)
composing as ``(y, G, x) . (x, G', x') = (y, G G', x')``.

Integration uses a fixed step. The only refinement is a guard for steps whose
increment is large relative to the state (``> 5%``): such a step is bisected,
up to a fixed depth. On desk-scale smooth problems the guard never fires, so
results equal plain fixed-step RK4. When it does fire, the run is repeated at
half the step; if the two answers disagree by more than ``resolve`` (relative),
the solution is not resolved on this horizon and a blow-up is reported. Blow-up
is also reported whenever the norm exceeds ``blowup``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .algebroid import JetSection, TrivialSection, bracket_trivial
from .errors import BlowUp, DimensionMismatch, SingularDrift
from .jet_groupoid import JetArrow
from .multijet import TruncatedJet, jet_compose
from .poly import CompiledPolys, Poly, PolyMatrix, PolyVectorField, monomials_upto, substitute_many
from .rational import is_exact, q


@dataclass(frozen=True)
class FlowConfig:
    step: float = 1e-3
    t_max: float = 10.0
    tol: float = 1e-6
    richardson: bool = False
    blowup: float = 1e12
    det_floor: float = 1e-9
    guard: float = 0.05
    max_bisect: int = 60
    resolve: float = 1e-3

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    @classmethod
    def from_env(cls, **overrides) -> "FlowConfig":
        """Defaults, then ``JETG_STEP`` / ``JETG_TOL``, then explicit overrides."""
        kw = {}
        if os.environ.get("JETG_STEP"):
            kw["step"] = float(os.environ["JETG_STEP"])
        if os.environ.get("JETG_TOL"):
            kw["tol"] = float(os.environ["JETG_TOL"])
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)


class Integration(NamedTuple):
    y: np.ndarray
    error: float | None
    steps: int


def _rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _guarded_step(f, t, y, h, cfg, depth, counter):
    with np.errstate(over="ignore", invalid="ignore"):
        y1 = _rk4_step(f, t, y, h)
    scale = 1.0 + float(np.max(np.abs(y))) if y.size else 1.0
    ok = np.all(np.isfinite(y1)) and float(np.max(np.abs(y1 - y), initial=0.0)) <= cfg.guard * scale
    if ok or depth >= cfg.max_bisect:
        if not np.all(np.isfinite(y1)):
            raise BlowUp(f"blow-up: solution is not finite near t={t + h:.6g} (flow is not global on this horizon)", t + h)
        counter[0] += 1
        return y1
    ym = _guarded_step(f, t, y, h / 2, cfg, depth + 1, counter)
    _check_blowup(ym, t + h / 2, cfg)
    return _guarded_step(f, t + h / 2, ym, h / 2, cfg, depth + 1, counter)


def _check_blowup(y, t, cfg):
    if y.size and float(np.max(np.abs(y))) > cfg.blowup:
        raise BlowUp(f"blow-up: norm exceeded {cfg.blowup:g} at t={t:.6g} (flow is not global on this horizon)", t)


def _run(f, y0, t, cfg, step):
    y = np.array(y0, dtype=float)
    if t == 0:
        return y, 0
    n = max(1, math.ceil(abs(t) / step - 1e-9))
    h = t / n
    counter = [0]
    for i in range(n):
        y = _guarded_step(f, i * h, y, h, cfg, 0, counter)
        _check_blowup(y, (i + 1) * h, cfg)
    return y, counter[0]


def integrate(f: Callable, y0, t: float, cfg: FlowConfig = FlowConfig()) -> Integration:
    """Integrate ``y' = f(t, y)`` from 0 to ``t``; Richardson estimate when ``cfg.richardson``."""
    if abs(t) > cfg.t_max:
        raise ValueError(f"|t| = {abs(t)} exceeds t_max = {cfg.t_max}")
    y, steps = _run(f, y0, t, cfg, cfg.step)
    plain = max(1, math.ceil(abs(t) / cfg.step - 1e-9)) if t else 0
    y2 = None
    if steps > plain:
        y2, _ = _run(f, y0, t, cfg, cfg.step / 2)
        gap = float(np.max(np.abs(y2 - y), initial=0.0))
        if gap > cfg.resolve * (1.0 + float(np.max(np.abs(y2), initial=0.0))):
            raise BlowUp(f"blow-up: solution unresolved by t={t:.6g} (norm {float(np.max(np.abs(y2))):.3g}, "
                         "diverging under step refinement; flow is not global on this horizon)", t)
    err = None
    if cfg.richardson:
        if y2 is None:
            y2, _ = _run(f, y0, t, cfg, cfg.step / 2)
        err = float(np.max(np.abs(y2 - y), initial=0.0)) / 15.0
    return Integration(y, err, steps)


# compiled right-hand sides

def _compile_field(theta) -> CompiledPolys:
    comps = list(theta.components) if isinstance(theta, PolyVectorField) else list(theta)
    return CompiledPolys(comps)


def _compile_matrix(h: PolyMatrix) -> CompiledPolys:
    return CompiledPolys([e for row in h.rows for e in row])


def flow_vector_field(theta, x, t: float, cfg: FlowConfig = FlowConfig()) -> np.ndarray:
    """``exp(t theta)(x)``."""
    return flow_vector_field_estimate(theta, x, t, cfg)[0]


def flow_vector_field_estimate(theta, x, t: float, cfg: FlowConfig = FlowConfig()):
    """``(exp(t theta)(x), error estimate or None)``."""
    ev = _compile_field(theta)
    x = np.asarray([float(v) for v in x])
    if len(x) != ev.nvars:
        raise DimensionMismatch("point dimension differs from the vector field dimension")
    res = integrate(lambda _t, y: ev(y), x, t, cfg)
    return res.y, res.error


class TrivialElement(NamedTuple):
    y: np.ndarray
    g: np.ndarray
    x: np.ndarray


def trivial_compose(a: TrivialElement, b: TrivialElement, atol: float = 1e-9) -> TrivialElement:
    if not np.allclose(a.x, b.y, atol=atol, rtol=0):
        raise ValueError("non-composable: α(g) ≠ β(h)")
    return TrivialElement(a.y, a.g @ b.g, b.x)


def trivial_inverse(a: TrivialElement) -> TrivialElement:
    return TrivialElement(a.x, np.linalg.inv(a.g), a.y)


def trivial_unit(x, m: int) -> TrivialElement:
    x = np.asarray(x, dtype=float)
    return TrivialElement(x, np.eye(m), x)


class _TrivialRHS:
    def __init__(self, xi: TrivialSection):
        self.n, self.m = xi.n, xi.m
        self.theta = _compile_field(xi.theta)
        self.h = _compile_matrix(xi.h)

    def __call__(self, _t, state):
        n, m = self.n, self.m
        y = state[:n]
        g = state[n:].reshape(m, m)
        hy = self.h(y).reshape(m, m)
        return np.concatenate([self.theta(y), (hy @ g).ravel()])


def exp_trivial(xi: TrivialSection, x, t: float, cfg: FlowConfig = FlowConfig()):
    """``Exp t Xi (x) = (exp t theta (x), g(t, x))`` with ``dg/dt = h(exp t theta (x)) g``, ``g(0) = I``."""
    return exp_trivial_estimate(xi, x, t, cfg)[0]


def exp_trivial_estimate(xi: TrivialSection, x, t: float, cfg: FlowConfig = FlowConfig()):
    rhs = _TrivialRHS(xi)
    x = np.asarray([float(v) for v in x])
    if len(x) != xi.n:
        raise DimensionMismatch("point dimension differs from the section dimension")
    y0 = np.concatenate([x, np.eye(xi.m).ravel()])
    res = integrate(rhs, y0, t, cfg)
    return (res.y[:xi.n], res.y[xi.n:].reshape(xi.m, xi.m)), res.error


def exp_trivial_element(xi: TrivialSection, x, t: float, cfg: FlowConfig = FlowConfig()) -> TrivialElement:
    y, g = exp_trivial(xi, x, t, cfg)
    return TrivialElement(y, g, np.asarray([float(v) for v in x]))


class PathSample(NamedTuple):
    t: float
    point: np.ndarray
    g: np.ndarray


def exp_trivial_path(xi: TrivialSection, x, t: float, samples: int = 10,
                     cfg: FlowConfig = FlowConfig()) -> list[PathSample]:
    """Samples of ``t -> Exp t Xi (x)`` at ``samples + 1`` equally spaced times."""
    rhs = _TrivialRHS(xi)
    state = np.concatenate([np.asarray([float(v) for v in x]), np.eye(xi.m).ravel()])
    out = [PathSample(0.0, state[:xi.n].copy(), state[xi.n:].reshape(xi.m, xi.m).copy())]
    dt = t / samples
    for i in range(samples):
        shifted = lambda s, y, base=i * dt: rhs(base + s, y)
        state = integrate(shifted, state, dt, cfg).y
        out.append(PathSample((i + 1) * dt, state[:xi.n].copy(), state[xi.n:].reshape(xi.m, xi.m).copy()))
    return out


# jets

def jet_coefficient_field(xi: JetSection) -> list[Poly]:
    """The right-invariant field of ``xi`` as polynomials in flat jet coordinates.

    Coordinates are the coefficients of ``X`` in :meth:`TruncatedJet.flat` order.
    """
    n, k = xi.n, xi.k
    monos = monomials_upto(n, k)
    nm = len(monos)
    nz = n * nm
    zvars = [Poly.var(nz, i) for i in range(nz)]
    value_vars = [zvars[i * nm] for i in range(n)]
    canon = xi.canonical()
    outer = []
    for i in range(n):
        terms = {}
        for ai, alpha in enumerate(monos):
            c = canon[ai * n + i]
            if not c.is_zero():
                terms[alpha] = c.substitute(value_vars)
        outer.append(Poly(n, terms))
    disp = []
    for i in range(n):
        disp.append(Poly(n, {alpha: zvars[i * nm + ai] for ai, alpha in enumerate(monos) if ai > 0}))
    composed = substitute_many(outer, disp, k)
    zero = Poly.zero(nz)
    return [composed[i].coeffs.get(alpha, zero) for i in range(n) for alpha in monos]


class _JetRHS:
    def __init__(self, xi: JetSection):
        self.ev = CompiledPolys(jet_coefficient_field(xi))

    def __call__(self, _t, z):
        return self.ev(z)


def exp_jet(xi: JetSection, x, t: float, cfg: FlowConfig = FlowConfig(), rhs=None) -> JetArrow:
    """Integrate the right-invariant field of ``xi`` from the identity arrow at ``x``."""
    x = tuple(float(v) for v in x)
    if len(x) != xi.n:
        raise DimensionMismatch("point dimension differs from the section dimension")
    rhs = rhs or _JetRHS(xi)
    start = TruncatedJet.identity(x, xi.k).map_coeffs(float)
    z = integrate(rhs, np.array(start.flat(), dtype=float), t, cfg).y
    jet = TruncatedJet.from_flat(x, xi.k, xi.n, [float(v) for v in z])
    if xi.k >= 1:
        d = float(np.linalg.det(np.array(jet.jacobian(), dtype=float)))
        if abs(d) < cfg.det_floor:
            raise SingularDrift(f"admissibility lost: Jacobian determinant {d:.3g} below {cfg.det_floor:g}")
    return JetArrow(jet, check=False)


def jet_distance(a: TruncatedJet, b: TruncatedJet) -> float:
    if a.order != b.order or a.n != b.n or a.m != b.m:
        raise DimensionMismatch("jets differ in shape")
    base = max((abs(float(u) - float(v)) for u, v in zip(a.base, b.base)), default=0.0)
    coef = max((abs(float(u) - float(v)) for u, v in zip(a.flat(), b.flat())), default=0.0)
    return max(base, coef)


def _element_distance(a: TrivialElement, b: TrivialElement) -> float:
    return max(float(np.max(np.abs(a.y - b.y))), float(np.max(np.abs(a.g - b.g))),
               float(np.max(np.abs(a.x - b.x))))


def group_law_defect(xi, x, t: float, u: float, cfg: FlowConfig = FlowConfig()) -> float:
    """``|Exp (t+u) Xi (x) - Exp t Xi (x') . Exp u Xi (x)|`` with ``x' = target of Exp u Xi (x)``."""
    if isinstance(xi, TrivialSection):
        inner = exp_trivial_element(xi, x, u, cfg)
        outer = exp_trivial_element(xi, inner.y, t, cfg)
        whole = exp_trivial_element(xi, x, t + u, cfg)
        return _element_distance(whole, trivial_compose(outer, inner))
    if isinstance(xi, JetSection):
        rhs = _JetRHS(xi)
        inner = exp_jet(xi, x, u, cfg, rhs)
        outer = exp_jet(xi, inner.target, t, cfg, rhs)
        whole = exp_jet(xi, x, t + u, cfg, rhs)
        return jet_distance(whole.jet, jet_compose(outer.jet, inner.jet))
    raise TypeError(f"unsupported section type {type(xi).__name__}")


def anchor_defect(xi, x, t: float, cfg: FlowConfig = FlowConfig()) -> float:
    """``|target(Exp t Xi (x)) - exp(t anchor Xi)(x)|``."""
    from .algebroid import anchor
    base = flow_vector_field(anchor(xi), x, t, cfg)
    if isinstance(xi, TrivialSection):
        y = exp_trivial(xi, x, t, cfg)[0]
    else:
        y = np.array([float(v) for v in exp_jet(xi, x, t, cfg).target])
    return float(np.max(np.abs(y - base)))


def derivative_defect(xi, x, cfg: FlowConfig = FlowConfig(), dt: float = 1e-3) -> float:
    """Central difference of ``Exp t Xi (x)`` at ``t = 0`` against ``Xi(x)``."""
    pt = [float(v) for v in x]
    if isinstance(xi, TrivialSection):
        yp, gp = exp_trivial(xi, pt, dt, cfg)
        ym, gm = exp_trivial(xi, pt, -dt, cfg)
        dy = (yp - ym) / (2 * dt)
        dg = (gp - gm) / (2 * dt)
        th = _compile_field(xi.theta)(np.array(pt))
        hx = _compile_matrix(xi.h)(np.array(pt)).reshape(xi.m, xi.m)
        return max(float(np.max(np.abs(dy - th))), float(np.max(np.abs(dg - hx))))
    rhs = _JetRHS(xi)
    zp = np.array(exp_jet(xi, pt, dt, cfg, rhs).jet.flat(), dtype=float)
    zm = np.array(exp_jet(xi, pt, -dt, cfg, rhs).jet.flat(), dtype=float)
    z0 = np.array(TruncatedJet.identity(pt, xi.k).map_coeffs(float).flat(), dtype=float)
    return float(np.max(np.abs((zp - zm) / (2 * dt) - rhs(0.0, z0))))


def projection_defect(xi: JetSection, x, t: float, h: int = 1, cfg: FlowConfig = FlowConfig()) -> float:
    """``|rho_h(Exp t Xi) - Exp t (rho_h Xi)|``."""
    full = exp_jet(xi, x, t, cfg).jet.truncate(h)
    low = exp_jet(xi.projected(h), x, t, cfg).jet
    return jet_distance(full, low)


def bch_defect(xi1: TrivialSection, xi2: TrivialSection, t: float, x=None,
               cfg: FlowConfig = FlowConfig(), bracket_coeff: float = -0.5) -> float:
    """``|Exp t Xi1 . Exp t Xi2 (x) - Exp(t Xi1 + t Xi2 + c t^2 [Xi1, Xi2])(x)|``.

    With the product of sections ``(tau . sigma)(e) = tau(beta sigma(e)) . sigma(e)`` and the
    right-invariant bracket, the second-order coefficient is ``c = -1/2``.
    """
    x = [0.0] * xi1.n if x is None else [float(v) for v in x]
    inner = exp_trivial_element(xi2, x, t, cfg)
    outer = exp_trivial_element(xi1, inner.y, t, cfg)
    lhs = trivial_compose(outer, inner)
    tq = q(t)
    z = (xi1 + xi2).scale(tq)
    if bracket_coeff:
        z = z + bracket_trivial(xi1, xi2).scale(q(bracket_coeff) * tq * tq)
    rhs = exp_trivial_element(z, x, 1.0, cfg)
    return _element_distance(lhs, rhs)


def loglog_slope(ts: Sequence[float], defects: Sequence[float]) -> float:
    lt = np.log(np.asarray(ts, dtype=float))
    ld = np.log(np.asarray(defects, dtype=float))
    return float(np.polyfit(lt, ld, 1)[0])


# translations

def translation_action(sigma: Callable, g: TrivialElement, kind: str = "right") -> TrivialElement:
    """Right ``g . sigma(alpha g)^-1``, left ``sigma(beta g) . g`` or their composite ``conjugation``.

    ``sigma(x)`` returns the element ``(f(x), S(x), x)`` of an admissible section.
    """
    if kind == "right":
        return trivial_compose(g, trivial_inverse(sigma(g.x)))
    if kind == "left":
        return trivial_compose(sigma(g.y), g)
    if kind == "conjugation":
        return translation_action(sigma, translation_action(sigma, g, "right"), "left")
    raise ValueError(f"unknown translation kind {kind!r}")


def exp_section(xi: TrivialSection, t: float, cfg: FlowConfig = FlowConfig()) -> Callable:
    """The admissible section ``x -> Exp t Xi (x)``."""
    return lambda x: exp_trivial_element(xi, x, t, cfg)


def adjoint_exp(xi: TrivialSection, sigma: TrivialSection, x, t: float,
                cfg: FlowConfig = FlowConfig(), ds: float = 1e-4):
    """``(Ad(Exp t Xi) Sigma)(x)`` as ``(vector, matrix)``, by central difference in ``s``.

    The conjugation by ``Exp t Xi`` is applied to ``Exp s Sigma`` at ``x' = exp(-t theta)(x)``
    so that the result is based at ``x``.
    """
    x = np.array([float(v) for v in x])
    sec = exp_section(xi, t, cfg)
    xp = flow_vector_field(xi.theta, x, -t, cfg)

    def conj(s):
        e = exp_trivial_element(sigma, xp, s, cfg)
        return translation_action(sec, e, "conjugation")

    plus, minus = conj(ds), conj(-ds)
    return (plus.y - minus.y) / (2 * ds), (plus.g - minus.g) / (2 * ds)


def ad_defect(xi: TrivialSection, sigma: TrivialSection, x, cfg: FlowConfig = FlowConfig(),
              dt: float = 1e-3) -> float:
    """``|d/dt Ad(Exp t Xi) Sigma at 0 - ad Xi (Sigma)|`` at ``x``, by central difference."""
    from .algebroid import ad
    vp, mp = adjoint_exp(xi, sigma, x, dt, cfg)
    vm, mm = adjoint_exp(xi, sigma, x, -dt, cfg)
    dv = (vp - vm) / (2 * dt)
    dm = (mp - mm) / (2 * dt)
    target = ad(xi, sigma)
    pt = np.array([float(v) for v in x])
    tv = _compile_field(target.theta)(pt)
    tm = _compile_matrix(target.h)(pt).reshape(target.m, target.m)
    return max(float(np.max(np.abs(dv - tv))), float(np.max(np.abs(dm - tm))))


# fibration in groups

def _mat_jet_mul(a, b, k):
    m = len(a)
    n = a[0][0].nvars
    out = []
    for i in range(m):
        row = []
        for j in range(m):
            acc = Poly.zero(n)
            for l in range(m):
                if not a[i][l].is_zero() and not b[l][j].is_zero():
                    acc = acc + a[i][l].mul_trunc(b[l][j], k)
            row.append(acc)
        out.append(row)
    return out


def _mat_jet_scale(a, c):
    return [[e * c for e in row] for row in a]


def _mat_jet_add(a, b):
    return [[x + y for x, y in zip(r, s)] for r, s in zip(a, b)]


def _mat_jet_identity(m, n, one):
    return [[Poly.const(n, one) if i == j else Poly.zero(n) for j in range(m)] for i in range(m)]


def matrix_jet_exp(a, k: int, order: int = 12, exact: bool = True):
    """Scaling and squaring with a degree-``order`` Taylor series on matrices of truncated jets."""
    m = len(a)
    n = a[0][0].nvars
    one = q(1) if exact else 1.0
    norm = max((sum(abs(float(e.constant_term())) for e in row) for row in a), default=0.0)
    s = max(0, math.ceil(math.log2(norm))) if norm > 1 else 0
    scaled = _mat_jet_scale(a, one / (2 ** s)) if s else a
    total = _mat_jet_identity(m, n, one)
    term = _mat_jet_identity(m, n, one)
    for j in range(1, order + 1):
        term = _mat_jet_scale(_mat_jet_mul(term, scaled, k), one / j)
        if all(e.is_zero() for row in term for e in row):
            break
        total = _mat_jet_add(total, term)
    for _ in range(s):
        total = _mat_jet_mul(total, total, k)
    return total


def matrix_jet_to_truncated(mat, x, k: int) -> TruncatedJet:
    return TruncatedJet(x, k, [e for row in mat for e in row])


def truncated_to_matrix_jet(jet: TruncatedJet, m: int):
    comps = list(jet.components)
    return [comps[i * m:(i + 1) * m] for i in range(m)]


def exp_group_jet(zeta: PolyMatrix, x, t, k: int, cfg: FlowConfig = FlowConfig(), order: int = 12) -> TruncatedJet:
    """Order-``k`` jet at ``x`` of ``y -> expm(t zeta(y))``, as a jet with ``m*m`` components (row-major).

    Exact when ``x`` and ``t`` are exact rationals; floating point otherwise.
    """
    exact = is_exact(t) and all(is_exact(v) for v in x)
    if exact:
        t = q(t)
        x = tuple(q(v) for v in x)
    else:
        t = float(t)
        x = tuple(float(v) for v in x)
    coerce = (lambda c: c) if exact else float
    a = [[e.shift(x, k).map_coeffs(lambda c: coerce(c) * t) for e in row] for row in zeta.rows]
    return matrix_jet_to_truncated(matrix_jet_exp(a, k, order, exact), x, k)


def group_jet_product(a: TruncatedJet, b: TruncatedJet, m: int) -> TruncatedJet:
    """Fibrewise product of two matrix jets at the same base point."""
    if a.base != b.base or a.order != b.order:
        raise DimensionMismatch("matrix jets differ in base point or order")
    prod = _mat_jet_mul(truncated_to_matrix_jet(a, m), truncated_to_matrix_jet(b, m), a.order)
    return matrix_jet_to_truncated(prod, a.base, a.order)


def stencil_jet(fn: Callable, x, k: int, h: float = 0.05, degree: int | None = None) -> list:
    """Least-squares polynomial fit of ``fn`` on a grid around ``x``.

    Returns ``[(alpha, coefficient vector)]`` for ``|alpha| <= k``; an independent float
    estimate of the Taylor coefficients of ``fn`` at ``x``.
    """
    x = np.asarray([float(v) for v in x])
    n = len(x)
    degree = k + 4 if degree is None else degree
    pts1 = np.linspace(-h, h, degree + 3)
    grids = np.meshgrid(*([pts1] * n), indexing="ij")
    offsets = np.stack([g.ravel() for g in grids], axis=1)
    monos = monomials_upto(n, degree)
    design = np.stack([np.prod(offsets ** np.array(a), axis=1) for a in monos], axis=1)
    values = np.array([fn(x + d) for d in offsets])
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    return [(a, coef[i]) for i, a in enumerate(monos) if sum(a) <= k]


__all__ = [
    "FlowConfig", "Integration", "integrate", "flow_vector_field", "flow_vector_field_estimate",
    "TrivialElement", "trivial_compose", "trivial_inverse", "exp_trivial", "exp_trivial_estimate",
    "exp_trivial_element", "exp_trivial_path", "PathSample", "jet_coefficient_field", "exp_jet",
    "jet_distance", "group_law_defect", "anchor_defect", "derivative_defect", "projection_defect",
    "bch_defect", "loglog_slope", "translation_action", "exp_section", "adjoint_exp", "ad_defect",
    "matrix_jet_exp", "exp_group_jet", "group_jet_product", "stencil_jet",
]
