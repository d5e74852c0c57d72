"""First-order operators ``delta(s) = -h s + theta(s)`` on sections of ``M x Q^m``.

Operators are stored structurally as the pair ``(theta, h)``.
"""
from __future__ import annotations

from math import factorial
from typing import Iterable, Sequence

import numpy as np

from .algebroid import TrivialSection
from .errors import DimensionMismatch, SingularDrift
from .flows import FlowConfig, exp_trivial
from .poly import CompiledPolys, Poly, PolyMatrix, PolyVectorField, directional, monomials_upto
from .rational import q


class VectorSection:
    """``m`` polynomial components over ``Q^n``."""

    __slots__ = ("components",)

    def __init__(self, components: Iterable[Poly]):
        comps = tuple(components)
        if not comps:
            raise ValueError("vector section needs at least one component")
        if any(c.nvars != comps[0].nvars for c in comps):
            raise DimensionMismatch("section components live on different dimensions")
        self.components = comps

    @property
    def n(self) -> int:
        return self.components[0].nvars

    @property
    def m(self) -> int:
        return len(self.components)

    def __add__(self, o):
        return VectorSection(a + b for a, b in zip(self.components, o.components))

    def __sub__(self, o):
        return VectorSection(a - b for a, b in zip(self.components, o.components))

    def __neg__(self):
        return VectorSection(-a for a in self.components)

    def scale(self, f) -> "VectorSection":
        return VectorSection(a * f for a in self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def evaluate(self, x):
        return tuple(c.evaluate(x) for c in self.components)

    def __eq__(self, o):
        return isinstance(o, VectorSection) and self.components == o.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"VectorSection({list(self.components)!r})"


class LinearOperator:
    __slots__ = ("theta", "h")

    def __init__(self, theta: PolyVectorField, h: PolyMatrix):
        if h.nvars != theta.dim:
            raise DimensionMismatch("operator symbol and matrix part live on different dimensions")
        if h.shape[0] != h.shape[1]:
            raise DimensionMismatch("matrix part must be square")
        self.theta = theta
        self.h = h

    @classmethod
    def zero(cls, n: int, m: int) -> "LinearOperator":
        return cls(PolyVectorField.zero(n), PolyMatrix.zero(n, m))

    @property
    def n(self) -> int:
        return self.theta.dim

    @property
    def m(self) -> int:
        return self.h.shape[0]

    def __add__(self, o):
        return LinearOperator(self.theta + o.theta, self.h + o.h)

    def __sub__(self, o):
        return LinearOperator(self.theta - o.theta, self.h - o.h)

    def scale(self, f) -> "LinearOperator":
        """The operator ``f delta``."""
        return LinearOperator(self.theta.scale(f), self.h.scale(f))

    def is_zero_order(self) -> bool:
        return self.theta.is_zero()

    def __call__(self, s: VectorSection) -> VectorSection:
        return apply(self, s)

    def __eq__(self, o):
        return isinstance(o, LinearOperator) and self.theta == o.theta and self.h == o.h

    def __hash__(self):
        return hash((self.theta, self.h))

    def __repr__(self):
        return f"LinearOperator(theta={self.theta!r}, h={self.h!r})"


def _check(delta: LinearOperator, s: VectorSection):
    if s.n != delta.n or s.m != delta.m:
        raise DimensionMismatch(f"section of shape ({s.n},{s.m}) does not fit operator ({delta.n},{delta.m})")


def apply(delta: LinearOperator, s: VectorSection) -> VectorSection:
    """``delta(s) = -h s + theta(s)``."""
    _check(delta, s)
    hs = delta.h.apply(s.components)
    return VectorSection(delta.theta.apply(c) - hc for c, hc in zip(s.components, hs))


def symbol_defect(delta: LinearOperator, f: Poly, s: VectorSection) -> VectorSection:
    """``delta(f s) - f delta(s) - theta(f) s``; zero for every operator."""
    return apply(delta, s.scale(f)) - apply(delta, s).scale(f) - s.scale(delta.theta.apply(f))


def symbol_check(delta: LinearOperator, f: Poly, s: VectorSection) -> bool:
    return symbol_defect(delta, f, s).is_zero()


def commutator(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    """``([theta, theta'], -(h h' - h' h) + theta(h') - theta'(h))``."""
    if a.n != b.n or a.m != b.m:
        raise DimensionMismatch("operators differ in dimension")
    h = -(a.h @ b.h - b.h @ a.h) + b.h.lie(a.theta.components) - a.h.lie(b.theta.components)
    return LinearOperator(a.theta.bracket(b.theta), h)


def composite_commutator(a: LinearOperator, b: LinearOperator, s: VectorSection) -> VectorSection:
    """``a(b(s)) - b(a(s))`` computed by applying the operators."""
    return apply(a, apply(b, s)) - apply(b, apply(a, s))


def operator_from_section(sec: TrivialSection) -> LinearOperator:
    return LinearOperator(sec.theta, sec.h)


def section_from_operator(delta: LinearOperator) -> TrivialSection:
    return TrivialSection(delta.theta, delta.h)


def operator_flow(delta: LinearOperator, s: VectorSection, x, t: float,
                  cfg: FlowConfig = FlowConfig()) -> np.ndarray:
    """``g(t, x)^-1 s(exp t theta (x))`` with ``g`` from the trivial-groupoid exponential."""
    _check(delta, s)
    y, g = exp_trivial(section_from_operator(delta), x, t, cfg)
    if abs(np.linalg.det(g)) < cfg.det_floor:
        raise SingularDrift(f"near-singular flow matrix (determinant below {cfg.det_floor:g})")
    sy = CompiledPolys(s.components)(y)
    return np.linalg.solve(g, sy)


def operator_flow_residual(delta: LinearOperator, s: VectorSection, x, t: float,
                           cfg: FlowConfig = FlowConfig(), dt: float = 1e-3) -> float:
    """Central-difference ``d/dt`` of the pulled-back section against the pull-back of ``delta(s)``."""
    plus = operator_flow(delta, s, x, t + dt, cfg)
    minus = operator_flow(delta, s, x, t - dt, cfg)
    rhs = operator_flow(delta, apply(delta, s), x, t, cfg)
    return float(np.max(np.abs((plus - minus) / (2 * dt) - rhs)))


class JetVectorSection:
    """``sum f_i j_k s_i``: a polynomial section of the k-jets of ``M x Q^m``."""

    __slots__ = ("terms", "k", "n", "m")

    def __init__(self, terms: Iterable, k: int, n: int | None = None, m: int | None = None):
        terms = [(f, s if isinstance(s, VectorSection) else VectorSection(s)) for f, s in terms]
        if terms:
            n = terms[0][1].n if n is None else n
            m = terms[0][1].m if m is None else m
        if n is None or m is None:
            raise ValueError("dimensions required for an empty section")
        self.k, self.n, self.m = k, n, m
        self.terms = []
        for f, s in terms:
            if s.n != n or s.m != m:
                raise DimensionMismatch("jet section terms differ in dimension")
            self.terms.append((f if isinstance(f, Poly) else Poly.const(n, q(f)), s))

    @classmethod
    def holonomic(cls, s: VectorSection, k: int) -> "JetVectorSection":
        return cls([(Poly.const(s.n, q(1)), s)], k)

    def __add__(self, o):
        return JetVectorSection(self.terms + o.terms, self.k, self.n, self.m)

    def __neg__(self):
        return JetVectorSection([(-f, s) for f, s in self.terms], self.k, self.n, self.m)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, g) -> "JetVectorSection":
        return JetVectorSection([(g * f, s) for f, s in self.terms], self.k, self.n, self.m)

    def canonical(self) -> tuple:
        """Coefficient functions ``sum f * d^alpha s_i / alpha!``."""
        out = []
        for alpha in monomials_upto(self.n, self.k):
            fac = 1
            for a in alpha:
                fac *= factorial(a)
            for i in range(self.m):
                acc = Poly.zero(self.n)
                for f, s in self.terms:
                    d = s.components[i].partial(alpha)
                    if not d.is_zero():
                        acc = acc + f * d
                out.append(acc * (q(1) / fac) if fac != 1 else acc)
        return tuple(out)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.canonical())

    def __eq__(self, o):
        return (isinstance(o, JetVectorSection) and self.k == o.k and self.n == o.n
                and self.m == o.m and self.canonical() == o.canonical())

    def __hash__(self):
        return hash((self.k, self.canonical()))

    def __repr__(self):
        return f"JetVectorSection(k={self.k}, terms={self.terms!r})"


class ProlongedOperator:
    """``j_k delta`` acting on term lists: ``sum f_i j_k(delta s_i) + theta(f_i) j_k s_i``."""

    __slots__ = ("delta", "k")

    def __init__(self, delta: LinearOperator, k: int):
        if k < 0:
            raise ValueError("prolongation order must be non-negative")
        self.delta = delta
        self.k = k

    def __call__(self, sec: JetVectorSection) -> JetVectorSection:
        if sec.k != self.k:
            raise DimensionMismatch(f"section order {sec.k} differs from prolongation order {self.k}")
        out = []
        for f, s in sec.terms:
            out.append((f, apply(self.delta, s)))
            tf = self.delta.theta.apply(f)
            if not tf.is_zero():
                out.append((tf, s))
        return JetVectorSection(out, self.k, sec.n, sec.m)


def prolong_operator(delta: LinearOperator, k: int) -> ProlongedOperator:
    return ProlongedOperator(delta, k)


def prolonged_symbol_defect(pd: ProlongedOperator, f: Poly, sec: JetVectorSection) -> JetVectorSection:
    """``j delta(f S) - f j delta(S) - theta(f) S``."""
    return pd(sec.scale(f)) - pd(sec).scale(f) - sec.scale(pd.delta.theta.apply(f))


__all__ = [
    "VectorSection", "LinearOperator", "apply", "symbol_check", "symbol_defect", "commutator",
    "composite_commutator", "operator_from_section", "section_from_operator", "operator_flow",
    "operator_flow_residual", "JetVectorSection", "ProlongedOperator", "prolong_operator",
    "prolonged_symbol_defect",
]
