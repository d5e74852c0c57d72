"""Truncated multivariate Taylor polynomials (k-jets of maps Q^n -> Q^m).

A jet is stored as ``m`` polynomials in displacement variables ``u = x - base``.
The constant term of component ``i`` is the target value; the coefficient of
``u^alpha`` is ``d^alpha f_i(base) / alpha!``.
"""
from __future__ import annotations

from typing import Iterable, Sequence

from . import linalg
from .errors import DimensionMismatch, NonComposable, NotInvertible
from .poly import Poly, monomials_upto, substitute_many
from .rational import exact_point, q


class MultiIndex(tuple):
    """Exponent vector ``alpha``; ``order`` is ``|alpha|``."""

    def __new__(cls, entries: Iterable[int]):
        entries = tuple(int(e) for e in entries)
        if any(e < 0 for e in entries):
            raise ValueError(f"multi-index entries must be non-negative: {entries}")
        return super().__new__(cls, entries)

    @property
    def order(self) -> int:
        return sum(self)

    def __str__(self):
        return ",".join(str(e) for e in self)

    @classmethod
    def parse(cls, text: str) -> "MultiIndex":
        return cls(int(p) for p in text.split(","))


def _as_components(p) -> list[Poly]:
    if isinstance(p, Poly):
        return [p]
    comps = list(p)
    if not comps or not all(isinstance(c, Poly) for c in comps):
        raise TypeError("polynomial map must be a Poly or a sequence of Poly")
    return comps


class TruncatedJet:
    __slots__ = ("base", "order", "components")

    def __init__(self, base: Sequence, order: int, components: Sequence[Poly]):
        if order < 0:
            raise ValueError("jet order must be non-negative")
        base = exact_point(base)
        comps = tuple(c.truncate(order) for c in components)
        if not base:
            raise DimensionMismatch("jet source dimension must be positive")
        if not comps:
            raise DimensionMismatch("jet target dimension must be positive")
        if any(c.nvars != len(base) for c in comps):
            raise DimensionMismatch("jet components do not match the source dimension")
        self.base = base
        self.order = order
        self.components = comps

    # constructors
    @classmethod
    def from_coeffs(cls, base, value, order: int, coeffs: dict | None = None) -> "TruncatedJet":
        """Build from ``value`` and ``{alpha: vector}`` with ``1 <= |alpha| <= order``."""
        base = tuple(q(b) for b in base)
        value = [q(v) for v in value]
        n, m = len(base), len(value)
        terms = [dict() for _ in range(m)]
        for i in range(m):
            terms[i][(0,) * n] = value[i]
        for key, vec in (coeffs or {}).items():
            alpha = MultiIndex.parse(key) if isinstance(key, str) else MultiIndex(key)
            if len(alpha) != n:
                raise DimensionMismatch(f"multi-index {alpha} does not have {n} entries")
            if not 1 <= alpha.order <= order:
                raise ValueError(f"coefficient order {alpha.order} outside 1..{order}")
            if len(vec) != m:
                raise DimensionMismatch(f"coefficient vector for {alpha} has length {len(vec)}, expected {m}")
            for i, c in enumerate(vec):
                terms[i][tuple(alpha)] = q(c)
        return cls(base, order, [Poly(n, t) for t in terms])

    @classmethod
    def identity(cls, base, order: int) -> "TruncatedJet":
        base = exact_point(base)
        n = len(base)
        return cls(base, order, [Poly.var(n, i) + base[i] for i in range(n)])

    @classmethod
    def linear(cls, matrix, base, value, order: int) -> "TruncatedJet":
        """The jet of ``x -> value + A (x - base)``."""
        base = exact_point(base)
        value = exact_point(value)
        n = len(base)
        comps = []
        for i, row in enumerate(matrix):
            if len(row) != n:
                raise DimensionMismatch("matrix width must equal source dimension")
            p = Poly.const(n, value[i])
            for j, a in enumerate(row):
                p = p + Poly.var(n, j) * a
            comps.append(p)
        return cls(base, order, comps)

    # accessors
    @property
    def dim_source(self) -> int:
        return len(self.base)

    @property
    def dim_target(self) -> int:
        return len(self.components)

    n = dim_source
    m = dim_target

    @property
    def k(self) -> int:
        return self.order

    @property
    def value(self) -> tuple:
        z = (0,) * self.n
        return tuple(c.coeffs.get(z, self._zero()) for c in self.components)

    def _zero(self):
        for c in self.components:
            for v in c.coeffs.values():
                return v - v
        return q(0)

    def coefficient(self, alpha) -> tuple:
        alpha = tuple(alpha)
        zero = self._zero()
        return tuple(c.coeffs.get(alpha, zero) for c in self.components)

    @property
    def coeffs(self) -> dict:
        """Nonzero coefficient vectors for ``1 <= |alpha| <= k``, graded-lex ordered."""
        out = {}
        for alpha in monomials_upto(self.n, self.order, 1):
            if any(alpha in c.coeffs for c in self.components):
                out[MultiIndex(alpha)] = self.coefficient(alpha)
        return out

    def jacobian(self) -> list[list]:
        n = self.n
        units = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
        zero = self._zero()
        return [[c.coeffs.get(u, zero) for u in units] for c in self.components]

    def is_invertible(self) -> bool:
        if self.n != self.m or self.order < 1:
            return False
        return linalg.det(self.jacobian()) != 0

    def displacement(self) -> list[Poly]:
        """Components with the constant term removed."""
        z = (0,) * self.n
        return [Poly(self.n, {mm: c for mm, c in p.coeffs.items() if mm != z}) for p in self.components]

    def truncate(self, h: int) -> "TruncatedJet":
        if not 0 <= h <= self.order:
            raise ValueError(f"projection order {h} outside 0..{self.order}")
        return TruncatedJet(self.base, h, self.components)

    def map_coeffs(self, fn, base_fn=None) -> "TruncatedJet":
        base = self.base if base_fn is None else tuple(base_fn(b) for b in self.base)
        return TruncatedJet(base, self.order, [c.map_coeffs(fn) for c in self.components])

    def to_float(self) -> "TruncatedJet":
        return self.map_coeffs(float, float)

    def is_exact(self) -> bool:
        from .rational import is_exact
        return all(is_exact(b) for b in self.base) and all(
            is_exact(v) for c in self.components for v in c.coeffs.values())

    def flat(self) -> list:
        """All coefficients with ``|alpha| <= k`` (value included), component-major."""
        monos = monomials_upto(self.n, self.order)
        zero = self._zero()
        return [c.coeffs.get(a, zero) for c in self.components for a in monos]

    @classmethod
    def from_flat(cls, base, order: int, m: int, values: Sequence) -> "TruncatedJet":
        n = len(base)
        monos = monomials_upto(n, order)
        if len(values) != m * len(monos):
            raise DimensionMismatch("flat coefficient vector has the wrong length")
        comps = []
        for i in range(m):
            chunk = values[i * len(monos):(i + 1) * len(monos)]
            comps.append(Poly(n, dict(zip(monos, chunk))))
        return cls(base, order, comps)

    def evaluate(self, point):
        """Evaluate the Taylor polynomial at an absolute point."""
        disp = [p - b for p, b in zip(point, self.base)]
        return tuple(c.evaluate(disp) for c in self.components)

    def __eq__(self, other):
        if not isinstance(other, TruncatedJet):
            return NotImplemented
        return (self.order == other.order and self.base == other.base
                and self.components == other.components)

    def __hash__(self):
        return hash((self.base, self.order, self.components))

    def __repr__(self):
        parts = ", ".join(f"{a}: {list(v)}" for a, v in self.coeffs.items())
        return f"TruncatedJet(base={list(self.base)}, k={self.order}, value={list(self.value)}, coeffs={{{parts}}})"


def jet_of_polynomial(p, base: Sequence, k: int) -> TruncatedJet:
    """Taylor data of the polynomial map ``p`` at ``base``, truncated at order ``k``."""
    if k < 0:
        raise ValueError("order must be non-negative")
    comps = _as_components(p)
    base = exact_point(base)
    if any(c.nvars != len(base) for c in comps):
        raise DimensionMismatch(
            f"polynomial in {comps[0].nvars} variables evaluated at a point of dimension {len(base)}")
    return TruncatedJet(base, k, [c.shift(base, k) for c in comps])


def jet_compose(outer: TruncatedJet, inner: TruncatedJet) -> TruncatedJet:
    """The jet of ``outer o inner`` at ``inner.base``."""
    if outer.order != inner.order:
        raise DimensionMismatch(f"jet orders differ: {outer.order} vs {inner.order}")
    if outer.n != inner.m:
        raise DimensionMismatch(
            f"outer source dimension {outer.n} differs from inner target dimension {inner.m}")
    if tuple(outer.base) != tuple(inner.value):
        raise NonComposable("non-composable: α(g) ≠ β(h) (outer base differs from inner value)")
    k = outer.order
    disp = inner.displacement()
    return TruncatedJet(inner.base, k, substitute_many(outer.components, disp, k))


def jet_invert(a: TruncatedJet) -> TruncatedJet:
    """Inverse jet, solved degree by degree from the inverse Jacobian."""
    if a.n != a.m:
        raise NotInvertible("non-square jet is not an invertible element")
    if a.order == 0:
        return TruncatedJet(a.value, 0, [Poly.const(a.n, b) for b in a.base])
    ainv = linalg.inverse(a.jacobian())
    n, k = a.n, a.order
    adisp = a.displacement()
    g = [sum((Poly.var(n, j) * ainv[i][j] for j in range(n)), Poly.zero(n)) for i in range(n)]
    for d in range(2, k + 1):
        comp = substitute_many(adisp, g, d)
        resid = [c.homogeneous(d) for c in comp]
        if all(r.is_zero() for r in resid):
            continue
        g = [g[i] - sum((resid[j] * ainv[i][j] for j in range(n)), Poly.zero(n)) for i in range(n)]
    return TruncatedJet(a.value, k, [g[i] + a.base[i] for i in range(n)])


def _check_same(a: TruncatedJet, b: TruncatedJet):
    if a.base != b.base:
        raise DimensionMismatch("jets are based at different points")
    if a.order != b.order or a.n != b.n:
        raise DimensionMismatch("jets differ in order or source dimension")


def jet_add(a: TruncatedJet, b: TruncatedJet) -> TruncatedJet:
    _check_same(a, b)
    if a.m != b.m:
        raise DimensionMismatch("jets differ in target dimension")
    return TruncatedJet(a.base, a.order, [x + y for x, y in zip(a.components, b.components)])


def jet_sub(a: TruncatedJet, b: TruncatedJet) -> TruncatedJet:
    _check_same(a, b)
    if a.m != b.m:
        raise DimensionMismatch("jets differ in target dimension")
    return TruncatedJet(a.base, a.order, [x - y for x, y in zip(a.components, b.components)])


def jet_scale(c, a: TruncatedJet) -> TruncatedJet:
    return TruncatedJet(a.base, a.order, [p * c for p in a.components])


def jet_mul(a: TruncatedJet, b: TruncatedJet) -> TruncatedJet:
    """Truncated product of scalar jets (or scalar times vector jet)."""
    _check_same(a, b)
    if a.m == 1:
        s, v = a, b
    elif b.m == 1:
        s, v = b, a
    else:
        raise DimensionMismatch("pointwise product needs a scalar (m = 1) factor")
    f = s.components[0]
    return TruncatedJet(a.base, a.order, [f.mul_trunc(p, a.order) for p in v.components])


__all__ = [
    "MultiIndex", "TruncatedJet", "jet_of_polynomial", "jet_compose", "jet_invert",
    "jet_add", "jet_sub", "jet_scale", "jet_mul",
]
