"""Algebroid sections and their brackets.

Conventions
-----------
* Vector field bracket: ``[mu, eta]_i = sum_j mu_j d_j eta_i - eta_j d_j mu_i``.
* Fibrewise matrix bracket (right-invariant convention):
  ``conv(A, B) = -(AB - BA) = BA - AB``. With this choice the trivial-groupoid
  bracket agrees with the operator commutator of :mod:`linear_groupoid` and
  with the second-order product of exponentials (see :mod:`flows`).
"""
from __future__ import annotations

from math import factorial
from typing import Iterable, Sequence

from .errors import DimensionMismatch
from .jet_groupoid import JetArrow, perturb, eps_part
from .multijet import TruncatedJet, jet_compose
from .poly import Poly, PolyMatrix, PolyVectorField, directional, monomials_upto
from .rational import q


def conv(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    """Fibrewise bracket ``BA - AB``."""
    return b @ a - a @ b


def _alpha_factorial(alpha) -> int:
    out = 1
    for a in alpha:
        out *= factorial(a)
    return out


def _as_poly(n: int, f) -> Poly:
    return f if isinstance(f, Poly) else Poly.const(n, q(f))


class MatrixAlgebraSpec:
    """gl(m) or the span of ``basis``, which must be closed under commutators."""

    def __init__(self, m: int, basis: Sequence | None = None):
        self.m = m
        self.basis = None if basis is None else [[[q(v) for v in row] for row in b] for b in basis]
        if self.basis is not None:
            for b in self.basis:
                if len(b) != m or any(len(r) != m for r in b):
                    raise DimensionMismatch(f"basis matrix is not {m}x{m}")
            for a in self.basis:
                for b in self.basis:
                    c = [[sum(a[i][l] * b[l][j] - b[i][l] * a[l][j] for l in range(m)) for j in range(m)]
                         for i in range(m)]
                    if not self.contains(c):
                        raise ValueError("basis is not closed under the matrix commutator")

    def contains(self, mat) -> bool:
        if self.basis is None:
            return True
        vecs = [[v for row in b for v in row] for b in self.basis]
        target = [q(v) for row in mat for v in row]
        return _rank(vecs + [target]) == _rank(vecs)

    def admits(self, h: PolyMatrix) -> bool:
        """Every monomial coefficient matrix of ``h`` lies in the algebra."""
        if self.basis is None:
            return True
        monos = {mono for row in h.rows for e in row for mono in e.coeffs}
        for mono in monos:
            mat = [[e.coeffs.get(mono, q(0)) for e in row] for row in h.rows]
            if not self.contains(mat):
                return False
        return True


def _rank(rows) -> int:
    rows = [list(r) for r in rows if any(v != 0 for v in r)]
    if not rows:
        return 0
    rank, col, width = 0, 0, len(rows[0])
    while rank < len(rows) and col < width:
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / rows[rank][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
        col += 1
    return rank


class TrivialSection:
    """Section ``(theta, h)`` of the algebroid of the trivial groupoid ``M x H x M``."""

    __slots__ = ("theta", "h", "algebra")

    def __init__(self, theta: PolyVectorField, h: PolyMatrix, algebra: MatrixAlgebraSpec | None = None):
        if h.nvars != theta.dim:
            raise DimensionMismatch("matrix part and vector field live on different dimensions")
        if h.shape[0] != h.shape[1]:
            raise DimensionMismatch("matrix part must be square")
        if algebra is not None and not algebra.admits(h):
            raise ValueError("matrix part leaves the specified subalgebra")
        self.theta = theta
        self.h = h
        self.algebra = algebra

    @classmethod
    def zero(cls, n: int, m: int) -> "TrivialSection":
        return cls(PolyVectorField.zero(n), PolyMatrix.zero(n, m))

    @property
    def n(self) -> int:
        return self.theta.dim

    @property
    def m(self) -> int:
        return self.h.shape[0]

    def __add__(self, o):
        return TrivialSection(self.theta + o.theta, self.h + o.h)

    def __sub__(self, o):
        return TrivialSection(self.theta - o.theta, self.h - o.h)

    def __neg__(self):
        return TrivialSection(-self.theta, -self.h)

    def scale(self, f) -> "TrivialSection":
        return TrivialSection(self.theta.scale(f), self.h.scale(f))

    def is_zero(self) -> bool:
        return self.theta.is_zero() and self.h.is_zero()

    def __eq__(self, o):
        return isinstance(o, TrivialSection) and self.theta == o.theta and self.h == o.h

    def __hash__(self):
        return hash((self.theta, self.h))

    def __repr__(self):
        return f"TrivialSection(theta={self.theta!r}, h={self.h!r})"


def _check_trivial(a: TrivialSection, b: TrivialSection):
    if a.n != b.n or a.m != b.m:
        raise DimensionMismatch(f"sections differ in dimension: ({a.n},{a.m}) vs ({b.n},{b.m})")


def bracket_trivial(a: TrivialSection, b: TrivialSection) -> TrivialSection:
    """``([theta, theta'], conv(h, h') + theta(h') - theta'(h))``."""
    _check_trivial(a, b)
    h = conv(a.h, b.h) + b.h.lie(a.theta.components) - a.h.lie(b.theta.components)
    return TrivialSection(a.theta.bracket(b.theta), h)


def ad(xi: TrivialSection, sigma: TrivialSection) -> TrivialSection:
    return -bracket_trivial(xi, sigma)


class JetSection:
    """``sum f_i j_k mu_i``: a polynomial section of the k-jets of vector fields."""

    __slots__ = ("terms", "k", "n")

    def __init__(self, terms: Iterable, k: int, n: int | None = None):
        terms = [(f, mu) for f, mu in terms]
        if n is None:
            if not terms:
                raise ValueError("dimension required for an empty section")
            n = terms[0][1].dim
        self.n = n
        self.k = k
        self.terms = []
        for f, mu in terms:
            if not isinstance(mu, PolyVectorField):
                mu = PolyVectorField(mu)
            if mu.dim != n:
                raise DimensionMismatch("jet section terms live on different dimensions")
            self.terms.append((_as_poly(n, f), mu))

    @classmethod
    def holonomic(cls, mu: PolyVectorField, k: int) -> "JetSection":
        return cls([(Poly.const(mu.dim, q(1)), mu)], k)

    @classmethod
    def zero(cls, n: int, k: int) -> "JetSection":
        return cls([], k, n)

    def normalize(self) -> "JetSection":
        """Merge terms with equal ``mu``; drop vanishing terms; deterministic order."""
        acc: dict = {}
        order = []
        for f, mu in self.terms:
            if f.is_zero() or mu.is_zero():
                continue
            if mu not in acc:
                acc[mu] = f
                order.append(mu)
            else:
                acc[mu] = acc[mu] + f
        terms = [(acc[mu], mu) for mu in order if not acc[mu].is_zero()]
        terms.sort(key=lambda t: repr(t[1]))
        return JetSection(terms, self.k, self.n)

    def __add__(self, o: "JetSection") -> "JetSection":
        _check_jet(self, o)
        return JetSection(self.terms + o.terms, self.k, self.n).normalize()

    def __neg__(self):
        return JetSection([(-f, mu) for f, mu in self.terms], self.k, self.n)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, g) -> "JetSection":
        g = _as_poly(self.n, g)
        return JetSection([(g * f, mu) for f, mu in self.terms], self.k, self.n).normalize()

    def canonical(self) -> tuple:
        """Jet coefficient functions ``c_{alpha,i} = sum f * d^alpha mu_i / alpha!``."""
        out = []
        for alpha in monomials_upto(self.n, self.k):
            fac = q(_alpha_factorial(alpha))
            for i in range(self.n):
                acc = Poly.zero(self.n)
                for f, mu in self.terms:
                    d = mu[i].partial(alpha)
                    if not d.is_zero():
                        acc = acc + f * d
                out.append(acc * (1 / fac) if fac != 1 else acc)
        return tuple(out)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.canonical())

    def projected(self, h: int) -> "JetSection":
        """Image under the projection of k-jets to h-jets."""
        if not 0 <= h <= self.k:
            raise ValueError(f"projection order {h} outside 0..{self.k}")
        return JetSection(self.terms, h, self.n)

    def at(self, y: Sequence) -> TruncatedJet:
        """The jet ``Xi(y)`` at the point ``y``: ``sum f_i(y) j_k mu_i(y)``."""
        y = tuple(y)
        comps = None
        for f, mu in self.terms:
            fy = f.evaluate(y)
            shifted = [c.shift(y, self.k) * fy for c in mu]
            comps = shifted if comps is None else [a + b for a, b in zip(comps, shifted)]
        if comps is None:
            comps = [Poly.zero(self.n) for _ in range(self.n)]
        return TruncatedJet(y, self.k, comps)

    def __eq__(self, o):
        return isinstance(o, JetSection) and self.k == o.k and self.n == o.n and self.canonical() == o.canonical()

    def __hash__(self):
        return hash((self.k, self.canonical()))

    def __repr__(self):
        return f"JetSection(k={self.k}, terms={self.terms!r})"


def _check_jet(a, b):
    if a.k != b.k:
        raise DimensionMismatch(f"jet orders differ: {a.k} vs {b.k}")
    if a.n != b.n:
        raise DimensionMismatch(f"dimensions differ: {a.n} vs {b.n}")


def bracket_jet(a: JetSection, b: JetSection) -> JetSection:
    """Bilinear extension of ``[f j mu, g j eta] = fg j[mu,eta] + f(mu g) j eta - g(eta f) j mu``."""
    _check_jet(a, b)
    out = []
    for f, mu in a.terms:
        for g, eta in b.terms:
            out.append((f * g, mu.bracket(eta)))
            out.append((f * mu.apply(g), eta))
            out.append((-(g * eta.apply(f)), mu))
    return JetSection(out, a.k, a.n).normalize()


class GroupJetSection:
    """``sum f_i j_k zeta_i`` with matrix-valued polynomial ``zeta_i``."""

    __slots__ = ("terms", "k", "n", "m")

    def __init__(self, terms: Iterable, k: int, n: int | None = None, m: int | None = None):
        terms = list(terms)
        if terms:
            n = terms[0][1].nvars if n is None else n
            m = terms[0][1].shape[0] if m is None else m
        if n is None or m is None:
            raise ValueError("dimensions required for an empty section")
        self.n, self.m, self.k = n, m, k
        self.terms = []
        for f, z in terms:
            if z.nvars != n or z.shape != (m, m):
                raise DimensionMismatch("group jet section terms differ in dimension")
            self.terms.append((_as_poly(n, f), z))

    @classmethod
    def holonomic(cls, zeta: PolyMatrix, k: int) -> "GroupJetSection":
        return cls([(Poly.const(zeta.nvars, q(1)), zeta)], k)

    @classmethod
    def zero(cls, n: int, m: int, k: int) -> "GroupJetSection":
        return cls([], k, n, m)

    def normalize(self) -> "GroupJetSection":
        acc: dict = {}
        order = []
        for f, z in self.terms:
            if f.is_zero() or z.is_zero():
                continue
            if z not in acc:
                acc[z] = f
                order.append(z)
            else:
                acc[z] = acc[z] + f
        terms = [(acc[z], z) for z in order if not acc[z].is_zero()]
        terms.sort(key=lambda t: repr(t[1]))
        return GroupJetSection(terms, self.k, self.n, self.m)

    def __add__(self, o):
        _check_group(self, o)
        return GroupJetSection(self.terms + o.terms, self.k, self.n, self.m).normalize()

    def __neg__(self):
        return GroupJetSection([(-f, z) for f, z in self.terms], self.k, self.n, self.m)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, g) -> "GroupJetSection":
        g = _as_poly(self.n, g)
        return GroupJetSection([(g * f, z) for f, z in self.terms], self.k, self.n, self.m).normalize()

    def canonical(self) -> tuple:
        out = []
        for alpha in monomials_upto(self.n, self.k):
            fac = q(_alpha_factorial(alpha))
            for i in range(self.m):
                for j in range(self.m):
                    acc = Poly.zero(self.n)
                    for f, z in self.terms:
                        d = z[i, j].partial(alpha)
                        if not d.is_zero():
                            acc = acc + f * d
                    out.append(acc * (1 / fac) if fac != 1 else acc)
        return tuple(out)

    def at(self, y: Sequence) -> list:
        """Matrix of truncated Taylor polynomials (in displacement variables) at ``y``."""
        y = tuple(y)
        n, m, k = self.n, self.m, self.k
        mat = [[Poly.zero(n) for _ in range(m)] for _ in range(m)]
        for f, z in self.terms:
            fy = f.evaluate(y)
            for i in range(m):
                for j in range(m):
                    if not z[i, j].is_zero():
                        mat[i][j] = mat[i][j] + z[i, j].shift(y, k) * fy
        return mat

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.canonical())

    def __eq__(self, o):
        return (isinstance(o, GroupJetSection) and self.k == o.k and self.n == o.n
                and self.m == o.m and self.canonical() == o.canonical())

    def __hash__(self):
        return hash((self.k, self.canonical()))

    def __repr__(self):
        return f"GroupJetSection(k={self.k}, terms={self.terms!r})"


def _check_group(a, b):
    if a.k != b.k:
        raise DimensionMismatch(f"jet orders differ: {a.k} vs {b.k}")
    if a.n != b.n or a.m != b.m:
        raise DimensionMismatch("group jet sections differ in dimension")


def bracket_group_jet(a: GroupJetSection, b: GroupJetSection) -> GroupJetSection:
    """``[f j zeta, g j eta] = fg j conv(zeta, eta)``; bilinear over functions."""
    _check_group(a, b)
    out = [(f * g, conv(z, e)) for f, z in a.terms for g, e in b.terms]
    return GroupJetSection(out, a.k, a.n, a.m).normalize()


def anchor(section) -> PolyVectorField:
    if isinstance(section, TrivialSection):
        return section.theta
    if isinstance(section, JetSection):
        out = PolyVectorField.zero(section.n)
        for f, mu in section.terms:
            out = out + mu.scale(f)
        return out
    raise TypeError(f"no anchor for {type(section).__name__}")


def lie_derivative(xi: JetSection, lam: GroupJetSection) -> GroupJetSection:
    """``sum g_i [ (theta_i f_j) j lambda_j + f_j j(theta_i lambda_j) ]``."""
    if xi.k != lam.k:
        raise DimensionMismatch(f"jet orders differ: {xi.k} vs {lam.k}")
    if xi.n != lam.n:
        raise DimensionMismatch("dimensions differ")
    out = []
    for g, theta in xi.terms:
        for f, z in lam.terms:
            out.append((g * theta.apply(f), z))
            out.append((g * f, z.lie(theta.components)))
    return GroupJetSection(out, lam.k, lam.n, lam.m).normalize()


class SemidirectSection:
    """Pair ``(Xi, Lambda)`` in the semi-direct product of jet and group-jet sections."""

    __slots__ = ("xi", "lam")

    def __init__(self, xi: JetSection, lam: GroupJetSection):
        if xi.k != lam.k or xi.n != lam.n:
            raise DimensionMismatch("semi-direct components differ in order or dimension")
        self.xi = xi
        self.lam = lam

    def __add__(self, o):
        return SemidirectSection(self.xi + o.xi, self.lam + o.lam)

    def __neg__(self):
        return SemidirectSection(-self.xi, -self.lam)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, g):
        return SemidirectSection(self.xi.scale(g), self.lam.scale(g))

    def is_zero(self):
        return self.xi.is_zero() and self.lam.is_zero()

    def __eq__(self, o):
        return isinstance(o, SemidirectSection) and self.xi == o.xi and self.lam == o.lam

    def __hash__(self):
        return hash((self.xi, self.lam))

    def __repr__(self):
        return f"SemidirectSection({self.xi!r}, {self.lam!r})"


def bracket_semidirect(a: SemidirectSection, b: SemidirectSection) -> SemidirectSection:
    xi = bracket_jet(a.xi, b.xi)
    lam = bracket_group_jet(a.lam, b.lam) + lie_derivative(a.xi, b.lam) - lie_derivative(b.xi, a.lam)
    return SemidirectSection(xi, lam)


def right_invariant_field(xi: JetSection, x_jet: TruncatedJet) -> TruncatedJet:
    """Right-invariant field of ``xi`` at the arrow ``X``: ``Xi(target X) o X``.

    Works over any coefficient ring, so ``x_jet`` may carry dual numbers.
    """
    return jet_compose(xi.at(x_jet.value), x_jet)


def right_invariant_bracket(xi: JetSection, eta: JetSection, x_arrow: JetArrow) -> TruncatedJet:
    """Vector field bracket of the two right-invariant fields at ``X``, computed exactly.

    Directional derivatives come from evaluating at ``X + eps V`` over dual numbers.
    """
    fx = right_invariant_field(xi, x_arrow.jet)
    fe = right_invariant_field(eta, x_arrow.jet)
    d_eta_fx = eps_part(right_invariant_field(eta, perturb(x_arrow, fx)))
    d_xi_fe = eps_part(right_invariant_field(xi, perturb(x_arrow, fe)))
    return TruncatedJet(x_arrow.source, x_arrow.order,
                        [a - b for a, b in zip(d_eta_fx.components, d_xi_fe.components)])


def right_invariant_defect(xi: JetSection, eta: JetSection, x_arrow: JetArrow) -> TruncatedJet:
    """``[xi_R, eta_R](X) - [xi, eta]_R(X)``; identically zero when the bracket is induced."""
    lhs = right_invariant_bracket(xi, eta, x_arrow)
    rhs = right_invariant_field(bracket_jet(xi, eta), x_arrow.jet)
    return TruncatedJet(x_arrow.source, x_arrow.order,
                        [a - b for a, b in zip(lhs.components, rhs.components)])


__all__ = [
    "MatrixAlgebraSpec", "TrivialSection", "JetSection", "GroupJetSection", "SemidirectSection",
    "conv", "bracket_trivial", "bracket_jet", "bracket_group_jet", "bracket_semidirect",
    "anchor", "lie_derivative", "ad", "right_invariant_field", "right_invariant_bracket",
    "right_invariant_defect",
]
