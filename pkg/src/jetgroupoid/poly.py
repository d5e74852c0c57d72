"""Sparse multivariate polynomials over a generic coefficient ring.

Coefficients are whatever supports ``+``, ``-``, ``*`` and ``== 0``: exact
rationals (``gmpy2.mpq``) for the algebraic modules, floats for the flows,
and :class:`Dual` numbers for exact first-order perturbations.

Monomials are exponent tuples. Iteration order is graded lexicographic
(total degree first, then reverse-lex on the exponent tuple, so ``x`` comes
before ``y``).
"""
from __future__ import annotations

from itertools import product as _cartesian
from typing import Callable, Iterable, Sequence

import numpy as np

from .rational import q

Monomial = tuple


def grlex_key(mono: Monomial):
    return (sum(mono), tuple(-e for e in mono))


def monomials_upto(n: int, k: int, start: int = 0) -> list[Monomial]:
    """All exponent tuples in ``n`` variables with ``start <= |a| <= k``, graded-lex order."""
    out = []
    for d in range(start, k + 1):
        out.extend(_monomials_of_degree(n, d))
    return out


def _monomials_of_degree(n: int, d: int) -> list[Monomial]:
    if n == 0:
        return [()] if d == 0 else []
    if n == 1:
        return [(d,)]
    res = []
    for first in range(d, -1, -1):
        for rest in _monomials_of_degree(n - 1, d - first):
            res.append((first,) + rest)
    return res


def _is_zero(c) -> bool:
    return c == 0


def _clean(d: dict) -> dict:
    return {m: c for m, c in d.items() if not _is_zero(c)}


_BITS = 16
_MASK = (1 << _BITS) - 1


def _pack(mono: Monomial) -> int:
    r = 0
    for i, e in enumerate(mono):
        if e > _MASK:
            raise OverflowError("exponent too large")
        r |= e << (_BITS * i)
    return r


def _unpack(key: int, n: int) -> Monomial:
    return tuple((key >> (_BITS * i)) & _MASK for i in range(n))


def _packed(d: dict) -> list:
    """``[(packed monomial, degree, coefficient)]`` sorted by degree."""
    return sorted(((_pack(m), sum(m), c) for m, c in d.items()), key=lambda t: t[1])


def _pmul(a: list, b: list, k: int | None) -> list:
    out: dict = {}
    degs: dict = {}
    for pa, da, ca in a:
        if k is None:
            for pb, db, cb in b:
                key = pa + pb
                v = out.get(key)
                if v is None:
                    out[key] = ca * cb
                    degs[key] = da + db
                else:
                    out[key] = v + ca * cb
        else:
            room = k - da
            if room < 0:
                break
            for pb, db, cb in b:
                if db > room:
                    break
                key = pa + pb
                v = out.get(key)
                if v is None:
                    out[key] = ca * cb
                    degs[key] = da + db
                else:
                    out[key] = v + ca * cb
    res = [(key, degs[key], c) for key, c in out.items() if not c == 0]
    res.sort(key=lambda t: t[1])
    return res


def _unpacked(lst: list, n: int) -> dict:
    return {_unpack(key, n): c for key, _, c in lst}


def dict_mul(a: dict, b: dict, k: int | None = None) -> dict:
    """Product of two coefficient dicts, dropping monomials of degree > k."""
    if not a or not b:
        return {}
    n = len(next(iter(a)))
    return _unpacked(_pmul(_packed(a), _packed(b), k), n)


def dict_add(a: dict, b: dict, sign=1) -> dict:
    out = dict(a)
    for m, c in b.items():
        v = out.get(m)
        if v is None:
            out[m] = c if sign == 1 else -c
        else:
            out[m] = v + c if sign == 1 else v - c
    return _clean(out)


class Poly:
    """Polynomial in ``nvars`` variables; immutable by convention."""

    __slots__ = ("nvars", "coeffs")

    def __init__(self, nvars: int, coeffs: dict | None = None):
        self.nvars = nvars
        self.coeffs = _clean(coeffs) if coeffs else {}

    # construction
    @classmethod
    def zero(cls, n: int) -> "Poly":
        return cls(n)

    @classmethod
    def const(cls, n: int, value) -> "Poly":
        return cls(n, {(0,) * n: value})

    @classmethod
    def var(cls, n: int, i: int, coef=1) -> "Poly":
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): q(coef) if isinstance(coef, int) else coef})

    @classmethod
    def from_dict(cls, n: int, d: dict) -> "Poly":
        """Build from ``{monomial: coefficient}``; keys may be tuples or ``"1,0"`` strings."""
        out = {}
        for key, c in d.items():
            mono = parse_monomial(key) if isinstance(key, str) else tuple(int(e) for e in key)
            if len(mono) != n or any(e < 0 for e in mono):
                raise ValueError(f"monomial {key!r} does not fit {n} variables")
            out[mono] = out.get(mono, 0) + q(c)
        return cls(n, out)

    # inspection
    def degree(self) -> int:
        return max((sum(m) for m in self.coeffs), default=-1)

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, mono: Monomial):
        return self.coeffs.get(tuple(mono), 0)

    def constant_term(self):
        return self.coeffs.get((0,) * self.nvars, 0)

    def items(self):
        return sorted(self.coeffs.items(), key=lambda kv: grlex_key(kv[0]))

    # arithmetic
    def _check(self, other: "Poly"):
        if other.nvars != self.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def __add__(self, other):
        if isinstance(other, Poly):
            self._check(other)
            return Poly(self.nvars, dict_add(self.coeffs, other.coeffs))
        return self + Poly.const(self.nvars, other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Poly):
            self._check(other)
            return Poly(self.nvars, dict_add(self.coeffs, other.coeffs, -1))
        return self - Poly.const(self.nvars, other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Poly(self.nvars, {m: -c for m, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, Poly):
            self._check(other)
            return Poly(self.nvars, dict_mul(self.coeffs, other.coeffs))
        return Poly(self.nvars, {m: c * other for m, c in self.coeffs.items()})

    def __rmul__(self, other):
        return Poly(self.nvars, {m: other * c for m, c in self.coeffs.items()})

    def __pow__(self, e: int):
        out = Poly.const(self.nvars, q(1))
        for _ in range(e):
            out = out * self
        return out

    def mul_trunc(self, other: "Poly", k: int) -> "Poly":
        self._check(other)
        return Poly(self.nvars, dict_mul(self.coeffs, other.coeffs, k))

    def truncate(self, k: int) -> "Poly":
        return Poly(self.nvars, {m: c for m, c in self.coeffs.items() if sum(m) <= k})

    def homogeneous(self, d: int) -> "Poly":
        return Poly(self.nvars, {m: c for m, c in self.coeffs.items() if sum(m) == d})

    def deriv(self, i: int) -> "Poly":
        out = {}
        for m, c in self.coeffs.items():
            e = m[i]
            if e:
                mm = m[:i] + (e - 1,) + m[i + 1:]
                out[mm] = c * e
        return Poly(self.nvars, out)

    def partial(self, alpha: Sequence[int]) -> "Poly":
        p = self
        for i, a in enumerate(alpha):
            for _ in range(a):
                p = p.deriv(i)
        return p

    def map_coeffs(self, fn) -> "Poly":
        return Poly(self.nvars, {m: fn(c) for m, c in self.coeffs.items()})

    # evaluation and substitution
    def __call__(self, *point):
        if len(point) == 1 and isinstance(point[0], (list, tuple, np.ndarray)):
            point = tuple(point[0])
        return self.evaluate(point)

    def evaluate(self, point: Sequence):
        if len(point) != self.nvars:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.nvars}")
        total = 0
        powers: dict = {}
        for m, c in self.coeffs.items():
            term = c
            for i, e in enumerate(m):
                if e:
                    key = (i, e)
                    pw = powers.get(key)
                    if pw is None:
                        pw = point[i] ** e
                        powers[key] = pw
                    term = term * pw
            total = total + term
        return total

    def substitute(self, polys: Sequence["Poly"], k: int | None = None) -> "Poly":
        """Compose with ``polys`` (one per variable), optionally truncating at degree ``k``."""
        return substitute_many([self], polys, k)[0]

    def shift(self, base: Sequence, k: int | None = None) -> "Poly":
        """Re-expand around ``base``: returns ``p(base + u)`` as a polynomial in ``u``."""
        n = self.nvars
        lin = [Poly(n, {(0,) * n: base[i], tuple(1 if j == i else 0 for j in range(n)): q(1)})
               for i in range(n)]
        return self.substitute(lin, k)

    # comparison
    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.coeffs == other.coeffs
        if isinstance(other, (list, tuple, dict, str)):
            return NotImplemented
        try:
            zero = other == 0
        except Exception:
            return NotImplemented
        if zero:
            return not self.coeffs
        return self.coeffs == {(0,) * self.nvars: other}

    def __hash__(self):
        return hash((self.nvars, frozenset(self.coeffs.items())))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for m, c in self.items():
            mono = "*".join(f"x{i}^{e}" if e > 1 else f"x{i}" for i, e in enumerate(m) if e)
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def substitute_many(targets: Sequence[Poly], polys: Sequence[Poly], k: int | None = None) -> list[Poly]:
    """Substitute ``polys`` into every polynomial of ``targets``, sharing the power cache."""
    if not targets:
        return []
    nv = targets[0].nvars
    if len(polys) != nv or any(t.nvars != nv for t in targets):
        raise ValueError("need one substitute per variable")
    if not polys:
        return list(targets)
    m = polys[0].nvars
    pp = [_packed(p.coeffs) for p in polys]
    cache: dict = {(0,) * nv: [(0, 0, q(1))]}

    def power(mono):
        got = cache.get(mono)
        if got is not None:
            return got
        j = next(i for i, e in enumerate(mono) if e)
        lower = mono[:j] + (mono[j] - 1,) + mono[j + 1:]
        got = _pmul(power(lower), pp[j], k)
        cache[mono] = got
        return got

    out = []
    for t in targets:
        acc: dict = {}
        for mono, c in sorted(t.coeffs.items(), key=lambda kv: grlex_key(kv[0])):
            for key, _, cc in power(mono):
                v = acc.get(key)
                acc[key] = c * cc if v is None else v + c * cc
        out.append(Poly(m, {_unpack(key, m): c for key, c in acc.items()}))
    return out


def parse_monomial(key: str) -> Monomial:
    key = key.strip()
    if not key:
        return ()
    return tuple(int(part) for part in key.split(","))


def monomial_text(mono: Monomial) -> str:
    return ",".join(str(e) for e in mono)


def directional(theta: Sequence[Poly], f: Poly) -> Poly:
    """Lie derivative of a scalar polynomial along a polynomial vector field."""
    out = Poly.zero(f.nvars)
    for i, ti in enumerate(theta):
        if not ti.is_zero():
            out = out + ti * f.deriv(i)
    return out


class PolyVectorField:
    """Vector field on Q^n with polynomial components."""

    __slots__ = ("components",)

    def __init__(self, components: Iterable[Poly]):
        comps = tuple(components)
        if not comps:
            raise ValueError("vector field needs at least one component")
        n = comps[0].nvars
        if len(comps) != n or any(c.nvars != n for c in comps):
            raise ValueError("vector field components must be n polynomials in n variables")
        self.components = comps

    @property
    def dim(self) -> int:
        return len(self.components)

    @classmethod
    def zero(cls, n: int) -> "PolyVectorField":
        return cls(Poly.zero(n) for _ in range(n))

    @classmethod
    def coordinate(cls, n: int, i: int) -> "PolyVectorField":
        """The constant field d/dx_i."""
        return cls(Poly.const(n, q(1)) if j == i else Poly.zero(n) for j in range(n))

    @classmethod
    def euler(cls, n: int, i: int = 0) -> "PolyVectorField":
        """x_i d/dx_i."""
        return cls(Poly.var(n, i) if j == i else Poly.zero(n) for j in range(n))

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def __add__(self, other: "PolyVectorField"):
        return PolyVectorField(a + b for a, b in zip(self, other))

    def __sub__(self, other: "PolyVectorField"):
        return PolyVectorField(a - b for a, b in zip(self, other))

    def __neg__(self):
        return PolyVectorField(-a for a in self)

    def scale(self, f) -> "PolyVectorField":
        """Multiply by a scalar or by a polynomial function."""
        return PolyVectorField(a * f for a in self)

    def apply(self, f: Poly) -> Poly:
        return directional(self.components, f)

    def bracket(self, other: "PolyVectorField") -> "PolyVectorField":
        return PolyVectorField(self.apply(b) - other.apply(a) for a, b in zip(self, other))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self)

    def evaluate(self, point):
        return tuple(c.evaluate(point) for c in self)

    def degree(self) -> int:
        return max(c.degree() for c in self)

    def __eq__(self, other):
        return isinstance(other, PolyVectorField) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"PolyVectorField({list(self.components)!r})"


class PolyMatrix:
    """Matrix whose entries are polynomials in a shared set of variables."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable[Poly]]):
        self.rows = tuple(tuple(r) for r in rows)
        if not self.rows or not self.rows[0]:
            raise ValueError("empty matrix")
        w = len(self.rows[0])
        nv = self.rows[0][0].nvars
        if any(len(r) != w for r in self.rows) or any(e.nvars != nv for r in self.rows for e in r):
            raise ValueError("ragged matrix or mixed variable counts")

    @property
    def shape(self):
        return len(self.rows), len(self.rows[0])

    @property
    def nvars(self) -> int:
        return self.rows[0][0].nvars

    @classmethod
    def zero(cls, n: int, m: int, cols: int | None = None) -> "PolyMatrix":
        cols = m if cols is None else cols
        return cls([[Poly.zero(n) for _ in range(cols)] for _ in range(m)])

    @classmethod
    def identity(cls, n: int, m: int) -> "PolyMatrix":
        return cls([[Poly.const(n, q(1)) if i == j else Poly.zero(n) for j in range(m)]
                    for i in range(m)])

    @classmethod
    def constant(cls, n: int, mat) -> "PolyMatrix":
        return cls([[Poly.const(n, q(v)) for v in row] for row in mat])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __add__(self, other):
        return PolyMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return PolyMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return PolyMatrix([[-a for a in r] for r in self.rows])

    def scale(self, f) -> "PolyMatrix":
        return PolyMatrix([[a * f for a in r] for r in self.rows])

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        m, inner = self.shape
        inner2, p = other.shape
        if inner != inner2:
            raise ValueError("matrix shapes do not chain")
        n = self.nvars
        out = []
        for i in range(m):
            row = []
            for j in range(p):
                acc = Poly.zero(n)
                for l in range(inner):
                    a, b = self.rows[i][l], other.rows[l][j]
                    if not a.is_zero() and not b.is_zero():
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return PolyMatrix(out)

    def commutator(self, other: "PolyMatrix") -> "PolyMatrix":
        """Plain matrix commutator ``AB - BA``."""
        return self @ other - other @ self

    def apply(self, vec: Sequence[Poly]) -> tuple:
        return tuple(sum((a * v for a, v in zip(r, vec)), Poly.zero(self.nvars)) for r in self.rows)

    def lie(self, theta: Sequence[Poly]) -> "PolyMatrix":
        """Entrywise directional derivative along ``theta``."""
        return PolyMatrix([[directional(theta, a) for a in r] for r in self.rows])

    def map(self, fn) -> "PolyMatrix":
        return PolyMatrix([[fn(a) for a in r] for r in self.rows])

    def is_zero(self) -> bool:
        return all(a.is_zero() for r in self.rows for a in r)

    def evaluate(self, point):
        return [[a.evaluate(point) for a in r] for r in self.rows]

    def degree(self) -> int:
        return max(a.degree() for r in self.rows for a in r)

    def __eq__(self, other):
        return isinstance(other, PolyMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"PolyMatrix({[list(r) for r in self.rows]!r})"


class Dual:
    """``a + b*eps`` with ``eps**2 = 0``; used for exact directional derivatives."""

    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        self.a = a
        self.b = b

    def _lift(self, o):
        return o if isinstance(o, Dual) else Dual(o, 0)

    def __add__(self, o):
        o = self._lift(o)
        return Dual(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._lift(o)
        return Dual(self.a - o.a, self.b - o.b)

    def __rsub__(self, o):
        return self._lift(o) - self

    def __neg__(self):
        return Dual(-self.a, -self.b)

    def __mul__(self, o):
        if isinstance(o, Poly):
            return NotImplemented
        o = self._lift(o)
        return Dual(self.a * o.a, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = Dual(1, 0)
        for _ in range(e):
            out = out * self
        return out

    def __truediv__(self, o):
        o = self._lift(o)
        return Dual(self.a / o.a, (self.b * o.a - self.a * o.b) / (o.a * o.a))

    def __eq__(self, o):
        o = self._lift(o)
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"Dual({self.a}, {self.b})"


def dual_parts(x):
    if isinstance(x, Dual):
        return x.a, x.b
    return x, 0


class CompiledPolys:
    """Float evaluator for a fixed list of polynomials sharing one variable set.

    ``__call__(x)`` returns a 1-D array with one value per polynomial.
    """

    def __init__(self, polys: Sequence[Poly]):
        polys = list(polys)
        self.nvars = polys[0].nvars if polys else 0
        monos = sorted({m for p in polys for m in p.coeffs}, key=grlex_key)
        if not monos:
            monos = [(0,) * self.nvars]
        self.exps = np.array(monos, dtype=float).reshape(len(monos), self.nvars)
        index = {m: i for i, m in enumerate(monos)}
        self.coef = np.zeros((len(monos), len(polys)))
        for j, p in enumerate(polys):
            for m, c in p.coeffs.items():
                self.coef[index[m], j] = float(c)
        self._linear_only = bool(np.all(self.exps.sum(axis=1) <= 1))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.nvars == 0:
            return self.coef[0].copy()
        mono = np.prod(np.power(x[None, :], self.exps), axis=1)
        return mono @ self.coef


def random_rational(rng, bound: int = 10):
    num = rng.randint(-bound, bound)
    den = rng.randint(1, bound)
    return q(num) / den


def random_poly(rng, n: int, degree: int, density: float = 0.6, bound: int = 10,
                min_degree: int = 0) -> Poly:
    out = {}
    for mono in monomials_upto(n, degree, min_degree):
        if rng.random() < density:
            out[mono] = random_rational(rng, bound)
    return Poly(n, out)


__all__ = [
    "Poly", "PolyVectorField", "PolyMatrix", "Dual", "CompiledPolys", "directional",
    "monomials_upto", "grlex_key", "parse_monomial", "monomial_text", "random_poly",
    "random_rational", "dual_parts", "dict_mul", "substitute_many",
]
