"""Seeded random generators for property suites."""
from __future__ import annotations

import random

from . import linalg
from .algebroid import GroupJetSection, JetSection, TrivialSection
from .linear_groupoid import LinearOperator, VectorSection
from .multijet import TruncatedJet
from .poly import Poly, PolyMatrix, PolyVectorField, monomials_upto, random_poly, random_rational


def rng_for(seed) -> random.Random:
    return random.Random(seed)


def random_point(rng, n: int, bound: int = 10) -> tuple:
    return tuple(random_rational(rng, bound) for _ in range(n))


def random_invertible_jet(rng, n: int, k: int, base=None, value=None, bound: int = 10,
                          density: float = 0.7) -> TruncatedJet:
    """Random jet with nonsingular Jacobian; coefficients ``p/q`` with ``|p|, q <= bound``."""
    base = random_point(rng, n, bound) if base is None else tuple(base)
    value = random_point(rng, n, bound) if value is None else tuple(value)
    while True:
        jac = [[random_rational(rng, bound) for _ in range(n)] for _ in range(n)]
        if linalg.det(jac) != 0:
            break
    comps = []
    for i in range(n):
        terms = {(0,) * n: value[i]}
        for j in range(n):
            terms[tuple(1 if l == j else 0 for l in range(n))] = jac[i][j]
        for mono in monomials_upto(n, k, 2):
            if rng.random() < density:
                terms[mono] = random_rational(rng, bound)
        comps.append(Poly(n, terms))
    return TruncatedJet(base, k, comps)


def random_composable_triple(rng, n: int, k: int, bound: int = 10):
    """Jets ``(a, b, c)`` with ``a.base = b.value`` and ``b.base = c.value``."""
    c = random_invertible_jet(rng, n, k, bound=bound)
    b = random_invertible_jet(rng, n, k, base=c.value, bound=bound)
    a = random_invertible_jet(rng, n, k, base=b.value, bound=bound)
    return a, b, c


def random_field(rng, n: int, degree: int, density: float = 0.6, bound: int = 10) -> PolyVectorField:
    return PolyVectorField([random_poly(rng, n, degree, density, bound) for _ in range(n)])


def random_linear_field(rng, n: int, bound: int = 2) -> PolyVectorField:
    """Affine field ``A x + b``: globally linear growth, so its flow is complete."""
    return random_field(rng, n, 1, 0.8, bound)


def random_matrix_poly(rng, n: int, m: int, degree: int, density: float = 0.5, bound: int = 10) -> PolyMatrix:
    return PolyMatrix([[random_poly(rng, n, degree, density, bound) for _ in range(m)] for _ in range(m)])


def random_trivial_section(rng, n: int, m: int, degree: int = 3, linear: bool = False,
                           bound: int = 10) -> TrivialSection:
    theta = random_linear_field(rng, n, bound) if linear else random_field(rng, n, degree, bound=bound)
    return TrivialSection(theta, random_matrix_poly(rng, n, m, degree, bound=bound))


def random_jet_section(rng, n: int, k: int, degree: int = 3, terms: int = 2, bound: int = 10,
                       f_degree: int | None = None) -> JetSection:
    f_degree = degree if f_degree is None else f_degree
    return JetSection([(random_poly(rng, n, f_degree, 0.6, bound), random_field(rng, n, degree, bound=bound))
                       for _ in range(terms)], k, n)


def random_group_jet_section(rng, n: int, m: int, k: int, degree: int = 3, terms: int = 2,
                             bound: int = 10) -> GroupJetSection:
    return GroupJetSection([(random_poly(rng, n, degree, 0.6, bound), random_matrix_poly(rng, n, m, degree, bound=bound))
                            for _ in range(terms)], k, n, m)


def random_nilpotent(rng, n: int, m: int, degree: int = 2, bound: int = 5) -> PolyMatrix:
    """``P U P^-1`` with ``U`` strictly upper triangular and ``P`` a constant invertible matrix."""
    u = [[random_poly(rng, n, degree, 0.7, bound) if j > i else Poly.zero(n) for j in range(m)] for i in range(m)]
    while True:
        p = [[random_rational(rng, 3) for _ in range(m)] for _ in range(m)]
        if linalg.det(p) != 0:
            break
    pinv = linalg.inverse(p)
    P, Pinv = PolyMatrix.constant(n, p), PolyMatrix.constant(n, pinv)
    return P @ PolyMatrix(u) @ Pinv


def random_operator(rng, n: int, m: int, degree: int = 2, linear: bool = False, bound: int = 10) -> LinearOperator:
    sec = random_trivial_section(rng, n, m, degree, linear, bound)
    return LinearOperator(sec.theta, sec.h)


def random_vector_section(rng, n: int, m: int, degree: int = 3, bound: int = 10) -> VectorSection:
    return VectorSection(random_poly(rng, n, degree, 0.6, bound) for _ in range(m))
