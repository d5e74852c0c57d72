import sympy as sp

from jetgroupoid.poly import Poly
from jetgroupoid.rational import q


def to_sympy(p: Poly, syms):
    """Independent symbolic form of a polynomial, for oracle comparisons."""
    expr = sp.Integer(0)
    for mono, c in p.coeffs.items():
        term = sp.Rational(int(c.numerator), int(c.denominator))
        for s, e in zip(syms, mono):
            term *= s ** e
        expr += term
    return sp.expand(expr)


def from_sympy(expr, syms) -> Poly:
    poly = sp.Poly(sp.expand(expr), *syms)
    out = {}
    for mono, c in poly.terms():
        c = sp.Rational(c)
        out[tuple(mono)] = q(f"{c.p}/{c.q}")
    return Poly(len(syms), out)
