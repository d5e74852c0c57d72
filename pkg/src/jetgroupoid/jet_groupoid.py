"""The groupoid of invertible k-jets of local diffeomorphisms of Q^n.

An arrow is an invertible jet; its source is the base point and its target
the value. Tangent vectors at an arrow are represented as jets with the same
base (the velocity of every coefficient).
"""
from __future__ import annotations

from typing import Sequence

from .errors import DimensionMismatch, NonComposable, NotInvertible
from .multijet import TruncatedJet, jet_compose, jet_invert, jet_of_polynomial
from .poly import Dual, Poly, PolyVectorField, dual_parts


class JetArrow:
    __slots__ = ("jet",)

    def __init__(self, jet: TruncatedJet, check: bool = True):
        if jet.n != jet.m:
            raise DimensionMismatch("jet arrows need equal source and target dimension")
        if check and jet.order >= 1 and not jet.is_invertible():
            raise NotInvertible("singular Jacobian: jet is not an invertible element")
        self.jet = jet

    @classmethod
    def identity(cls, x, k: int) -> "JetArrow":
        return cls(TruncatedJet.identity(x, k), check=False)

    @classmethod
    def of_map(cls, phi, x, k: int) -> "JetArrow":
        """Arrow given by the jet of a polynomial diffeomorphism at ``x``."""
        return cls(jet_of_polynomial(phi, x, k))

    @property
    def source(self) -> tuple:
        return self.jet.base

    @property
    def target(self) -> tuple:
        return self.jet.value

    @property
    def order(self) -> int:
        return self.jet.order

    @property
    def dim(self) -> int:
        return self.jet.n

    def __eq__(self, other):
        return isinstance(other, JetArrow) and self.jet == other.jet

    def __hash__(self):
        return hash(self.jet)

    def __repr__(self):
        return f"JetArrow({self.jet!r})"


def arrow_compose(a: JetArrow, b: JetArrow) -> JetArrow:
    """Product ``a . b``, defined when ``source(a) = target(b)``."""
    if a.source != b.target:
        raise NonComposable("non-composable: α(g) ≠ β(h) (source of the left arrow differs from target of the right)")
    return JetArrow(jet_compose(a.jet, b.jet), check=False)


def arrow_invert(a: JetArrow) -> JetArrow:
    return JetArrow(jet_invert(a.jet), check=False)


def project(a: JetArrow, h: int) -> JetArrow:
    """The projection to order ``h`` jets (drop every coefficient of order > h)."""
    if not 0 <= h <= a.order:
        raise ValueError(f"projection order {h} outside 0..{a.order}")
    return JetArrow(a.jet.truncate(h), check=False)


def prolong_diffeo_action(phi, x_arrow: JetArrow) -> JetArrow:
    """Left action of a polynomial diffeomorphism: ``j_k phi(target X) . X``."""
    jphi = jet_of_polynomial(phi, x_arrow.target, x_arrow.order)
    if x_arrow.order >= 1 and not jphi.is_invertible():
        raise NotInvertible("singular Jacobian of the diffeomorphism at the target point")
    return JetArrow(jet_compose(jphi, x_arrow.jet), check=False)


def right_translate(x_arrow: JetArrow, y_arrow: JetArrow) -> JetArrow:
    return arrow_compose(x_arrow, y_arrow)


def pushforward_right(v: TruncatedJet, y_arrow: JetArrow) -> TruncatedJet:
    """Image of a tangent vector at X under right translation by Y (composition is linear in X)."""
    return jet_compose(v, y_arrow.jet)


def _components(theta) -> list[Poly]:
    if isinstance(theta, PolyVectorField):
        return list(theta.components)
    return list(theta)


def prolong_vector_field(theta, x_arrow: JetArrow, k: int | None = None) -> TruncatedJet:
    """Tangent vector at X of the prolonged field: ``j_k theta(target X) o X``."""
    k = x_arrow.order if k is None else k
    if k != x_arrow.order:
        raise DimensionMismatch(f"prolongation order {k} differs from the arrow order {x_arrow.order}")
    comps = _components(theta)
    if len(comps) != x_arrow.dim:
        raise DimensionMismatch("vector field dimension differs from the arrow dimension")
    return jet_compose(jet_of_polynomial(comps, x_arrow.target, k), x_arrow.jet)


def prolong_vector_field_perturbative(theta, x_arrow: JetArrow) -> TruncatedJet:
    """Same tangent vector, as the eps-part of ``j_k(id + eps theta) . X`` with ``eps^2 = 0``."""
    comps = _components(theta)
    n = x_arrow.dim
    moved = [Poly.var(n, i) + comps[i].map_coeffs(lambda c: Dual(0, c)) for i in range(n)]
    jet = jet_compose(jet_of_polynomial(moved, x_arrow.target, x_arrow.order), x_arrow.jet)
    return jet.map_coeffs(lambda c: dual_parts(c)[1])


def perturb(x_arrow: JetArrow, v: TruncatedJet) -> TruncatedJet:
    """The jet ``X + eps V`` over dual numbers (same base point)."""
    if v.base != x_arrow.source or v.order != x_arrow.order or v.m != x_arrow.dim:
        raise DimensionMismatch("tangent vector does not live at this arrow")
    n = x_arrow.dim
    comps = []
    for p, dv in zip(x_arrow.jet.components, v.components):
        terms = {m: Dual(c, 0) for m, c in p.coeffs.items()}
        for m, c in dv.coeffs.items():
            terms[m] = terms.get(m, Dual(0, 0)) + Dual(0, c)
        comps.append(Poly(n, terms))
    return TruncatedJet(x_arrow.source, x_arrow.order, comps)


def eps_part(jet: TruncatedJet) -> TruncatedJet:
    return jet.map_coeffs(lambda c: dual_parts(c)[1])


def real_part(jet: TruncatedJet) -> TruncatedJet:
    return jet.map_coeffs(lambda c: dual_parts(c)[0])


__all__ = [
    "JetArrow", "arrow_compose", "arrow_invert", "project", "prolong_diffeo_action",
    "prolong_vector_field", "prolong_vector_field_perturbative", "pushforward_right",
    "right_translate", "perturb", "eps_part", "real_part",
]
