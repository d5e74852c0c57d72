"""Exact rational scalars and their ``"p/q"`` text form."""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

import gmpy2

Q = gmpy2.mpq
QType = type(Q(0))


def q(x) -> QType:
    """Coerce ``x`` (int, Fraction, mpq, ``"p/q"`` string, float) to an exact rational.

    Floats are converted exactly (binary expansion), never rounded.
    """
    if isinstance(x, QType):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, (int, Fraction, float)) or isinstance(x, Rational):
        return Q(x)
    if isinstance(x, str):
        return Q(x.strip())
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return Q(int(x.numerator), int(x.denominator))
    raise TypeError(f"cannot interpret {x!r} as a rational")


def is_exact(x) -> bool:
    return isinstance(x, (QType, int, Fraction)) and not isinstance(x, bool)


def to_text(x) -> str:
    """Rational as ``"p/q"`` (always with an explicit denominator)."""
    x = q(x)
    return f"{int(x.numerator)}/{int(x.denominator)}"


def from_text(s: str) -> QType:
    if not isinstance(s, str):
        raise TypeError(f"rational must be a 'p/q' string, got {s!r}")
    try:
        return Q(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed rational {s!r}") from exc


def exact_point(point) -> tuple:
    """Coerce ints, Fractions and ``"p/q"`` strings to mpq; leave floats and other ring elements alone."""
    return tuple(q(c) if isinstance(c, (int, Fraction, str)) and not isinstance(c, bool) else c
                 for c in point)
