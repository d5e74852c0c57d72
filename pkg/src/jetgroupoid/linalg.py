"""Small dense linear algebra over any field (exact rationals or floats)."""
from __future__ import annotations

from .errors import NotInvertible
from .rational import q


def identity(n: int, one=None):
    one = q(1) if one is None else one
    zero = one - one
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def matmul(a, b):
    inner = len(b)
    return [[sum((a[i][l] * b[l][j] for l in range(1, inner)), a[i][0] * b[0][j])
             for j in range(len(b[0]))] for i in range(len(a))]


def matvec(a, v):
    return [sum((row[j] * v[j] for j in range(1, len(v))), row[0] * v[0]) for row in a]


def _pivot(col, start, rows):
    best, best_abs = None, None
    for r in range(start, len(rows)):
        v = rows[r][col]
        if v == 0:
            continue
        mag = abs(v)
        if best is None or mag > best_abs:
            best, best_abs = r, mag
    return best


def det(a):
    n = len(a)
    m = [list(r) for r in a]
    sign = 1
    acc = None
    for c in range(n):
        p = _pivot(c, c, m)
        if p is None:
            return m[0][0] - m[0][0]
        if p != c:
            m[c], m[p] = m[p], m[c]
            sign = -sign
        pv = m[c][c]
        acc = pv if acc is None else acc * pv
        for r in range(c + 1, n):
            f = m[r][c] / pv
            if f != 0:
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return acc if sign == 1 else -acc


def inverse(a):
    """Gauss-Jordan inverse; raises NotInvertible on a singular matrix."""
    n = len(a)
    if any(len(r) != n for r in a):
        raise NotInvertible("non-square Jacobian has no inverse")
    one = a[0][0] - a[0][0] + 1
    m = [list(r) + idr for r, idr in zip(a, identity(n, one))]
    for c in range(n):
        p = _pivot(c, c, m)
        if p is None:
            raise NotInvertible("singular Jacobian: jet lies outside the invertible jets")
        m[c], m[p] = m[p], m[c]
        pv = m[c][c]
        m[c] = [x / pv for x in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [row[n:] for row in m]
