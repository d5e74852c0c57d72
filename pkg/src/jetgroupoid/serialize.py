"""JSON forms of every artifact.

Rationals are ``"p/q"`` strings; floats use ``repr`` (shortest round trip).
Polynomials are ``{"1,0": "3/2", ...}`` maps from exponent keys to coefficients.
Readers raise :class:`MalformedInput` on anything that does not fit the schema.
"""
from __future__ import annotations

import json
from typing import Any

import numpy as np

from .algebroid import GroupJetSection, JetSection, TrivialSection
from .errors import MalformedInput
from .finite_groupoid import (FiniteGroup, GroupoidTable, SubgroupoidSpec, pair_groupoid,
                              product_subgroupoid, trivial_groupoid)
from .jet_groupoid import JetArrow
from .linear_groupoid import LinearOperator, VectorSection
from .multijet import MultiIndex, TruncatedJet
from .poly import Poly, PolyMatrix, PolyVectorField, monomial_text, parse_monomial
from .rational import from_text, is_exact, to_text


def scalar_out(x):
    if is_exact(x):
        return to_text(x)
    return float(x)


def scalar_in(v):
    if isinstance(v, str):
        try:
            return from_text(v)
        except ValueError as exc:
            raise MalformedInput(str(exc)) from exc
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise MalformedInput(f"expected a 'p/q' string or number, got {v!r}")
    return from_text(str(v)) if isinstance(v, int) else float(v)


def dumps(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, floats by repr)."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


def _need(d, key, kind=None):
    if not isinstance(d, dict):
        raise MalformedInput(f"expected a JSON object, got {type(d).__name__}")
    if key not in d:
        raise MalformedInput(f"missing field {key!r}")
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise MalformedInput(f"field {key!r} has the wrong type")
    return v


def _int(d, key) -> int:
    v = _need(d, key)
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise MalformedInput(f"field {key!r} must be a non-negative integer")
    return v


# polynomials

def poly_to_json(p: Poly) -> dict:
    items = sorted(p.coeffs.items(), key=lambda kv: (sum(kv[0]), tuple(-e for e in kv[0])))
    return {monomial_text(m): scalar_out(c) for m, c in items}


def poly_from_json(d, n: int) -> Poly:
    if not isinstance(d, dict):
        raise MalformedInput("polynomial must be an object of monomial keys")
    out = {}
    for key, c in d.items():
        try:
            mono = parse_monomial(key)
        except ValueError as exc:
            raise MalformedInput(f"malformed monomial key {key!r}") from exc
        if len(mono) != n or any(e < 0 for e in mono):
            raise MalformedInput(f"monomial {key!r} does not fit {n} variables")
        out[mono] = scalar_in(c)
    return Poly(n, out)


def field_to_json(v: PolyVectorField) -> list:
    return [poly_to_json(c) for c in v.components]


def field_from_json(d, n: int) -> PolyVectorField:
    if not isinstance(d, list) or len(d) != n:
        raise MalformedInput(f"vector field must list {n} component polynomials")
    return PolyVectorField([poly_from_json(c, n) for c in d])


def matrix_to_json(h: PolyMatrix) -> dict:
    """``{monomial: coefficient matrix}``."""
    rows, cols = h.shape
    monos = sorted({m for row in h.rows for e in row for m in e.coeffs},
                   key=lambda m: (sum(m), tuple(-e for e in m)))
    return {monomial_text(m): [[scalar_out(h.rows[i][j].coeffs[m]) if m in h.rows[i][j].coeffs else "0/1"
                                for j in range(cols)] for i in range(rows)] for m in monos}


def matrix_from_json(d, n: int, m: int) -> PolyMatrix:
    if not isinstance(d, dict):
        raise MalformedInput("matrix polynomial must map monomials to coefficient matrices")
    entries = [[{} for _ in range(m)] for _ in range(m)]
    for key, mat in d.items():
        mono = parse_monomial(key)
        if len(mono) != n:
            raise MalformedInput(f"monomial {key!r} does not fit {n} variables")
        if not isinstance(mat, list) or len(mat) != m or any(not isinstance(r, list) or len(r) != m for r in mat):
            raise MalformedInput(f"coefficient matrix for {key!r} is not {m}x{m}")
        for i in range(m):
            for j in range(m):
                c = scalar_in(mat[i][j])
                if c != 0:
                    entries[i][j][mono] = c
    return PolyMatrix([[Poly(n, e) for e in row] for row in entries])


# jets

def jet_to_json(a: TruncatedJet, kind: str | None = None) -> dict:
    out = {
        "n": a.n, "m": a.m, "k": a.order,
        "base": [scalar_out(b) for b in a.base],
        "value": [scalar_out(v) for v in a.value],
        "coeffs": {str(alpha): [scalar_out(c) for c in vec] for alpha, vec in a.coeffs.items()},
    }
    if kind:
        out["kind"] = kind
    return out


def jet_from_json(d) -> TruncatedJet:
    n, m, k = _int(d, "n"), _int(d, "m"), _int(d, "k")
    base = _need(d, "base", list)
    value = _need(d, "value", list)
    coeffs = d.get("coeffs", {})
    if len(base) != n or len(value) != m:
        raise MalformedInput("base/value lengths do not match n/m")
    if not isinstance(coeffs, dict):
        raise MalformedInput("coeffs must be an object")
    base = [scalar_in(b) for b in base]
    value = [scalar_in(v) for v in value]
    comps = [{(0,) * n: value[i]} for i in range(m)]
    for key, vec in coeffs.items():
        try:
            alpha = MultiIndex.parse(key)
        except ValueError as exc:
            raise MalformedInput(f"malformed multi-index {key!r}") from exc
        if len(alpha) != n or not 1 <= alpha.order <= k:
            raise MalformedInput(f"multi-index {key!r} does not fit n={n}, k={k}")
        if not isinstance(vec, list) or len(vec) != m:
            raise MalformedInput(f"coefficient vector for {key!r} must have {m} entries")
        for i, c in enumerate(vec):
            comps[i][tuple(alpha)] = scalar_in(c)
    return TruncatedJet(base, k, [Poly(n, c) for c in comps])


def arrow_to_json(a: JetArrow) -> dict:
    return jet_to_json(a.jet, "jet_arrow")


def arrow_from_json(d) -> JetArrow:
    return JetArrow(jet_from_json(d))


# sections and operators

def trivial_section_to_json(s: TrivialSection) -> dict:
    return {"kind": "trivial_section", "n": s.n, "m": s.m,
            "theta": field_to_json(s.theta), "h": matrix_to_json(s.h)}


def trivial_section_from_json(d) -> TrivialSection:
    n, m = _int(d, "n"), _int(d, "m")
    return TrivialSection(field_from_json(_need(d, "theta"), n), matrix_from_json(_need(d, "h"), n, m))


def jet_section_to_json(s: JetSection) -> dict:
    return {"kind": "jet_section", "n": s.n, "k": s.k,
            "terms": [{"f": poly_to_json(f), "mu": field_to_json(mu)} for f, mu in s.terms]}


def jet_section_from_json(d) -> JetSection:
    n, k = _int(d, "n"), _int(d, "k")
    terms = _need(d, "terms", list)
    return JetSection([(poly_from_json(_need(t, "f"), n), field_from_json(_need(t, "mu"), n)) for t in terms], k, n)


def group_jet_section_to_json(s: GroupJetSection) -> dict:
    return {"kind": "group_jet_section", "n": s.n, "m": s.m, "k": s.k,
            "terms": [{"f": poly_to_json(f), "zeta": matrix_to_json(z)} for f, z in s.terms]}


def group_jet_section_from_json(d) -> GroupJetSection:
    n, m, k = _int(d, "n"), _int(d, "m"), _int(d, "k")
    terms = _need(d, "terms", list)
    return GroupJetSection([(poly_from_json(_need(t, "f"), n), matrix_from_json(_need(t, "zeta"), n, m))
                            for t in terms], k, n, m)


def operator_to_json(op: LinearOperator) -> dict:
    return {"kind": "linear_operator", "n": op.n, "m": op.m,
            "theta": field_to_json(op.theta), "h": matrix_to_json(op.h)}


def operator_from_json(d) -> LinearOperator:
    n, m = _int(d, "n"), _int(d, "m")
    return LinearOperator(field_from_json(_need(d, "theta"), n), matrix_from_json(_need(d, "h"), n, m))


def vector_section_to_json(s: VectorSection) -> dict:
    return {"kind": "vector_section", "n": s.n, "components": [poly_to_json(c) for c in s.components]}


def vector_section_from_json(d) -> VectorSection:
    n = _int(d, "n")
    comps = _need(d, "components", list)
    if not comps:
        raise MalformedInput("vector section needs at least one component")
    return VectorSection(poly_from_json(c, n) for c in comps)


def field_doc_to_json(v: PolyVectorField) -> dict:
    return {"kind": "vector_field", "n": v.dim, "components": field_to_json(v)}


def field_doc_from_json(d) -> PolyVectorField:
    n = _int(d, "n")
    return field_from_json(_need(d, "components"), n)


def section_from_json(d):
    """Dispatch on ``kind``."""
    kind = _need(d, "kind", str)
    readers = {
        "trivial_section": trivial_section_from_json,
        "jet_section": jet_section_from_json,
        "group_jet_section": group_jet_section_from_json,
        "linear_operator": operator_from_json,
        "vector_section": vector_section_from_json,
        "vector_field": field_doc_from_json,
        "jet_arrow": arrow_from_json,
    }
    if kind not in readers:
        raise MalformedInput(f"unknown artifact kind {kind!r}")
    return readers[kind](d)


def to_json(obj) -> dict:
    writers = [
        (JetArrow, arrow_to_json), (TruncatedJet, jet_to_json), (TrivialSection, trivial_section_to_json),
        (JetSection, jet_section_to_json), (GroupJetSection, group_jet_section_to_json),
        (LinearOperator, operator_to_json), (VectorSection, vector_section_to_json),
        (PolyVectorField, field_doc_to_json), (GroupoidTable, groupoid_to_json),
    ]
    for cls, fn in writers:
        if isinstance(obj, cls):
            return fn(obj)
    raise TypeError(f"no JSON form for {type(obj).__name__}")


# finite groupoids

def groupoid_to_json(t: GroupoidTable) -> dict:
    return {
        "arrows": list(t.arrows), "units": list(t.units),
        "src": {a: t.src[a] for a in t.arrows}, "tgt": {a: t.tgt[a] for a in t.arrows},
        "comp": [[g, h, t.comp[(g, h)]] for g in t.arrows for h in t.arrows if (g, h) in t.comp],
        "inv": {a: t.inv[a] for a in t.arrows},
    }


def _group_from_json(d) -> FiniteGroup:
    els = _need(d, "elements", list)
    table = _need(d, "cayley", list)
    try:
        return FiniteGroup(els, table)
    except (ValueError, IndexError, KeyError) as exc:
        raise MalformedInput(f"bad Cayley table: {exc}") from exc


def groupoid_from_json(d) -> GroupoidTable:
    """Full table, or shorthand ``{"pair": [...]}`` / ``{"trivial": {"points", "elements", "cayley"}}``."""
    if not isinstance(d, dict):
        raise MalformedInput("groupoid must be a JSON object")
    if "pair" in d:
        pts = _need(d, "pair", list)
        if not pts:
            raise MalformedInput("pair groupoid needs at least one point")
        return pair_groupoid(pts)
    if "trivial" in d:
        body = _need(d, "trivial", dict)
        pts = _need(body, "points", list)
        if not pts:
            raise MalformedInput("trivial groupoid needs at least one point")
        return trivial_groupoid(pts, _group_from_json(body))
    try:
        comp = {}
        for entry in _need(d, "comp", list):
            if not isinstance(entry, list) or len(entry) != 3:
                raise MalformedInput("comp entries are [g, h, gh] triples")
            comp[(entry[0], entry[1])] = entry[2]
        return GroupoidTable(_need(d, "arrows", list), _need(d, "units", list), _need(d, "src", dict),
                             _need(d, "tgt", dict), comp, _need(d, "inv", dict))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, MalformedInput):
            raise
        raise MalformedInput(str(exc)) from exc


def subgroupoid_from_json(d, parent: GroupoidTable) -> SubgroupoidSpec:
    """``{"member": [...]}`` or ``{"points": [...], "subgroup": [...]}`` for ``M x N x M``."""
    if isinstance(d, list):
        return SubgroupoidSpec(parent, d)
    if not isinstance(d, dict):
        raise MalformedInput("subgroupoid must be a list of arrows or an object")
    if "member" in d:
        return SubgroupoidSpec(parent, _need(d, "member", list))
    return product_subgroupoid(parent, _need(d, "points", list), _need(d, "subgroup", list))


# flows

def array_to_json(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def path_to_csv(path) -> str:
    """Rows ``t, point..., g row-major``; floats by repr."""
    if not path:
        return ""
    n, m = len(path[0].point), path[0].g.shape[0]
    head = ["t"] + [f"x{i}" for i in range(n)] + [f"g{i}{j}" for i in range(m) for j in range(m)]
    lines = [",".join(head)]
    for s in path:
        vals = [s.t] + list(np.asarray(s.point, dtype=float)) + list(np.asarray(s.g, dtype=float).ravel())
        lines.append(",".join(repr(float(v)) for v in vals))
    return "\n".join(lines) + "\n"


def path_to_json(path) -> list:
    return [{"t": float(s.t), "point": array_to_json(s.point), "g": array_to_json(s.g)} for s in path]


__all__ = [
    "dumps", "scalar_out", "scalar_in", "poly_to_json", "poly_from_json", "field_to_json", "field_from_json",
    "matrix_to_json", "matrix_from_json", "jet_to_json", "jet_from_json", "arrow_to_json", "arrow_from_json",
    "trivial_section_to_json", "trivial_section_from_json", "jet_section_to_json", "jet_section_from_json",
    "group_jet_section_to_json", "group_jet_section_from_json", "operator_to_json", "operator_from_json",
    "vector_section_to_json", "vector_section_from_json", "section_from_json", "to_json",
    "groupoid_to_json", "groupoid_from_json", "subgroupoid_from_json", "path_to_csv", "path_to_json",
]
