"""Finite groupoids given as explicit composition tables.

Arrows are string identifiers. ``comp[(g, h)]`` is the product ``g . h``,
defined iff ``src(g) == tgt(h)``. Cosets are the right classes ``Sigma_e . gamma``
with ``e = tgt(gamma)`` and ``Sigma_e`` the isotropy group of the subgroupoid at
``e``; the quotient multiplies classes by representatives.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidSubgroupoid, NonNormal


def _arrow_key(a: str):
    """Sort key: numeric fields compare as numbers."""
    return tuple((0, int(p), "") if p.lstrip("-").isdigit() else (1, 0, p) for p in a.split(","))


class GroupoidTable:
    __slots__ = ("arrows", "units", "src", "tgt", "comp", "inv", "_index", "_C")

    def __init__(self, arrows: Iterable[str], units: Iterable[str], src: Mapping, tgt: Mapping,
                 comp: Mapping, inv: Mapping):
        self.arrows = tuple(sorted(set(arrows), key=_arrow_key))
        self.units = tuple(sorted(set(units), key=_arrow_key))
        self.src = dict(src)
        self.tgt = dict(tgt)
        self.comp = dict(comp)
        self.inv = dict(inv)
        names = set(self.arrows)
        if not names:
            raise ValueError("a groupoid is a non-empty set")
        for what, table in (("src", self.src), ("tgt", self.tgt), ("inv", self.inv)):
            missing = names - set(table)
            if missing:
                raise ValueError(f"{what} is undefined on {sorted(missing, key=_arrow_key)[:3]}")
        if not set(self.units) <= names:
            raise ValueError("units must be arrows")
        for (g, h), gh in self.comp.items():
            if g not in names or h not in names or gh not in names:
                raise ValueError(f"composition entry ({g}, {h}) -> {gh} mentions an unknown arrow")
        self._index = {a: i for i, a in enumerate(self.arrows)}
        self._C = None

    def __len__(self):
        return len(self.arrows)

    def compose(self, g: str, h: str) -> str | None:
        return self.comp.get((g, h))

    def table(self) -> np.ndarray:
        """Composition as an index matrix with -1 where undefined."""
        if self._C is None:
            n = len(self.arrows)
            C = np.full((n, n), -1, dtype=np.int64)
            ix = self._index
            for (g, h), gh in self.comp.items():
                C[ix[g], ix[h]] = ix[gh]
            self._C = C
        return self._C

    def isotropy(self, e: str) -> list[str]:
        return [a for a in self.arrows if self.src[a] == e and self.tgt[a] == e]

    def __eq__(self, o):
        return (isinstance(o, GroupoidTable) and self.arrows == o.arrows and self.units == o.units
                and self.src == o.src and self.tgt == o.tgt and self.comp == o.comp and self.inv == o.inv)

    def __hash__(self):
        return hash((self.arrows, self.units))

    def __repr__(self):
        return f"GroupoidTable({len(self.arrows)} arrows, {len(self.units)} units)"


@dataclass(frozen=True)
class Violation:
    kind: str
    arrows: tuple
    detail: str = ""

    def __str__(self):
        return f"{self.kind}: ({', '.join(self.arrows)}) {self.detail}".rstrip()


@dataclass
class AxiomReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set:
        return {v.kind for v in self.violations}

    def __bool__(self):
        return self.ok


def check_axioms(t: GroupoidTable) -> AxiomReport:
    """Every violated axiom instance; empty iff ``t`` is a groupoid."""
    out: list[Violation] = []
    units = set(t.units)
    A = t.arrows
    for a in A:
        if t.src[a] not in units or t.tgt[a] not in units:
            out.append(Violation("endpoint-not-unit", (a,)))
    for e in t.units:
        if t.src[e] != e or t.tgt[e] != e:
            out.append(Violation("unit-endpoints", (e,), "src(e) = tgt(e) = e fails"))
    for g in A:
        for h in A:
            defined = (g, h) in t.comp
            if defined != (t.src[g] == t.tgt[h]):
                kind = "composable-undefined" if not defined else "defined-not-composable"
                out.append(Violation(kind, (g, h)))
            elif defined:
                gh = t.comp[(g, h)]
                if t.src[gh] != t.src[h] or t.tgt[gh] != t.tgt[g]:
                    out.append(Violation("composite-endpoints", (g, h, gh)))
    for g in A:
        e, f = t.src[g], t.tgt[g]
        if t.comp.get((f, g)) != g or t.comp.get((g, e)) != g:
            out.append(Violation("unit-law", (g,)))
        gi = t.inv[g]
        if t.inv.get(gi) != g:
            out.append(Violation("inverse-involution", (g, gi)))
        if t.comp.get((g, gi)) != f or t.comp.get((gi, g)) != e:
            out.append(Violation("inverse-law", (g, gi)))
    C = t.table()
    GH = C
    # biconditional: for (g,h) composable, (gh,k) composable iff (h,k) composable
    src = np.array([t._index[t.src[a]] if t.src[a] in t._index else -1 for a in A])
    tgt = np.array([t._index[t.tgt[a]] if t.tgt[a] in t._index else -1 for a in A])
    comp_ok = src[:, None] == tgt[None, :]
    for g, h in zip(*np.nonzero(GH >= 0)):
        gh = GH[g, h]
        mism = np.nonzero(comp_ok[gh, :] != comp_ok[h, :])[0]
        for k in mism:
            out.append(Violation("composability-biconditional", (A[g], A[h], A[k])))
        ks = np.nonzero((C[h, :] >= 0) & (C[gh, :] >= 0))[0]
        if ks.size == 0:
            continue
        left = C[gh, ks]
        hk = C[h, ks]
        right = C[g, hk]
        for pos in np.nonzero(left != right)[0]:
            k = ks[pos]
            out.append(Violation("associativity", (A[g], A[h], A[k]),
                                 f"(gh)k = {A[left[pos]]}, g(hk) = {A[right[pos]] if right[pos] >= 0 else 'undefined'}"))
    return AxiomReport(out)


# constructors

def pair_groupoid(points: Sequence) -> GroupoidTable:
    """Arrows ``"i,j"`` from ``j`` to ``i``; ``(i,j) . (j,k) = (i,k)``."""
    pts = [str(p) for p in points]
    arrows = [f"{i},{j}" for i in pts for j in pts]
    src = {f"{i},{j}": f"{j},{j}" for i in pts for j in pts}
    tgt = {f"{i},{j}": f"{i},{i}" for i in pts for j in pts}
    comp = {(f"{i},{j}", f"{j},{k}"): f"{i},{k}" for i in pts for j in pts for k in pts}
    inv = {f"{i},{j}": f"{j},{i}" for i in pts for j in pts}
    return GroupoidTable(arrows, [f"{i},{i}" for i in pts], src, tgt, comp, inv)


class FiniteGroup:
    """A finite group from a Cayley table ``table[a][b] = a b`` over named elements."""

    __slots__ = ("elements", "mul", "identity", "_inv")

    def __init__(self, elements: Sequence[str], table):
        self.elements = tuple(str(e) for e in elements)
        if "," in "".join(self.elements):
            raise ValueError("group element names must not contain commas")
        if isinstance(table, Mapping):
            mul = {(str(a), str(b)): str(c) for (a, b), c in table.items()}
        else:
            mul = {(a, b): str(table[i][j]) for i, a in enumerate(self.elements)
                   for j, b in enumerate(self.elements)}
        self.mul = mul
        els = set(self.elements)
        if len(mul) != len(els) ** 2 or not set(mul.values()) <= els:
            raise ValueError("Cayley table is incomplete or not closed")
        ids = [e for e in self.elements if all(mul[(e, a)] == a and mul[(a, e)] == a for a in self.elements)]
        if len(ids) != 1:
            raise ValueError("Cayley table has no identity")
        self.identity = ids[0]
        inv = {}
        for a in self.elements:
            cands = [b for b in self.elements if mul[(a, b)] == self.identity and mul[(b, a)] == self.identity]
            if not cands:
                raise ValueError(f"element {a} has no inverse")
            inv[a] = cands[0]
        self._inv = inv
        for a, b, c in itertools.product(self.elements, repeat=3):
            if mul[(mul[(a, b)], c)] != mul[(a, mul[(b, c)])]:
                raise ValueError(f"Cayley table is not associative at ({a}, {b}, {c})")

    @property
    def order(self) -> int:
        return len(self.elements)

    def __call__(self, a, b):
        return self.mul[(a, b)]

    def inverse(self, a):
        return self._inv[a]

    def element_order(self, a) -> int:
        n, x = 1, a
        while x != self.identity:
            x = self.mul[(x, a)]
            n += 1
        return n

    def closure(self, gens: Iterable[str]) -> frozenset:
        out = {self.identity}
        frontier = list(out)
        gens = list(gens)
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mul[(x, g)]
                    if y not in out:
                        out.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(out)

    def subgroups(self) -> list[frozenset]:
        """All subgroups, as joins of cyclic subgroups."""
        cyclic = {self.closure([a]) for a in self.elements}
        found = set(cyclic) | {frozenset([self.identity])}
        frontier = set(found)
        while frontier:
            nxt = set()
            for s in frontier:
                for c in cyclic:
                    if not c <= s:
                        j = self.closure(s | c)
                        if j not in found:
                            found.add(j)
                            nxt.add(j)
            frontier = nxt
        return sorted(found, key=lambda s: (len(s), sorted(s)))

    def is_normal(self, sub) -> bool:
        return all(self.mul[(self.mul[(g, n)], self._inv[g])] in sub for g in self.elements for n in sub)

    def normal_subgroups(self) -> list[frozenset]:
        return [s for s in self.subgroups() if self.is_normal(s)]


def cyclic_group(n: int) -> FiniteGroup:
    els = [str(i) for i in range(n)]
    return FiniteGroup(els, [[str((i + j) % n) for j in range(n)] for i in range(n)])


def klein_group() -> FiniteGroup:
    els = ["00", "01", "10", "11"]
    return FiniteGroup(els, [[f"{int(a[0]) ^ int(b[0])}{int(a[1]) ^ int(b[1])}" for b in els] for a in els])


def _perm_name(p) -> str:
    return "".join(str(i + 1) for i in p)


def symmetric_group(n: int = 3) -> FiniteGroup:
    """Permutations in one-line notation; ``(a b)(i) = a(b(i))``."""
    perms = list(itertools.permutations(range(n)))
    names = [_perm_name(p) for p in perms]
    table = [[_perm_name(tuple(a[b[i]] for i in range(n))) for b in perms] for a in perms]
    return FiniteGroup(names, table)


def alternating_subgroup(g: FiniteGroup) -> frozenset:
    """Even permutations of a group built by :func:`symmetric_group`."""
    def even(name):
        p = [int(c) - 1 for c in name]
        inv = sum(1 for i in range(len(p)) for j in range(i + 1, len(p)) if p[i] > p[j])
        return inv % 2 == 0
    return frozenset(e for e in g.elements if even(e))


def dihedral_group(n: int = 4) -> FiniteGroup:
    """Symmetries of the n-gon: ``r{i}`` rotations, ``s{i}`` reflections."""
    els = [f"r{i}" for i in range(n)] + [f"s{i}" for i in range(n)]

    def mul(a, b):
        ka, i = a[0], int(a[1:])
        kb, j = b[0], int(b[1:])
        if ka == "r" and kb == "r":
            return f"r{(i + j) % n}"
        if ka == "r":
            return f"s{(i + j) % n}"
        if kb == "r":
            return f"s{(i - j) % n}"
        return f"r{(i - j) % n}"
    return FiniteGroup(els, [[mul(a, b) for b in els] for a in els])


def trivial_groupoid(points: Sequence, group: FiniteGroup) -> GroupoidTable:
    """``M x H x M``: arrows ``"y,h,x"`` composing as ``(y,h,x).(x,h',x') = (y,hh',x')``."""
    pts = [str(p) for p in points]
    e = group.identity
    arrows, src, tgt, inv = [], {}, {}, {}
    for y in pts:
        for h in group.elements:
            for x in pts:
                a = f"{y},{h},{x}"
                arrows.append(a)
                src[a] = f"{x},{e},{x}"
                tgt[a] = f"{y},{e},{y}"
                inv[a] = f"{x},{group.inverse(h)},{y}"
    comp = {}
    for y in pts:
        for x in pts:
            for z in pts:
                for h in group.elements:
                    for k in group.elements:
                        comp[(f"{y},{h},{x}", f"{x},{k},{z}")] = f"{y},{group(h, k)},{z}"
    return GroupoidTable(arrows, [f"{x},{e},{x}" for x in pts], src, tgt, comp, inv)


def group_as_groupoid(group: FiniteGroup) -> GroupoidTable:
    return trivial_groupoid(["0"], group)


def disjoint_union(a: GroupoidTable, b: GroupoidTable, tags=("a", "b")) -> GroupoidTable:
    """Arrows are prefixed with ``tag:`` to keep the two tables apart."""
    def tag(t, s):
        return f"{t}:{s}"
    arrows, units, src, tgt, comp, inv = [], [], {}, {}, {}, {}
    for t, g in zip(tags, (a, b)):
        arrows += [tag(t, x) for x in g.arrows]
        units += [tag(t, x) for x in g.units]
        src.update({tag(t, x): tag(t, y) for x, y in g.src.items()})
        tgt.update({tag(t, x): tag(t, y) for x, y in g.tgt.items()})
        inv.update({tag(t, x): tag(t, y) for x, y in g.inv.items()})
        comp.update({(tag(t, x), tag(t, y)): tag(t, z) for (x, y), z in g.comp.items()})
    return GroupoidTable(arrows, units, src, tgt, comp, inv)


# subgroupoids, cosets, quotients

class SubgroupoidSpec:
    __slots__ = ("parent", "member")

    def __init__(self, parent: GroupoidTable, member: Iterable[str], validate: bool = True):
        self.parent = parent
        self.member = frozenset(member)
        if validate:
            self.validate()

    def validate(self):
        t, s = self.parent, self.member
        unknown = s - set(t.arrows)
        if unknown:
            raise InvalidSubgroupoid(f"members {sorted(unknown)[:3]} are not arrows of the groupoid")
        missing = set(t.units) - s
        if missing:
            raise InvalidSubgroupoid(
                f"units space of a sub-groupoid must coincide with that of the groupoid; missing {sorted(missing)[:3]}")
        for g in s:
            if t.inv[g] not in s:
                raise InvalidSubgroupoid(f"not closed under inverses: {g}")
        for g in s:
            for h in s:
                gh = t.comp.get((g, h))
                if gh is not None and gh not in s:
                    raise InvalidSubgroupoid(f"not closed under composition: {g} . {h} = {gh}")

    def isotropy(self, e: str) -> list[str]:
        t = self.parent
        return sorted((a for a in self.member if t.src[a] == e and t.tgt[a] == e), key=_arrow_key)

    def __contains__(self, a):
        return a in self.member


def units_subgroupoid(t: GroupoidTable) -> SubgroupoidSpec:
    return SubgroupoidSpec(t, t.units)


def product_subgroupoid(t: GroupoidTable, points: Sequence, sub: Iterable[str]) -> SubgroupoidSpec:
    """``M x N x M`` inside a table built by :func:`trivial_groupoid`."""
    pts = [str(p) for p in points]
    return SubgroupoidSpec(t, [f"{y},{h},{x}" for y in pts for h in sub for x in pts])


def _canonical(block) -> str:
    return min(block, key=_arrow_key)


def cosets(t: GroupoidTable, s: SubgroupoidSpec) -> list[tuple[str, ...]]:
    """Right classes ``Sigma_e . gamma``, each sorted, listed by least member."""
    if s.parent is not t:
        s = SubgroupoidSpec(t, s.member)
    iso = {e: s.isotropy(e) for e in t.units}
    seen, blocks = set(), []
    for g in t.arrows:
        if g in seen:
            continue
        block = tuple(sorted({t.comp[(x, g)] for x in iso[t.tgt[g]]}, key=_arrow_key))
        seen.update(block)
        blocks.append(block)
    blocks.sort(key=lambda b: _arrow_key(b[0]))
    return blocks


def left_cosets(t: GroupoidTable, s: SubgroupoidSpec) -> list[tuple[str, ...]]:
    """Left classes ``gamma . Sigma_e`` with ``e = src(gamma)``."""
    iso = {e: s.isotropy(e) for e in t.units}
    seen, blocks = set(), []
    for g in t.arrows:
        if g in seen:
            continue
        block = tuple(sorted({t.comp[(g, x)] for x in iso[t.src[g]]}, key=_arrow_key))
        seen.update(block)
        blocks.append(block)
    blocks.sort(key=lambda b: _arrow_key(b[0]))
    return blocks


def same_coset(t: GroupoidTable, s: SubgroupoidSpec, z: str, z2: str) -> bool:
    """``Z ~ Z'`` iff both share target and ``Z' . Z^-1`` lies in the subgroupoid."""
    if t.tgt[z] != t.tgt[z2]:
        return False
    p = t.comp.get((z2, t.inv[z]))
    return p is not None and p in s.member


@dataclass(frozen=True)
class NormalityResult:
    normal: bool
    witness: tuple | None = None

    def __bool__(self):
        return self.normal


def is_normal(t: GroupoidTable, s: SubgroupoidSpec) -> NormalityResult:
    """Checks ``gamma . x . gamma^-1`` in the subgroupoid for ``x`` isotropic at ``src(gamma)``."""
    iso = {e: s.isotropy(e) for e in t.units}
    for g in t.arrows:
        gi = t.inv[g]
        for x in iso[t.src[g]]:
            c = t.comp[(t.comp[(g, x)], gi)]
            if c not in s.member:
                return NormalityResult(False, (g, x))
    return NormalityResult(True)


def coset_map(blocks) -> dict:
    return {a: _canonical(b) for b in blocks for a in b}


def quotient(t: GroupoidTable, s: SubgroupoidSpec, rng=None) -> GroupoidTable:
    """Classes multiplied by representatives: ``(Sigma_e g)(Sigma_f d) = Sigma_e g d``.

    With ``rng`` set, representatives are drawn at random (the table is the same
    for a normal subgroupoid).
    """
    res = is_normal(t, s)
    if not res:
        g, x = res.witness
        raise NonNormal(
            f"non-normal subgroupoid: conjugate of isotropic {x} by {g} leaves the subgroupoid "
            "(class product would depend on representatives)", res.witness)
    blocks = cosets(t, s)
    cls = coset_map(blocks)
    byname = {_canonical(b): b for b in blocks}
    names = list(byname)
    src = {c: cls[t.src[c]] for c in names}
    tgt = {c: cls[t.tgt[c]] for c in names}
    units = sorted({cls[e] for e in t.units}, key=_arrow_key)
    comp = {}
    for a in names:
        for b in names:
            if src[a] != tgt[b]:
                continue
            ra = byname[a][rng.integers(len(byname[a]))] if rng is not None else a
            rb = byname[b][rng.integers(len(byname[b]))] if rng is not None else b
            comp[(a, b)] = cls[t.comp[(ra, rb)]]
    inv = {c: cls[t.inv[c]] for c in names}
    return GroupoidTable(names, units, src, tgt, comp, inv)


def projection_is_morphism(t: GroupoidTable, s: SubgroupoidSpec, qt: GroupoidTable) -> bool:
    """``gamma -> [Sigma gamma]`` preserves composition wherever defined."""
    cls = coset_map(cosets(t, s))
    return all(qt.comp.get((cls[g], cls[h])) == cls[gh] for (g, h), gh in t.comp.items())


# local triviality

def _isotropy_group(t: GroupoidTable, e: str) -> FiniteGroup:
    els = t.isotropy(e)
    return FiniteGroup([a.replace(",", ";") for a in els],
                       [[t.comp[(a, b)].replace(",", ";") for b in els] for a in els])


def groups_isomorphic(g: FiniteGroup, h: FiniteGroup) -> bool:
    """Brute-force search over images of a generating set."""
    if g.order != h.order:
        return False
    if sorted(g.element_order(a) for a in g.elements) != sorted(h.element_order(a) for a in h.elements):
        return False
    gens, span = [], frozenset([g.identity])
    for a in sorted(g.elements, key=lambda a: -g.element_order(a)):
        if a not in span:
            gens.append(a)
            span = g.closure(gens)
    by_order: dict = {}
    for b in h.elements:
        by_order.setdefault(h.element_order(b), []).append(b)
    for images in itertools.product(*(by_order.get(g.element_order(a), []) for a in gens)):
        phi = {g.identity: h.identity}
        frontier, ok = [g.identity], True
        while frontier and ok:
            nxt = []
            for x in frontier:
                for s, im in zip(gens, images):
                    y, val = g(x, s), h(phi[x], im)
                    if y in phi:
                        if phi[y] != val:
                            ok = False
                            break
                    else:
                        phi[y] = val
                        nxt.append(y)
                if not ok:
                    break
            frontier = nxt
        if ok and len(set(phi.values())) == g.order:
            return True
    return False


@dataclass
class ComponentReport:
    units: tuple
    transitive: bool
    isotropy_order: int
    isotropy_isomorphic: bool | str
    simply_transitive: bool


@dataclass
class TrivialityReport:
    components: list

    @property
    def locally_trivial(self) -> bool:
        return all(c.transitive and c.isotropy_isomorphic is True and c.simply_transitive
                   for c in self.components)


def local_triviality_checks(t: GroupoidTable, max_order: int = 24) -> TrivialityReport:
    parent = {e: e for e in t.units}

    def find(e):
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e
    for a in t.arrows:
        ra, rb = find(t.src[a]), find(t.tgt[a])
        if ra != rb:
            parent[ra] = rb
    comps: dict = {}
    for e in t.units:
        comps.setdefault(find(e), []).append(e)
    hom: dict = {}
    for a in t.arrows:
        hom.setdefault((t.tgt[a], t.src[a]), []).append(a)
    reports = []
    for members in sorted(comps.values(), key=lambda m: _arrow_key(m[0])):
        members = tuple(sorted(members, key=_arrow_key))
        transitive = all((f, e) in hom for e in members for f in members)
        groups = [_isotropy_group(t, e) for e in members]
        order = groups[0].order
        if order > max_order:
            iso: bool | str = "unchecked"
        else:
            iso = all(groups_isomorphic(groups[0], g) for g in groups[1:])
        simple = True
        for e in members:
            ge = t.isotropy(e)
            for f in members:
                fibre = hom.get((f, e), [])
                if not fibre:
                    continue
                a = fibre[0]
                orbit = {t.comp[(a, x)] for x in ge}
                if len(orbit) != len(ge) or orbit != set(fibre):
                    simple = False
        reports.append(ComponentReport(members, transitive, order, iso, simple))
    return TrivialityReport(reports)


__all__ = [
    "GroupoidTable", "Violation", "AxiomReport", "check_axioms", "pair_groupoid", "FiniteGroup",
    "cyclic_group", "klein_group", "symmetric_group", "alternating_subgroup", "dihedral_group",
    "trivial_groupoid", "group_as_groupoid", "disjoint_union", "SubgroupoidSpec", "units_subgroupoid",
    "product_subgroupoid", "cosets", "left_cosets", "same_coset", "NormalityResult", "is_normal",
    "coset_map", "quotient", "projection_is_morphism", "groups_isomorphic", "ComponentReport",
    "TrivialityReport", "local_triviality_checks",
]
