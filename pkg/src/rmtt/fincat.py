"""Finite categories with explicit composition tables.

A category here is pure data: object ids, arrow ids with endpoints, an
identity arrow per object and a total composition table on composable
pairs.  Everything downstream (presheaves, models, the classifier) sits
on top of exhaustive searches over this data, so all laws are decidable
and `validate_category` checks them outright instead of trusting the
constructor.

Composition convention: ``compose[(f, g)]`` is ``f after g`` and is
defined exactly when ``src(f) == tgt(g)``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Issue:
    """One violated law or structural defect, with the witnessing ids."""

    kind: str  # "structural" or "law"
    message: str
    witnesses: tuple = ()


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self) -> bool:
        return self.ok

    def structural(self):
        return [i for i in self.issues if i.kind == "structural"]

    def laws(self):
        return [i for i in self.issues if i.kind == "law"]


class FiniteCategory:
    """objects + arrows + identities + total composition table.

    Values are immutable after construction; helper tables are built
    eagerly.  Construction does not validate: run `validate_category`.
    """

    def __init__(self, objects, arrows, identities, compose):
        self.objects = tuple(objects)
        self.arrows = tuple((a, s, t) for (a, s, t) in arrows)
        self.identities = dict(identities)
        self.compose = dict(compose)
        self.src = {a: s for (a, s, t) in self.arrows}
        self.tgt = {a: t for (a, s, t) in self.arrows}
        self.arrow_ids = tuple(a for (a, _, _) in self.arrows)
        self._obj_index = {o: i for i, o in enumerate(self.objects)}
        self._arr_index = {a: i for i, a in enumerate(self.arrow_ids)}
        self._hom = {}
        for (a, s, t) in self.arrows:
            self._hom.setdefault((s, t), []).append(a)

    # -- basic lookups -------------------------------------------------

    def hom(self, a, b):
        return tuple(self._hom.get((a, b), ()))

    def id_of(self, obj):
        return self.identities[obj]

    def comp(self, f, g):
        """f after g; raises KeyError on non-composable pairs."""
        return self.compose[(f, g)]

    def obj_index(self, o):
        return self._obj_index[o]

    def arr_index(self, a):
        return self._arr_index[a]

    def arrows_into(self, obj):
        return tuple(a for a in self.arrow_ids if self.tgt[a] == obj)

    def is_identity(self, f):
        return self.identities.get(self.src.get(f)) == f

    # -- equality and serialization -------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, FiniteCategory)
            and self.objects == other.objects
            and self.arrows == other.arrows
            and self.identities == other.identities
            and self.compose == other.compose
        )

    def __hash__(self):
        return hash((self.objects, self.arrows))

    def to_json(self) -> dict:
        return {
            "objects": list(self.objects),
            "arrows": [{"id": a, "src": s, "tgt": t} for (a, s, t) in self.arrows],
            "identities": {str(o): i for o, i in sorted(self.identities.items(), key=lambda kv: str(kv[0]))},
            "compose": sorted(
                ([f, g, h] for (f, g), h in self.compose.items()),
                key=lambda fgh: (str(fgh[0]), str(fgh[1])),
            ),
        }

    @staticmethod
    def from_json(doc: dict) -> "FiniteCategory":
        return FiniteCategory(
            doc["objects"],
            [(a["id"], a["src"], a["tgt"]) for a in doc["arrows"]],
            dict(doc["identities"].items()),
            {(f, g): h for f, g, h in doc["compose"]},
        )

    def content_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def validate_category(cat: FiniteCategory) -> ValidationReport:
    """Check structure (well-formed ids, total composition) and laws.

    Structural defects are reported separately from law violations; law
    checks only run on data they can evaluate.
    """
    issues = []
    objs = set(cat.objects)
    if len(objs) != len(cat.objects):
        issues.append(Issue("structural", "duplicate object ids"))
    seen = set()
    for (a, s, t) in cat.arrows:
        if a in seen:
            issues.append(Issue("structural", "duplicate arrow id", (a,)))
        seen.add(a)
        if s not in objs:
            issues.append(Issue("structural", "dangling source", (a, s)))
        if t not in objs:
            issues.append(Issue("structural", "dangling target", (a, t)))
    for o in cat.objects:
        i = cat.identities.get(o)
        if i is None or i not in cat.src:
            issues.append(Issue("structural", "missing identity arrow", (o,)))
        elif not (cat.src[i] == o and cat.tgt[i] == o):
            issues.append(Issue("structural", "identity with wrong endpoints", (o, i)))
    arrows = [a for a in cat.arrow_ids if cat.src[a] in objs and cat.tgt[a] in objs]
    arrset = set(arrows)
    for f in arrows:
        for g in arrows:
            composable = cat.src[f] == cat.tgt[g]
            h = cat.compose.get((f, g))
            if composable and h is None:
                issues.append(Issue("structural", "composable pair without composite", (f, g)))
            elif not composable and (f, g) in cat.compose:
                issues.append(Issue("structural", "composite on non-composable pair", (f, g)))
            elif composable:
                if h not in arrset:
                    issues.append(Issue("structural", "composite is not an arrow", (f, g, h)))
                elif not (cat.src[h] == cat.src[g] and cat.tgt[h] == cat.tgt[f]):
                    issues.append(Issue("structural", "composite with wrong endpoints", (f, g, h)))
    if any(i.kind == "structural" for i in issues):
        return ValidationReport(tuple(issues))

    for f in arrows:
        if cat.compose[(f, cat.identities[cat.src[f]])] != f:
            issues.append(Issue("law", "right identity law fails", (f,)))
        if cat.compose[(cat.identities[cat.tgt[f]], f)] != f:
            issues.append(Issue("law", "left identity law fails", (f,)))
    for f in arrows:
        for g in arrows:
            if cat.src[f] != cat.tgt[g]:
                continue
            for h in arrows:
                if cat.src[g] != cat.tgt[h]:
                    continue
                if cat.compose[(cat.compose[(f, g)], h)] != cat.compose[(f, cat.compose[(g, h)])]:
                    issues.append(Issue("law", "associativity fails", (f, g, h)))
    return ValidationReport(tuple(issues))


def find_terminal(cat: FiniteCategory):
    """Least-index object receiving exactly one arrow from every object."""
    for t in cat.objects:
        if all(len(cat.hom(x, t)) == 1 for x in cat.objects):
            return t
    return None


def hom_set(cat: FiniteCategory, a, b):
    """All arrows a -> b in declared arrow order."""
    return list(cat.hom(a, b))


def is_pullback_cone(cat: FiniteCategory, f, g, apex, pf, pg) -> bool:
    """Exhaustively verify that (apex, pf, pg) is universal for the cospan (f, g)."""
    if cat.comp(f, pf) != cat.comp(g, pg):
        return False
    for q in cat.objects:
        for qf in cat.hom(q, cat.src[f]):
            for qg in cat.hom(q, cat.src[g]):
                if cat.comp(f, qf) != cat.comp(g, qg):
                    continue
                mediators = [
                    u
                    for u in cat.hom(q, apex)
                    if cat.comp(pf, u) == qf and cat.comp(pg, u) == qg
                ]
                if len(mediators) != 1:
                    return False
    return True


def pullback_in_base(cat: FiniteCategory, f, g):
    """First universal cone (apex, pf, pg) for the cospan f, g, or None.

    pf : apex -> src(f) and pg : apex -> src(g).  Deterministic: objects
    and arrows are scanned in declared order, so repeated runs agree.
    """
    if cat.tgt[f] != cat.tgt[g]:
        raise ValueError("pullback_in_base: arrows must share their target")
    for apex in cat.objects:
        for pf in cat.hom(apex, cat.src[f]):
            for pg in cat.hom(apex, cat.src[g]):
                if is_pullback_cone(cat, f, g, apex, pf, pg):
                    return (apex, pf, pg)
    return None


@dataclass(frozen=True)
class FunctorData:
    """Carrier for a functor between finite categories: two id maps."""

    object_map: dict = field(default_factory=dict)
    arrow_map: dict = field(default_factory=dict)

    def on_obj(self, o):
        return self.object_map[o]

    def on_arr(self, a):
        return self.arrow_map[a]


def validate_functor(src: FiniteCategory, tgt: FiniteCategory, fun: FunctorData) -> ValidationReport:
    issues = []
    for o in src.objects:
        if fun.object_map.get(o) not in set(tgt.objects):
            issues.append(Issue("structural", "object without image", (o,)))
    for a in src.arrow_ids:
        fa = fun.arrow_map.get(a)
        if fa not in tgt.src:
            issues.append(Issue("structural", "arrow without image", (a,)))
    if issues:
        return ValidationReport(tuple(issues))
    for a in src.arrow_ids:
        fa = fun.arrow_map[a]
        if tgt.src[fa] != fun.object_map[src.src[a]] or tgt.tgt[fa] != fun.object_map[src.tgt[a]]:
            issues.append(Issue("law", "endpoints not preserved", (a,)))
    for o in src.objects:
        if fun.arrow_map[src.id_of(o)] != tgt.id_of(fun.object_map[o]):
            issues.append(Issue("law", "identity not preserved", (o,)))
    if issues:
        return ValidationReport(tuple(issues))
    for (f, g), h in src.compose.items():
        if tgt.compose.get((fun.arrow_map[f], fun.arrow_map[g])) != fun.arrow_map[h]:
            issues.append(Issue("law", "composition not preserved", (f, g)))
    return ValidationReport(tuple(issues))


def identity_functor(cat: FiniteCategory) -> FunctorData:
    return FunctorData({o: o for o in cat.objects}, {a: a for a in cat.arrow_ids})


def full_subcategory(cat: FiniteCategory, objects) -> FiniteCategory:
    """Full subcategory on the given objects, in their original order."""
    keep = [o for o in cat.objects if o in set(objects)]
    keepset = set(keep)
    arrows = [(a, s, t) for (a, s, t) in cat.arrows if s in keepset and t in keepset]
    arrids = {a for (a, _, _) in arrows}
    compose = {
        (f, g): h for (f, g), h in cat.compose.items() if f in arrids and g in arrids
    }
    identities = {o: cat.identities[o] for o in keep}
    return FiniteCategory(keep, arrows, identities, compose)


# -- stock categories used all over the tests and the corpus -----------


def terminal_category() -> FiniteCategory:
    return FiniteCategory(["*"], [("id*", "*", "*")], {"*": "id*"}, {("id*", "id*"): "id*"})


def delta1() -> FiniteCategory:
    """The free category on one arrow u : 0 -> 1."""
    return FiniteCategory(
        ["0", "1"],
        [("id0", "0", "0"), ("id1", "1", "1"), ("u", "0", "1")],
        {"0": "id0", "1": "id1"},
        {
            ("id0", "id0"): "id0",
            ("id1", "id1"): "id1",
            ("u", "id0"): "u",
            ("id1", "u"): "u",
        },
    )


def chain_poset(n: int) -> FiniteCategory:
    """The poset 0 < 1 < ... < n as a category (n+1 objects)."""
    objects = [str(i) for i in range(n + 1)]
    arrows = []
    identities = {}
    for i in range(n + 1):
        identities[str(i)] = f"id{i}"
    for i in range(n + 1):
        for j in range(i, n + 1):
            aid = f"id{i}" if i == j else f"a{i}{j}"
            arrows.append((aid, str(i), str(j)))
    name = {}
    for (a, s, t) in arrows:
        name[(s, t)] = a
    compose = {}
    for (f, fs, ft) in arrows:
        for (g, gs, gt) in arrows:
            if fs == gt:
                compose[(f, g)] = name[(gs, ft)]
    return FiniteCategory(objects, arrows, identities, compose)


def discrete_category(n: int) -> FiniteCategory:
    objects = [str(i) for i in range(n)]
    arrows = [(f"id{i}", str(i), str(i)) for i in range(n)]
    identities = {str(i): f"id{i}" for i in range(n)}
    compose = {(f"id{i}", f"id{i}"): f"id{i}" for i in range(n)}
    return FiniteCategory(objects, arrows, identities, compose)
