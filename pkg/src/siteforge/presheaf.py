"""Set-valued presheaves on a finite category.

Sections are stored as label tuples per object and the contravariant action
as index maps per morphism, so every construction here is finite and
checkable by brute force: naturality, the sheaf condition over a topology,
dense subobjects, and the refinement step that adds compatible families one
covering at a time (applied twice it produces the associated sheaf).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .fincat import FinCategory, MorId, ObjId
from .sites import GrothendieckTopology, Sieve, SieveMembers, pullback_sieve, sieves_on


@dataclass(frozen=True, eq=False)
class Presheaf:
    """A contravariant set-valued functor with tabulated action.

    ``action[m]`` maps indices of sections over ``cod(m)`` to indices of
    sections over ``dom(m)``.  Labels are arbitrary but must be unique per
    object.
    """

    cat: FinCategory
    elements: tuple[tuple[str, ...], ...]
    action: tuple[tuple[int, ...], ...]
    name: str = field(default="", compare=False)

    def size(self, o: ObjId) -> int:
        return len(self.elements[o])

    def label(self, o: ObjId, i: int) -> str:
        return self.elements[o][i]

    def index(self, o: ObjId, label: str) -> int:
        try:
            return self.elements[o].index(label)
        except ValueError:
            raise KeyError(
                f"no section labelled {label!r} over {self.cat.obj_names[o]}"
            ) from None

    def restrict(self, m: MorId, i: int) -> int:
        """Apply the action of ``m`` to section index ``i`` over ``cod(m)``."""
        return self.action[m][i]

    def total_sections(self) -> int:
        return sum(len(e) for e in self.elements)


@dataclass(frozen=True)
class PresheafViolation:
    kind: str
    witness: tuple
    detail: str


def check_presheaf(x: Presheaf) -> tuple[PresheafViolation, ...]:
    """Exhaustive functoriality check: identities and all composable pairs."""
    cat = x.cat
    bad = []
    if len(x.elements) != cat.n_objects or len(x.action) != cat.n_morphisms:
        return (PresheafViolation("NotFunctorial", (), "tables sized to the wrong category"),)
    for o in cat.objects():
        if len(set(x.elements[o])) != len(x.elements[o]):
            bad.append(PresheafViolation("NotFunctorial", (o,), "duplicate section labels"))
    for m in cat.morphisms():
        row = x.action[m]
        if len(row) != x.size(cat.cod(m)) or any(
            not (0 <= v < x.size(cat.dom(m))) for v in row
        ):
            bad.append(PresheafViolation("NotFunctorial", (m,), "action row ill-typed"))
    if bad:
        return tuple(bad)
    for o in cat.objects():
        i = cat.identity(o)
        if x.action[i] != tuple(range(x.size(o))):
            bad.append(PresheafViolation("NotFunctorial", (i,), "identity does not act trivially"))
    for f in cat.morphisms():
        for g in cat.morphisms():
            if cat.cod(f) != cat.dom(g):
                continue
            fg = cat.compose(f, g)
            for e in range(x.size(cat.cod(g))):
                if x.action[fg][e] != x.action[f][x.action[g][e]]:
                    bad.append(
                        PresheafViolation(
                            "NotFunctorial", (f, g, e), "composite acts differently than the two steps"
                        )
                    )
    return tuple(bad)


@dataclass(frozen=True, eq=False)
class PresheafMap:
    """A natural transformation given by one index map per object."""

    dom: Presheaf
    cod: Presheaf
    components: tuple[tuple[int, ...], ...]

    def at(self, o: ObjId, i: int) -> int:
        return self.components[o][i]


def check_natural(phi: PresheafMap) -> tuple[PresheafViolation, ...]:
    cat = phi.dom.cat
    bad = []
    for o in cat.objects():
        row = phi.components[o]
        if len(row) != phi.dom.size(o) or any(
            not (0 <= v < phi.cod.size(o)) for v in row
        ):
            bad.append(PresheafViolation("NotFunctorial", (o,), "component ill-typed"))
    if bad:
        return tuple(bad)
    for m in cat.morphisms():
        a, b = cat.dom(m), cat.cod(m)
        for e in range(phi.dom.size(b)):
            if phi.components[a][phi.dom.action[m][e]] != phi.cod.action[m][phi.components[b][e]]:
                bad.append(
                    PresheafViolation("NotFunctorial", (m, e), "square does not commute")
                )
    return tuple(bad)


def identity_map(x: Presheaf) -> PresheafMap:
    return PresheafMap(x, x, tuple(tuple(range(x.size(o))) for o in x.cat.objects()))


def compose_maps(f: PresheafMap, g: PresheafMap) -> PresheafMap:
    """Composite ``f`` then ``g``; requires ``f.cod`` is ``g.dom``."""
    if f.cod is not g.dom:
        raise ValueError("maps are not composable")
    comps = tuple(
        tuple(g.components[o][v] for v in f.components[o]) for o in f.dom.cat.objects()
    )
    return PresheafMap(f.dom, g.cod, comps)


def presheaf_homs(x: Presheaf, y: Presheaf) -> list[PresheafMap]:
    """Every natural transformation ``x -> y``, in lexicographic order.

    Backtracks object by object, pruning with naturality against every
    morphism whose endpoints are both decided.
    """
    cat = x.cat
    n = cat.n_objects
    relevant: list[list[MorId]] = [[] for _ in range(n)]
    for m in cat.morphisms():
        relevant[max(cat.dom(m), cat.cod(m))].append(m)
    out: list[PresheafMap] = []
    chosen: list[tuple[int, ...]] = []

    def consistent(o: ObjId) -> bool:
        for m in relevant[o]:
            a, b = cat.dom(m), cat.cod(m)
            for e in range(x.size(b)):
                if chosen[a][x.action[m][e]] != y.action[m][chosen[b][e]]:
                    return False
        return True

    def rec(o: int) -> None:
        if o == n:
            out.append(PresheafMap(x, y, tuple(chosen)))
            return
        for cand in itertools.product(range(y.size(o)), repeat=x.size(o)):
            chosen.append(cand)
            if consistent(o):
                rec(o + 1)
            chosen.pop()

    rec(0)
    return out


def are_isomorphic(x: Presheaf, y: Presheaf) -> PresheafMap | None:
    """A natural isomorphism if one exists, found by permutation search."""
    cat = x.cat
    n = cat.n_objects
    if any(x.size(o) != y.size(o) for o in cat.objects()):
        return None
    relevant: list[list[MorId]] = [[] for _ in range(n)]
    for m in cat.morphisms():
        relevant[max(cat.dom(m), cat.cod(m))].append(m)
    chosen: list[tuple[int, ...]] = []

    def consistent(o: ObjId) -> bool:
        for m in relevant[o]:
            a, b = cat.dom(m), cat.cod(m)
            for e in range(x.size(b)):
                if chosen[a][x.action[m][e]] != y.action[m][chosen[b][e]]:
                    return False
        return True

    def rec(o: int) -> PresheafMap | None:
        if o == n:
            return PresheafMap(x, y, tuple(chosen))
        for cand in itertools.permutations(range(x.size(o))):
            chosen.append(cand)
            if consistent(o):
                found = rec(o + 1)
                if found is not None:
                    return found
            chosen.pop()
        return None

    return rec(0)


def yoneda(cat: FinCategory, obj: ObjId) -> Presheaf:
    """The representable presheaf of maps into ``obj``, labelled by names."""
    cat.check_obj(obj)
    elements = tuple(
        tuple(cat.mor_names[m] for m in cat.hom(o, obj)) for o in cat.objects()
    )
    action = []
    for m in cat.morphisms():
        a, b = cat.dom(m), cat.cod(m)
        row = tuple(
            cat.hom(a, obj).index(cat.compose(m, g)) for g in cat.hom(b, obj)
        )
        action.append(row)
    return Presheaf(cat, elements, tuple(action), name=f"y({cat.obj_names[obj]})")


def yoneda_map(cat: FinCategory, f: MorId) -> PresheafMap:
    """Postcomposition with ``f`` as a map of representables."""
    a, b = cat.dom(f), cat.cod(f)
    x, y = yoneda(cat, a), yoneda(cat, b)
    comps = tuple(
        tuple(cat.hom(o, b).index(cat.compose(g, f)) for g in cat.hom(o, a))
        for o in cat.objects()
    )
    return PresheafMap(x, y, comps)


def element_map(x: Presheaf, obj: ObjId, elem: int) -> PresheafMap:
    """The map out of the representable at ``obj`` classified by a section."""
    cat = x.cat
    comps = tuple(
        tuple(x.action[g][elem] for g in cat.hom(o, obj)) for o in cat.objects()
    )
    return PresheafMap(yoneda(cat, obj), x, comps)


def terminal_presheaf(cat: FinCategory) -> Presheaf:
    return Presheaf(
        cat,
        tuple(("*",) for _ in cat.objects()),
        tuple((0,) for _ in cat.morphisms()),
        name="1",
    )


def initial_presheaf(cat: FinCategory) -> Presheaf:
    return Presheaf(cat, tuple(() for _ in cat.objects()), tuple(() for _ in cat.morphisms()), name="0")


def product_presheaf(x: Presheaf, y: Presheaf) -> tuple[Presheaf, PresheafMap, PresheafMap]:
    cat = x.cat
    pairs = [
        [(i, j) for i in range(x.size(o)) for j in range(y.size(o))] for o in cat.objects()
    ]
    elements = tuple(
        tuple(f"({x.label(o, i)},{y.label(o, j)})" for i, j in pairs[o]) for o in cat.objects()
    )
    action = tuple(
        tuple(
            pairs[cat.dom(m)].index((x.action[m][i], y.action[m][j]))
            for i, j in pairs[cat.cod(m)]
        )
        for m in cat.morphisms()
    )
    p = Presheaf(cat, elements, action, name=f"{x.name}*{y.name}")
    pr1 = PresheafMap(p, x, tuple(tuple(i for i, _ in pairs[o]) for o in cat.objects()))
    pr2 = PresheafMap(p, y, tuple(tuple(j for _, j in pairs[o]) for o in cat.objects()))
    return p, pr1, pr2


def coproduct_presheaf(x: Presheaf, y: Presheaf) -> tuple[Presheaf, PresheafMap, PresheafMap]:
    cat = x.cat
    elements = tuple(
        tuple(f"l.{lab}" for lab in x.elements[o]) + tuple(f"r.{lab}" for lab in y.elements[o])
        for o in cat.objects()
    )
    action = tuple(
        tuple(x.action[m])
        + tuple(x.size(cat.dom(m)) + v for v in y.action[m])
        for m in cat.morphisms()
    )
    s = Presheaf(cat, elements, action, name=f"{x.name}+{y.name}")
    inl = PresheafMap(x, s, tuple(tuple(range(x.size(o))) for o in cat.objects()))
    inr = PresheafMap(
        y, s, tuple(tuple(x.size(o) + j for j in range(y.size(o))) for o in cat.objects())
    )
    return s, inl, inr


def pullback_presheaf(f: PresheafMap, g: PresheafMap) -> Presheaf:
    """Elementwise pullback of two maps with the same codomain."""
    if f.cod is not g.cod:
        raise ValueError("pullback needs a common codomain")
    x, y = f.dom, g.dom
    cat = x.cat
    pairs = [
        [
            (i, j)
            for i in range(x.size(o))
            for j in range(y.size(o))
            if f.components[o][i] == g.components[o][j]
        ]
        for o in cat.objects()
    ]
    elements = tuple(
        tuple(f"({x.label(o, i)},{y.label(o, j)})" for i, j in pairs[o]) for o in cat.objects()
    )
    action = tuple(
        tuple(
            pairs[cat.dom(m)].index((x.action[m][i], y.action[m][j]))
            for i, j in pairs[cat.cod(m)]
        )
        for m in cat.morphisms()
    )
    return Presheaf(cat, elements, action, name="pb")


@dataclass(frozen=True, eq=False)
class Subpresheaf:
    """A restriction-closed selection of sections of an ambient presheaf."""

    of: Presheaf
    members: tuple[frozenset[int], ...]

    def validate(self) -> None:
        cat = self.of.cat
        for o in cat.objects():
            for i in self.members[o]:
                if not (0 <= i < self.of.size(o)):
                    raise ValueError("subpresheaf selects a missing section")
        for m in cat.morphisms():
            for i in self.members[cat.cod(m)]:
                if self.of.action[m][i] not in self.members[cat.dom(m)]:
                    raise ValueError(
                        f"selection not closed under the action of {cat.mor_names[m]}"
                    )

    def sorted_members(self, o: ObjId) -> tuple[int, ...]:
        return tuple(sorted(self.members[o]))


def sub_as_presheaf(a: Subpresheaf) -> tuple[Presheaf, PresheafMap]:
    """Materialize a subpresheaf together with its inclusion."""
    x = a.of
    cat = x.cat
    idx = [a.sorted_members(o) for o in cat.objects()]
    pos = [{i: k for k, i in enumerate(idx[o])} for o in cat.objects()]
    elements = tuple(tuple(x.label(o, i) for i in idx[o]) for o in cat.objects())
    action = tuple(
        tuple(pos[cat.dom(m)][x.action[m][i]] for i in idx[cat.cod(m)])
        for m in cat.morphisms()
    )
    sub = Presheaf(cat, elements, action, name=f"sub({x.name})")
    incl = PresheafMap(sub, x, tuple(idx))
    return sub, incl


def compose_subobjects(outer: Subpresheaf, inner: Subpresheaf) -> Subpresheaf:
    """View a subpresheaf of the materialized ``outer`` as one of its ambient."""
    sub, _ = sub_as_presheaf(outer)
    if inner.of is not sub and inner.of.elements != sub.elements:
        raise ValueError("inner subobject does not live in the outer materialization")
    cat = outer.of.cat
    members = tuple(
        frozenset(outer.sorted_members(o)[k] for k in inner.members[o]) for o in cat.objects()
    )
    return Subpresheaf(outer.of, members)


def yoneda_sieve_sub(cat: FinCategory, sieve: Sieve) -> Subpresheaf:
    """A sieve as a subobject of the representable at its target."""
    y = yoneda(cat, sieve.target)
    members = tuple(
        frozenset(
            k for k, m in enumerate(cat.hom(o, sieve.target)) if m in sieve.members
        )
        for o in cat.objects()
    )
    return Subpresheaf(y, members)


@dataclass(frozen=True)
class OmegaData:
    presheaf: Presheaf
    sieves_by_obj: tuple[tuple[SieveMembers, ...], ...]


def build_omega(cat: FinCategory, max_arrows: int = 14) -> OmegaData:
    """The presheaf of sieves, restriction given by sieve pullback."""
    lattice = tuple(sieves_on(cat, o, max_arrows) for o in cat.objects())
    order = tuple(tuple(sorted(lattice[o], key=sorted)) for o in cat.objects())
    elements = tuple(
        tuple("{" + ",".join(sorted(cat.mor_names[m] for m in s)) + "}" for s in order[o])
        for o in cat.objects()
    )
    action = []
    for m in cat.morphisms():
        a, b = cat.dom(m), cat.cod(m)
        row = tuple(
            order[a].index(pullback_sieve(cat, Sieve(b, s), m).members) for s in order[b]
        )
        action.append(row)
    return OmegaData(Presheaf(cat, elements, tuple(action), name="Omega"), order)


def j_closure_map(cat: FinCategory, topology: GrothendieckTopology, om: OmegaData) -> PresheafMap:
    """Send a sieve to its covering-closure; idempotent and natural."""
    comps = []
    for o in cat.objects():
        row = []
        for s in om.sieves_by_obj[o]:
            closed = frozenset(
                f
                for f in cat.into(o)
                if pullback_sieve(cat, Sieve(o, s), f).members
                in topology.covers(cat.dom(f))
            )
            row.append(om.sieves_by_obj[o].index(closed))
        comps.append(tuple(row))
    return PresheafMap(om.presheaf, om.presheaf, tuple(comps))


def covering_subobject(cat: FinCategory, topology: GrothendieckTopology, om: OmegaData) -> Subpresheaf:
    members = tuple(
        frozenset(
            k for k, s in enumerate(om.sieves_by_obj[o]) if s in topology.covers(o)
        )
        for o in cat.objects()
    )
    return Subpresheaf(om.presheaf, members)


@dataclass(frozen=True)
class DenseReport:
    ok: bool
    failures: tuple[tuple[ObjId, int, SieveMembers], ...]


def is_dense_mono(
    cat: FinCategory, topology: GrothendieckTopology, sub: Subpresheaf
) -> DenseReport:
    """A subobject is dense when every section lands in it over a cover."""
    x = sub.of
    failures = []
    for o in cat.objects():
        for i in range(x.size(o)):
            s = frozenset(
                f for f in cat.into(o) if x.action[f][i] in sub.members[cat.dom(f)]
            )
            if s not in topology.covers(o):
                failures.append((o, i, s))
    return DenseReport(not failures, tuple(failures))


def matching_families(
    cat: FinCategory, x: Presheaf, obj: ObjId, members: SieveMembers
) -> list[dict[MorId, int]]:
    """All families over a sieve compatible with every restriction.

    Enumerated by backtracking in ascending member order with the identity
    first, so forced values propagate; output order is deterministic.
    """
    mems = sorted(members)
    ident = cat.identity(obj)
    if ident in members:
        mems.remove(ident)
        mems.insert(0, ident)
    pos = {m: i for i, m in enumerate(mems)}
    out: list[dict[MorId, int]] = []
    assign: dict[MorId, int] = {}

    def rec(k: int) -> None:
        if k == len(mems):
            out.append(dict(assign))
            return
        m = mems[k]
        d = cat.dom(m)
        forced: int | None = None
        ok = True
        for f in mems[:k]:
            for g in cat.hom(d, cat.dom(f)):
                if cat.compose(g, f) == m:
                    v = x.action[g][assign[f]]
                    if forced is None:
                        forced = v
                    elif forced != v:
                        ok = False
        if not ok:
            return
        candidates: Sequence[int] = (
            (forced,) if forced is not None else range(x.size(d))
        )
        for v in candidates:
            assign[m] = v
            good = True
            for g in cat.into(d):
                h = cat.compose(g, m)
                if h in members and pos[h] <= k and assign[h] != x.action[g][v]:
                    good = False
                    break
            if good:
                rec(k + 1)
            del assign[m]

    rec(0)
    return out


@dataclass(frozen=True)
class SheafReport:
    separated: bool
    sheaf: bool
    separated_witness: tuple | None
    sheaf_witness: tuple | None


def sheaf_check(cat: FinCategory, topology: GrothendieckTopology, x: Presheaf) -> SheafReport:
    """Exhaustive matching-family test over every covering sieve.

    Witnesses are ``(object, sieve members, family, amalgamation count)``
    for the first failure of each flavour in the deterministic sweep.
    """
    sep_w = None
    sh_w = None
    for o in cat.objects():
        for s in sorted(topology.covers(o), key=sorted):
            for fam in matching_families(cat, x, o, s):
                glue = [
                    e
                    for e in range(x.size(o))
                    if all(x.action[f][e] == fam[f] for f in s)
                ]
                if len(glue) > 1 and sep_w is None:
                    sep_w = (o, s, tuple(sorted(fam.items())), len(glue))
                if len(glue) != 1 and sh_w is None:
                    sh_w = (o, s, tuple(sorted(fam.items())), len(glue))
        if sep_w and sh_w:
            break
    return SheafReport(sep_w is None, sh_w is None, sep_w, sh_w)


def is_separated(cat: FinCategory, topology: GrothendieckTopology, x: Presheaf) -> bool:
    return sheaf_check(cat, topology, x).separated


def is_sheaf(cat: FinCategory, topology: GrothendieckTopology, x: Presheaf) -> bool:
    return sheaf_check(cat, topology, x).sheaf


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def plus_construction(
    cat: FinCategory, topology: GrothendieckTopology, x: Presheaf
) -> tuple[Presheaf, PresheafMap]:
    """One refinement step: compatible families modulo agreement on a cover.

    Sections over C are equivalence classes of (covering sieve, matching
    family); two pairs are identified when the sieve on which they agree is
    itself covering.  Restriction pulls the sieve back and reindexes the
    family; the unit sends a section to its family of restrictions over the
    maximal sieve.
    """
    pairs_by_obj: list[list[tuple[SieveMembers, tuple[int, ...]]]] = []
    lookup: list[dict[tuple[SieveMembers, tuple[int, ...]], int]] = []
    classes_by_obj: list[list[int]] = []
    class_pos: list[dict[int, int]] = []

    for o in cat.objects():
        pairs: list[tuple[SieveMembers, tuple[int, ...]]] = []
        for s in sorted(topology.covers(o), key=sorted):
            for fam in matching_families(cat, x, o, s):
                pairs.append((s, tuple(fam[m] for m in sorted(s))))
        uf = _UnionFind(len(pairs))
        for i in range(len(pairs)):
            s1, v1 = pairs[i]
            f1 = dict(zip(sorted(s1), v1))
            for j in range(i + 1, len(pairs)):
                s2, v2 = pairs[j]
                f2 = dict(zip(sorted(s2), v2))
                agree = frozenset(m for m in s1 & s2 if f1[m] == f2[m])
                if agree in topology.covers(o):
                    uf.union(i, j)
        reps = sorted({uf.find(i) for i in range(len(pairs))})
        pairs_by_obj.append(pairs)
        lookup.append({p: uf.find(i) for i, p in enumerate(pairs)})
        classes_by_obj.append(reps)
        class_pos.append({r: k for k, r in enumerate(reps)})

    elements = tuple(
        tuple(f"c{k}" for k in range(len(classes_by_obj[o]))) for o in cat.objects()
    )
    action = []
    for m in cat.morphisms():
        a, b = cat.dom(m), cat.cod(m)
        row = []
        for rep in classes_by_obj[b]:
            s, v = pairs_by_obj[b][rep]
            vals = dict(zip(sorted(s), v))
            pulled = frozenset(g for g in cat.into(a) if cat.compose(g, m) in s)
            pv = tuple(vals[cat.compose(g, m)] for g in sorted(pulled))
            row.append(class_pos[a][lookup[a][(pulled, pv)]])
        action.append(tuple(row))
    plus = Presheaf(cat, elements, tuple(action), name=f"{x.name}+")

    comps = []
    for o in cat.objects():
        maximal = frozenset(cat.into(o))
        row = []
        for e in range(x.size(o)):
            fam = tuple(x.action[f][e] for f in sorted(maximal))
            row.append(class_pos[o][lookup[o][(maximal, fam)]])
        comps.append(tuple(row))
    unit = PresheafMap(x, plus, tuple(comps))
    return plus, unit


@dataclass(frozen=True, eq=False)
class SheafifyResult:
    sheaf: Presheaf
    unit: PresheafMap
    once: Presheaf


def sheafify(cat: FinCategory, topology: GrothendieckTopology, x: Presheaf) -> SheafifyResult:
    """Associated sheaf by applying the refinement step twice."""
    once, u1 = plus_construction(cat, topology, x)
    twice, u2 = plus_construction(cat, topology, once)
    return SheafifyResult(twice, compose_maps(u1, u2), once)


def image_factorization(phi: PresheafMap) -> tuple[Subpresheaf, PresheafMap]:
    """Objectwise image subobject and the surjection onto it."""
    cat = phi.dom.cat
    members = tuple(frozenset(phi.components[o]) for o in cat.objects())
    img = Subpresheaf(phi.cod, members)
    img.validate()
    sub, _ = sub_as_presheaf(img)
    pos = [
        {i: k for k, i in enumerate(img.sorted_members(o))} for o in cat.objects()
    ]
    onto = PresheafMap(
        phi.dom,
        sub,
        tuple(tuple(pos[o][v] for v in phi.components[o]) for o in cat.objects()),
    )
    return img, onto


def distinct_pair_witness(f: PresheafMap, g: PresheafMap) -> tuple[ObjId, int] | None:
    """Least (object, section) where two parallel maps disagree."""
    if f.dom is not g.dom or f.cod is not g.cod:
        raise ValueError("maps are not parallel")
    for o in f.dom.cat.objects():
        for e in range(f.dom.size(o)):
            if f.components[o][e] != g.components[o][e]:
                return (o, e)
    return None
