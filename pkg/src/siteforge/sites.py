"""Sieves, covering structure, and warps on a finite category.

A sieve on C is a set of morphisms into C closed under precomposition.  A
covering assignment (one set of sieves per object) is a Grothendieck
topology when it contains the maximal sieves, is stable under pullback and
satisfies the local character axiom.  ``saturate`` produces the least such
assignment containing the sieves generated by a warp: a chosen family of
presieves per object, kept in presentation order.

Cotrees are rooted trees of morphisms used to certify that a covering sieve
is reachable from warp presieves by iterated refinement; their
multicomposites collapse a tree back into a single presieve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .fincat import FinCategory, MorId, NotFound, ObjId

SieveMembers = frozenset[MorId]


class SizeBudgetExceeded(Exception):
    """A search or construction outgrew its configured budget."""


class DepthExceeded(Exception):
    """A cotree search hit its depth bound before reaching a verdict."""


@dataclass(frozen=True)
class Presieve:
    """A finite set of morphisms with a common codomain, not closed."""

    target: ObjId
    members: SieveMembers

    def validate(self, cat: FinCategory) -> None:
        for m in self.members:
            if cat.cod(m) != self.target:
                raise ValueError(
                    f"presieve member {cat.mor_names[m]} does not land in "
                    f"{cat.obj_names[self.target]}"
                )


@dataclass(frozen=True)
class Sieve:
    target: ObjId
    members: SieveMembers


def maximal_sieve(cat: FinCategory, obj: ObjId) -> Sieve:
    return Sieve(obj, frozenset(cat.into(obj)))


def is_sieve(cat: FinCategory, obj: ObjId, members: SieveMembers) -> bool:
    for m in members:
        if cat.cod(m) != obj:
            return False
        for g in cat.into(cat.dom(m)):
            if cat.compose(g, m) not in members:
                return False
    return True


def sieve_generated(cat: FinCategory, presieve: Presieve) -> Sieve:
    """Precomposition closure of a presieve."""
    out: set[MorId] = set()
    for f in presieve.members:
        for g in cat.into(cat.dom(f)):
            out.add(cat.compose(g, f))
    return Sieve(presieve.target, frozenset(out))


def pullback_sieve(cat: FinCategory, sieve: Sieve, h: MorId) -> Sieve:
    """Restriction of a sieve along ``h``: all g with ``g;h`` in the sieve."""
    if cat.cod(h) != sieve.target:
        raise ValueError("cannot pull a sieve back along a morphism into a different object")
    d = cat.dom(h)
    return Sieve(d, frozenset(g for g in cat.into(d) if cat.compose(g, h) in sieve.members))


def _pull_members(cat: FinCategory, members: SieveMembers, h: MorId) -> SieveMembers:
    d = cat.dom(h)
    return frozenset(g for g in cat.into(d) if cat.compose(g, h) in members)


def sieves_on(cat: FinCategory, obj: ObjId, max_arrows: int = 14) -> tuple[SieveMembers, ...]:
    """Every sieve on ``obj``, enumerated as precomposition-closed subsets.

    The lattice is found by filtering all subsets of the arrows into ``obj``
    with a per-arrow closure mask, so the arrow count is budgeted.
    """
    arrows = cat.into(obj)
    k = len(arrows)
    if k > max_arrows:
        raise SizeBudgetExceeded(
            f"{k} arrows into {cat.obj_names[obj]} exceeds the sieve lattice budget"
        )
    pos = {m: i for i, m in enumerate(arrows)}
    closure_mask = []
    for m in arrows:
        mask = 0
        for g in cat.into(cat.dom(m)):
            mask |= 1 << pos[cat.compose(g, m)]
        closure_mask.append(mask)
    out = []
    for bits in range(1 << k):
        need = 0
        for i in range(k):
            if bits >> i & 1:
                need |= closure_mask[i]
        if need & ~bits == 0:
            out.append(frozenset(arrows[i] for i in range(k) if bits >> i & 1))
    return tuple(out)


@dataclass(frozen=True)
class Warp:
    """An ordered family of presieves per object; order follows the input."""

    presieves: tuple[tuple[Presieve, ...], ...]

    @staticmethod
    def from_members(
        cat_or_n: FinCategory | int, per_object: Mapping[ObjId, Sequence[Iterable[MorId]]]
    ) -> Warp:
        n = cat_or_n if isinstance(cat_or_n, int) else cat_or_n.n_objects
        rows = []
        for o in range(n):
            rows.append(
                tuple(Presieve(o, frozenset(ms)) for ms in per_object.get(o, ()))
            )
        return Warp(tuple(rows))

    def at(self, obj: ObjId) -> tuple[Presieve, ...]:
        return self.presieves[obj]

    def validate(self, cat: FinCategory) -> None:
        if len(self.presieves) != cat.n_objects:
            raise ValueError("warp rows do not match the object count")
        for row in self.presieves:
            for p in row:
                p.validate(cat)


@dataclass(frozen=True)
class GrothendieckTopology:
    """Covering sieves per object, stored as canonical frozensets."""

    covering: tuple[frozenset[SieveMembers], ...]

    def covers(self, obj: ObjId) -> frozenset[SieveMembers]:
        return self.covering[obj]

    def is_covering(self, obj: ObjId, members: SieveMembers) -> bool:
        return members in self.covering[obj]

    def counts(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.covering)


def saturate(cat: FinCategory, warp: Warp) -> GrothendieckTopology:
    """Least Grothendieck topology whose covers include the warp's sieves.

    Fixpoint iteration over the finite sieve lattices: seed with maximal
    sieves and the closures of warp presieves, then alternately close under
    pullback stability and local character until nothing is added.  The
    axioms are closure conditions, so the fixpoint is the least topology
    regardless of iteration order.
    """
    warp.validate(cat)
    lattice = [sieves_on(cat, o) for o in cat.objects()]
    J: list[set[SieveMembers]] = [set() for _ in cat.objects()]
    for o in cat.objects():
        J[o].add(frozenset(cat.into(o)))
        for p in warp.at(o):
            J[o].add(sieve_generated(cat, p).members)

    pulled: dict[tuple[SieveMembers, MorId], SieveMembers] = {}

    def pull(members: SieveMembers, h: MorId) -> SieveMembers:
        key = (members, h)
        if key not in pulled:
            pulled[key] = _pull_members(cat, members, h)
        return pulled[key]

    changed = True
    while changed:
        changed = False
        for o in cat.objects():
            for s in list(J[o]):
                for h in cat.into(o):
                    t = pull(s, h)
                    d = cat.dom(h)
                    if t not in J[d]:
                        J[d].add(t)
                        changed = True
        for o in cat.objects():
            for r in lattice[o]:
                if r in J[o]:
                    continue
                if any(
                    all(pull(r, h) in J[cat.dom(h)] for h in s) for s in J[o]
                ):
                    J[o].add(r)
                    changed = True
    return GrothendieckTopology(tuple(frozenset(j) for j in J))


@dataclass(frozen=True)
class Site:
    """A finite category with a warp and its saturated topology."""

    cat: FinCategory
    warp: Warp
    topology: GrothendieckTopology

    @classmethod
    def saturated(cls, cat: FinCategory, warp: Warp) -> Site:
        return cls(cat, warp, saturate(cat, warp))


@dataclass(frozen=True)
class Cotree:
    """A rooted refinement tree.

    ``branches`` is None at an unexpanded leaf; otherwise one branch per
    member of the chosen presieve, each edge pointing child-to-parent.  An
    expanded node with no branches records a refinement by the empty
    presieve, which is where empty covers enter.
    """

    root: ObjId
    branches: tuple[tuple[MorId, Cotree], ...] | None = None

    def validate(self, cat: FinCategory) -> None:
        if self.branches is None:
            return
        for f, child in self.branches:
            if cat.cod(f) != self.root or cat.dom(f) != child.root:
                raise ValueError("cotree edge endpoints do not match its nodes")
            child.validate(cat)

    def height(self) -> int:
        if self.branches is None:
            return 0
        return 1 + max((c.height() for _, c in self.branches), default=0)


def multicomposite(cat: FinCategory, tree: Cotree) -> Presieve:
    """Presieve of root-to-leaf composites; an unexpanded leaf yields its identity."""
    if tree.branches is None:
        return Presieve(tree.root, frozenset({cat.identity(tree.root)}))
    out: set[MorId] = set()
    for f, child in tree.branches:
        for g in multicomposite(cat, child).members:
            out.add(cat.compose(g, f))
    return Presieve(tree.root, frozenset(out))


def _find_cotree(
    cat: FinCategory,
    warp: Warp,
    obj: ObjId,
    target: SieveMembers,
    budget: int,
    memo: dict,
) -> Cotree | None:
    key = (obj, target, budget)
    if key in memo:
        return memo[key]
    result: Cotree | None = None
    if cat.identity(obj) in target:
        result = Cotree(obj)
    else:
        for p in warp.at(obj):
            if budget == 0:
                break
            branches = []
            for f in sorted(p.members):
                child = _find_cotree(
                    cat, warp, cat.dom(f), _pull_members(cat, target, f), budget - 1, memo
                )
                if child is None:
                    branches = None
                    break
                branches.append((f, child))
            if branches is not None:
                result = Cotree(obj, tuple(branches))
                break
    memo[key] = result
    return result


@dataclass(frozen=True)
class WarpReport:
    """Outcome of the two warp conditions against a topology.

    ``verdict`` is ``"fail"`` on any definite stability failure,
    ``"undecided"`` when some covering sieve found no cotree within the
    depth bound, and ``"pass"`` otherwise.  Witness cotrees certify every
    decided covering sieve.
    """

    verdict: str
    stability_failures: tuple[tuple[ObjId, int, MorId], ...]
    witnesses: tuple[tuple[ObjId, SieveMembers, Cotree], ...]
    undecided: tuple[tuple[ObjId, SieveMembers], ...]


def is_warp(
    cat: FinCategory, topology: GrothendieckTopology, warp: Warp, depth: int = 4
) -> WarpReport:
    """Check the warp conditions for ``warp`` against ``topology``.

    Condition one: the pullback of each generated sieve contains some
    presieve of the warp at the pulled-back object.  Condition two: every
    covering sieve contains the multicomposite of some warp cotree; searched
    to ``depth``, with unresolved sieves reported as undecided rather than
    failed.
    """
    warp.validate(cat)
    stability = []
    for o in cat.objects():
        for idx, p in enumerate(warp.at(o)):
            gen = sieve_generated(cat, p)
            for h in cat.into(o):
                pulled = _pull_members(cat, gen.members, h)
                d = cat.dom(h)
                if not any(q.members <= pulled for q in warp.at(d)):
                    stability.append((o, idx, h))

    memo: dict = {}
    witnesses = []
    undecided = []
    for o in cat.objects():
        for s in sorted(topology.covers(o), key=sorted):
            tree = _find_cotree(cat, warp, o, s, depth, memo)
            if tree is None:
                undecided.append((o, s))
            else:
                witnesses.append((o, s, tree))

    if stability:
        verdict = "fail"
    elif undecided:
        verdict = "undecided"
    else:
        verdict = "pass"
    return WarpReport(verdict, tuple(stability), tuple(witnesses), tuple(undecided))


@dataclass(frozen=True)
class WovenReport:
    warp_report: WarpReport
    presieve_counts: tuple[int, ...]

    @property
    def verdict(self) -> str:
        return self.warp_report.verdict


def is_woven(
    cat: FinCategory, topology: GrothendieckTopology, warp: Warp, depth: int = 4
) -> WovenReport:
    """Warp check plus the per-object presieve counts that witness weaving."""
    report = is_warp(cat, topology, warp, depth)
    return WovenReport(report, tuple(len(warp.at(o)) for o in cat.objects()))


@dataclass(frozen=True)
class ClosureResult:
    """A site extension in which the collected cospans acquire pullbacks."""

    site: Site
    obj_embedding: tuple[ObjId, ...]
    mor_embedding: tuple[MorId, ...]
    new_object_cards: tuple[tuple[int, ...], ...]


def close_under_pullbacks(
    cat: FinCategory,
    warp: Warp,
    depth: int = 2,
    max_objects: int = 24,
    max_maps: int = 4096,
) -> ClosureResult:
    """Freely adjoin pullbacks of cospans as set-valued objects.

    Objects of the extension are contravariant set-valued functors on the
    original category: the representables, plus elementwise pullbacks of
    cospans between previously collected objects, repeated ``depth`` times
    and deduplicated up to natural isomorphism.  Morphisms of the extension
    are all natural transformations.  The warp is carried over and each
    object additionally receives the presieve of every map out of a
    representable.
    """
    from . import presheaf as ps

    objects = [ps.yoneda(cat, o) for o in cat.objects()]
    names = list(cat.obj_names)

    def iso_to_existing(cand) -> int | None:
        for i, x in enumerate(objects):
            if ps.are_isomorphic(x, cand):
                return i
        return None

    for _round in range(depth):
        snapshot = list(objects)
        maps_to: list[list] = []
        for z in snapshot:
            maps_to.append([(i, f) for i, x in enumerate(snapshot) for f in ps.presheaf_homs(x, z)])
            if sum(len(ms) for ms in maps_to) > max_maps:
                raise SizeBudgetExceeded("too many natural transformations to enumerate")
        added = False
        for zi in range(len(snapshot)):
            for ai, (xi, f) in enumerate(maps_to[zi]):
                for bi, (yi, g) in enumerate(maps_to[zi]):
                    cand = ps.pullback_presheaf(f, g)
                    if iso_to_existing(cand) is None:
                        objects.append(cand)
                        names.append(f"P{len(objects) - len(cat.obj_names) - 1}")
                        added = True
                        if len(objects) > max_objects:
                            raise SizeBudgetExceeded("pullback closure exceeded the object budget")
        if not added:
            break

    # Assemble the extension as a concrete category of transformations.
    arrows: list[tuple[int, int, tuple]] = []
    per_pair: dict[tuple[int, int], dict[tuple, int]] = {}
    for i, x in enumerate(objects):
        for j, y in enumerate(objects):
            lookup = {}
            for t in ps.presheaf_homs(x, y):
                lookup[t.components] = len(arrows)
                arrows.append((i, j, t.components))
            per_pair[(i, j)] = lookup
            if len(arrows) > max_maps:
                raise SizeBudgetExceeded("pullback closure exceeded the morphism budget")

    mor_names = [f"t{i}_{j}_{k}" for k, (i, j, _) in enumerate(arrows)]
    mor_dom = [i for i, _, _ in arrows]
    mor_cod = [j for _, j, _ in arrows]
    identity_of = []
    for i, x in enumerate(objects):
        ident = tuple(tuple(range(x.size(o))) for o in cat.objects())
        identity_of.append(per_pair[(i, i)][ident])
    table = {}
    for a, (i, j, comp_a) in enumerate(arrows):
        for b, (j2, k, comp_b) in enumerate(arrows):
            if j != j2:
                continue
            composed = tuple(
                tuple(comp_b[o][comp_a[o][e]] for e in range(objects[i].size(o)))
                for o in cat.objects()
            )
            table[(a, b)] = per_pair[(i, k)][composed]
    big = FinCategory(
        obj_names=tuple(names),
        mor_names=tuple(mor_names),
        mor_dom=tuple(mor_dom),
        mor_cod=tuple(mor_cod),
        identity_of=tuple(identity_of),
        table=table,
    )

    mor_embedding = []
    for f in cat.morphisms():
        i, j = cat.dom(f), cat.cod(f)
        comps = tuple(
            tuple(
                cat.hom(o, j).index(cat.compose(g, f))
                for g in cat.hom(o, i)
            )
            for o in cat.objects()
        )
        mor_embedding.append(per_pair[(i, j)][comps])

    rep_count = cat.n_objects
    per_object: dict[int, list[list[int]]] = {}
    for o in cat.objects():
        per_object[o] = [
            sorted(mor_embedding[f] for f in p.members) for p in warp.at(o)
        ]
    for i in range(len(objects)):
        extra = [
            m
            for m in big.morphisms()
            if big.mor_cod[m] == i and big.mor_dom[m] < rep_count
        ]
        per_object.setdefault(i, []).append(sorted(extra))
    new_warp = Warp.from_members(len(objects), per_object)

    cards = tuple(
        tuple(x.size(o) for o in cat.objects()) for x in objects[rep_count:]
    )
    return ClosureResult(
        site=Site.saturated(big, new_warp),
        obj_embedding=tuple(range(rep_count)),
        mor_embedding=tuple(mor_embedding),
        new_object_cards=cards,
    )


@dataclass(frozen=True)
class CoamalgViolation:
    kind: str
    detail: str
    witness: tuple


@dataclass(frozen=True)
class CoamalgReport:
    ok: bool
    violations: tuple[CoamalgViolation, ...]


@dataclass(frozen=True)
class CoamalgamationData:
    """A choice of completing square for every cospan (or span).

    For orientation ``"cospan"`` the entry for ``(f: A->T, g: B->T)`` is an
    apex W with legs ``W->A`` and ``W->B`` making the square commute, plus a
    morphism of apexes for every morphism of cospans.  Orientation
    ``"span"`` is dual: apexes receive the legs.  ``on_mor`` maps a
    component triple (left, middle, right) between two keys to the apex
    morphism; absent or None entries are reported as functoriality failures.
    """

    orientation: str
    apex: Mapping[tuple[MorId, MorId], ObjId]
    left_leg: Mapping[tuple[MorId, MorId], MorId]
    right_leg: Mapping[tuple[MorId, MorId], MorId]
    on_mor: Mapping[
        tuple[tuple[MorId, MorId], tuple[MorId, MorId], tuple[MorId, MorId, MorId]],
        MorId | None,
    ]


def _all_cospans(cat: FinCategory) -> list[tuple[MorId, MorId]]:
    return [
        (f, g)
        for f in cat.morphisms()
        for g in cat.morphisms()
        if cat.cod(f) == cat.cod(g)
    ]


def _all_spans(cat: FinCategory) -> list[tuple[MorId, MorId]]:
    return [
        (f, g)
        for f in cat.morphisms()
        for g in cat.morphisms()
        if cat.dom(f) == cat.dom(g)
    ]


def _cospan_morphisms(cat, src, dst):
    f, g = src
    f2, g2 = dst
    out = []
    for tau in cat.hom(cat.cod(f), cat.cod(f2)):
        ftau = cat.compose(f, tau)
        gtau = cat.compose(g, tau)
        alphas = [a for a in cat.hom(cat.dom(f), cat.dom(f2)) if cat.compose(a, f2) == ftau]
        betas = [b for b in cat.hom(cat.dom(g), cat.dom(g2)) if cat.compose(b, g2) == gtau]
        out.extend((a, tau, b) for a in alphas for b in betas)
    return out


def _span_morphisms(cat, src, dst):
    f, g = src
    f2, g2 = dst
    out = []
    for delta in cat.hom(cat.dom(f), cat.dom(f2)):
        df = cat.compose(delta, f2)
        dg = cat.compose(delta, g2)
        alphas = [a for a in cat.hom(cat.cod(f), cat.cod(f2)) if cat.compose(f, a) == df]
        betas = [b for b in cat.hom(cat.cod(g), cat.cod(g2)) if cat.compose(g, b) == dg]
        out.extend((a, delta, b) for a in alphas for b in betas)
    return out


def check_coamalgamation(
    cat: FinCategory,
    data: CoamalgamationData,
    warp: Warp | None = None,
    topology: GrothendieckTopology | None = None,
) -> CoamalgReport:
    """Exhaustively verify square data as a functorial (co)amalgamation.

    Checks totality, commutation of every square, preservation of
    identities and composites, naturality of the legs, and, for the cospan
    orientation with a warp and topology supplied, that the refining legs
    over each warp presieve generate covering sieves.
    """
    cospan_mode = data.orientation == "cospan"
    keys = _all_cospans(cat) if cospan_mode else _all_spans(cat)
    arrows_between = _cospan_morphisms if cospan_mode else _span_morphisms
    bad: list[CoamalgViolation] = []

    for key in keys:
        f, g = key
        if key not in data.apex:
            bad.append(CoamalgViolation("NotFunctorial", "missing square", key))
            continue
        w = data.apex[key]
        la, lb = data.left_leg[key], data.right_leg[key]
        if cospan_mode:
            well_typed = (
                cat.dom(la) == w
                and cat.dom(lb) == w
                and cat.cod(la) == cat.dom(f)
                and cat.cod(lb) == cat.dom(g)
            )
            commutes = well_typed and cat.compose(la, f) == cat.compose(lb, g)
        else:
            well_typed = (
                cat.cod(la) == w
                and cat.cod(lb) == w
                and cat.dom(la) == cat.cod(f)
                and cat.dom(lb) == cat.cod(g)
            )
            commutes = well_typed and cat.compose(f, la) == cat.compose(g, lb)
        if not commutes:
            bad.append(CoamalgViolation("NotFunctorial", "square does not commute", key))

    # keys without a square are already reported; later passes skip them
    present = [k for k in keys if k in data.apex]
    arrow_table: dict[tuple, list[tuple]] = {}
    for src in present:
        for dst in present:
            ms = arrows_between(cat, src, dst)
            if ms:
                arrow_table[(src, dst)] = ms

    for (src, dst), ms in arrow_table.items():
        for triple in ms:
            img = data.on_mor.get((src, dst, triple))
            if img is None:
                bad.append(
                    CoamalgViolation("NotFunctorial", "no apex morphism for this arrow", (src, dst, triple))
                )
                continue
            a, _mid, b = triple
            w, w2 = data.apex[src], data.apex[dst]
            if cat.dom(img) != w or cat.cod(img) != w2:
                bad.append(CoamalgViolation("NotFunctorial", "apex morphism ill-typed", (src, dst, triple)))
                continue
            if cospan_mode:
                nat = (
                    cat.compose(img, data.left_leg[dst]) == cat.compose(data.left_leg[src], a)
                    and cat.compose(img, data.right_leg[dst]) == cat.compose(data.right_leg[src], b)
                )
            else:
                nat = (
                    cat.compose(data.left_leg[src], img) == cat.compose(a, data.left_leg[dst])
                    and cat.compose(data.right_leg[src], img) == cat.compose(b, data.right_leg[dst])
                )
            if not nat:
                bad.append(CoamalgViolation("NotFunctorial", "legs are not natural", (src, dst, triple)))

    for key in present:
        f, g = key
        if cospan_mode:
            ident = (cat.identity(cat.dom(f)), cat.identity(cat.cod(f)), cat.identity(cat.dom(g)))
        else:
            ident = (cat.identity(cat.cod(f)), cat.identity(cat.dom(f)), cat.identity(cat.cod(g)))
        img = data.on_mor.get((key, key, ident))
        if img != cat.identity(data.apex[key]):
            bad.append(CoamalgViolation("NotFunctorial", "identity arrow not sent to identity", key))

    for (src, mid_key), first in arrow_table.items():
        for (mid2, dst), second in arrow_table.items():
            if mid_key != mid2:
                continue
            for t1 in first:
                img1 = data.on_mor.get((src, mid_key, t1))
                if img1 is None:
                    continue
                for t2 in second:
                    img2 = data.on_mor.get((mid_key, dst, t2))
                    if img2 is None:
                        continue
                    composite = tuple(cat.compose(x, y) for x, y in zip(t1, t2))
                    expected = data.on_mor.get((src, dst, composite))
                    if expected != cat.compose(img1, img2):
                        bad.append(
                            CoamalgViolation(
                                "NotFunctorial", "composition not preserved", (src, mid_key, dst, t1, t2)
                            )
                        )

    if cospan_mode and warp is not None and topology is not None:
        for c in cat.objects():
            for idx, p in enumerate(warp.at(c)):
                for h in cat.into(c):
                    if any((h, f) not in data.left_leg for f in p.members):
                        continue
                    legs = frozenset(data.left_leg[(h, f)] for f in p.members)
                    gen = sieve_generated(cat, Presieve(cat.dom(h), legs))
                    if not topology.is_covering(cat.dom(h), gen.members):
                        bad.append(
                            CoamalgViolation("CoveringViolated", "refining legs do not cover", (c, idx, h))
                        )

    return CoamalgReport(not bad, tuple(bad))


def coamalgamation_from_pullbacks(cat: FinCategory) -> CoamalgamationData:
    """Canonical cospan data on a site with pullbacks.

    Squares are the least pullbacks found by exhaustive search and the apex
    morphisms are the unique mediators, so the data is determined by the
    presentation alone.  Raises NotFound if some cospan has no pullback.
    """
    from .fincat import Cospan, pullback

    apex: dict[tuple[MorId, MorId], ObjId] = {}
    left: dict[tuple[MorId, MorId], MorId] = {}
    right: dict[tuple[MorId, MorId], MorId] = {}
    for key in _all_cospans(cat):
        corner = pullback(cat, Cospan(*key))
        apex[key] = corner.apex
        left[key] = corner.left
        right[key] = corner.right

    on_mor: dict = {}
    keys = _all_cospans(cat)
    for src in keys:
        for dst in keys:
            for triple in _cospan_morphisms(cat, src, dst):
                a, _tau, b = triple
                want_l = cat.compose(left[src], a)
                want_r = cat.compose(right[src], b)
                found = None
                for u in cat.hom(apex[src], apex[dst]):
                    if cat.compose(u, left[dst]) == want_l and cat.compose(u, right[dst]) == want_r:
                        found = u
                        break
                if found is None:
                    raise NotFound("pullback mediator missing; squares are not universal")
                on_mor[(src, dst, triple)] = found
    return CoamalgamationData("cospan", apex, left, right, on_mor)
