"""Chain points and their evaluation on presheaves.

A chain point is a finitely presented backward chain of objects: a prefix
of connecting morphisms plus an optional cycle at the tail.  Evaluating a
presheaf along the chain is a filtered colimit; with a finite presentation
it collapses to the eventual image of the loop composite acting on the
sections at the tail.  Germs name sections at a stage, and two germs are
equal at the point exactly when they push forward to the same eventual
class.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fincat import Cochain, FinCategory, MorId, ObjId
from .presheaf import Presheaf, PresheafMap, yoneda
from .sites import GrothendieckTopology, SieveMembers

ChainPoint = Cochain


@dataclass(frozen=True)
class Germ:
    """A section seen at a stage of a chain; stages number the prefix 0..n
    and continue through cycle phases n+1, n+2, ... when a cycle is present."""

    stage: int
    elem: int


class Evaluation:
    """The value of a presheaf at a chain point, with class bookkeeping.

    ``classes`` are canonical section indices at the tail: the eventual
    image of the loop action.  Any germ can be pushed to the tail and then
    stabilized; equality of the results is equality at the point.
    """

    def __init__(self, cat: FinCategory, point: ChainPoint, x: Presheaf):
        point.validate(cat)
        self.cat = cat
        self.point = point
        self.presheaf = x
        self.tail = point.tail(cat)
        self.loop = point.loop(cat)
        size = x.size(self.tail)
        stab = list(range(size))
        for _ in range(size):
            stab = [x.action[self.loop][e] for e in stab]
        self._stable = stab
        self.classes: tuple[int, ...] = tuple(sorted(set(stab)))

    def stage_object(self, stage: int) -> ObjId:
        n = len(self.point.steps)
        if stage <= n:
            at = self.point.start
            for s in self.point.steps[:stage]:
                at = self.cat.dom(s)
            return at
        if not self.point.cycle:
            raise ValueError(f"stage {stage} is past the end of an acyclic chain")
        k = (stage - n - 1) % len(self.point.cycle)
        return self.cat.dom(self.point.cycle[k])

    def to_tail(self, germ: Germ) -> int:
        """Push a germ forward along the remaining connecting morphisms."""
        n = len(self.point.steps)
        x = self.presheaf
        e = germ.elem
        if not (0 <= e < x.size(self.stage_object(germ.stage))):
            raise ValueError("germ element out of range at its stage")
        if germ.stage <= n:
            for s in self.point.steps[germ.stage :]:
                e = x.action[s][e]
            return e
        m = len(self.point.cycle)
        phase = (germ.stage - n - 1) % m
        for s in self.point.cycle[phase + 1 :]:
            e = x.action[s][e]
        return e

    def class_of(self, germ: Germ) -> int:
        return self._stable[self.to_tail(germ)]

    def class_label(self, cls: int) -> str:
        return self.presheaf.label(self.tail, cls)


def eval_point(cat: FinCategory, point: ChainPoint, x: Presheaf) -> Evaluation:
    return Evaluation(cat, point, x)


def push_classes(ev: Evaluation, phi: PresheafMap) -> dict[int, int]:
    """Where each evaluation class of ``phi.dom`` lands in ``phi.cod``."""
    if phi.dom.elements != ev.presheaf.elements:
        raise ValueError("map does not start at the evaluated presheaf")
    target = Evaluation(ev.cat, ev.point, phi.cod)
    return {c: target.class_of(Germ(len(ev.point.steps), phi.components[ev.tail][c])) for c in ev.classes}


def eval_on_map(cat: FinCategory, point: ChainPoint, phi: PresheafMap) -> dict[int, int]:
    """Germ-class function induced by a presheaf map; commutes with class_of."""
    return push_classes(Evaluation(cat, point, phi.dom), phi)


def extend_chain(cat: FinCategory, point: ChainPoint, step: MorId) -> ChainPoint:
    """Append one connecting morphism; only acyclic chains can grow."""
    if point.cycle:
        raise ValueError("cannot extend a chain that already cycles")
    if cat.cod(step) != point.tail(cat):
        raise ValueError("extension must land in the current tail")
    return ChainPoint(point.start, point.steps + (step,), ())


def concat_certified(cat: FinCategory, point: ChainPoint, segments) -> ChainPoint:
    """Fold segments of connecting morphisms onto a chain, checking each join."""
    acc = point
    for seg in segments:
        for step in seg:
            acc = extend_chain(cat, acc, step)
    return acc


@dataclass(frozen=True)
class LiftEntry:
    obj: ObjId
    sieve: SieveMembers
    cls: int
    stage: int
    member: MorId


@dataclass(frozen=True)
class ProjectivityReport:
    ok: bool
    certificate: tuple[LiftEntry, ...]
    failure: tuple[ObjId, SieveMembers, int] | None


def check_projectivity(
    cat: FinCategory, topology: GrothendieckTopology, point: ChainPoint
) -> ProjectivityReport:
    """Whether every covering sieve absorbs every germ of its representable.

    For each object and covering sieve, each evaluation class of the
    representable is a composite out of some stage; walking further stages
    precomposes cycle morphisms, and the walk is complete once a
    (phase, composite) state repeats, so membership in the sieve is decided
    exactly.  Acyclic chains walk a single stage.
    """
    point.validate(cat)
    tail = point.tail(cat)
    cycle = point.cycle if point.cycle else (cat.identity(tail),)
    n = len(point.steps)
    entries = []
    for o in cat.objects():
        ev = Evaluation(cat, point, yoneda(cat, o))
        homs = cat.hom(tail, o)
        for s in sorted(topology.covers(o), key=sorted):
            for cls in ev.classes:
                w = homs[cls]
                found = None
                seen = set()
                stage, phase, cur = n, 0, w
                while (phase, cur) not in seen:
                    seen.add((phase, cur))
                    if cur in s:
                        found = (stage, cur)
                        break
                    cur = cat.compose(cycle[phase % len(cycle)], cur)
                    phase = (phase + 1) % len(cycle)
                    stage += 1
                if found is None:
                    return ProjectivityReport(False, tuple(entries), (o, s, cls))
                entries.append(LiftEntry(o, s, cls, found[0], found[1]))
    return ProjectivityReport(True, tuple(entries), None)


@dataclass(frozen=True, eq=False)
class Cone:
    """A commuting cone: apex presheaf, legs, and diagram arrows.

    ``arrows`` lists (i, j, map) where the map goes from the codomain of
    leg i to the codomain of leg j; commutation of legs over each arrow is
    a precondition and is re-checked.
    """

    apex: Presheaf
    legs: tuple[PresheafMap, ...]
    arrows: tuple[tuple[int, int, PresheafMap], ...] = ()

    def validate(self) -> None:
        from .presheaf import compose_maps

        for leg in self.legs:
            if leg.dom is not self.apex:
                raise ValueError("cone leg does not start at the apex")
        for i, j, arrow in self.arrows:
            via = compose_maps(self.legs[i], arrow)
            if via.components != self.legs[j].components:
                raise ValueError(f"cone does not commute over arrow {i}->{j}")


@dataclass(frozen=True)
class LexityReport:
    ok: bool
    checked_families: int
    failure: tuple | None


def check_lexity(cat: FinCategory, point: ChainPoint, cone: Cone) -> LexityReport:
    """Evaluation sends the cone to a limit cone of sets.

    Enumerates all arrow-compatible families of germ classes over the leg
    codomains and requires a unique apex class mapping onto each family.
    """
    cone.validate()
    apex_ev = Evaluation(cat, point, cone.apex)
    leg_evs = [Evaluation(cat, point, leg.cod) for leg in cone.legs]
    pushes = [push_classes(apex_ev, leg) for leg in cone.legs]
    arrow_push = [
        (i, j, push_classes(leg_evs[i], arrow)) for i, j, arrow in cone.arrows
    ]

    import itertools

    checked = 0
    for family in itertools.product(*(ev.classes for ev in leg_evs)):
        if any(push[family[i]] != family[j] for i, j, push in arrow_push):
            continue
        checked += 1
        hits = [
            c
            for c in apex_ev.classes
            if all(pushes[i][c] == family[i] for i in range(len(cone.legs)))
        ]
        if len(hits) != 1:
            return LexityReport(False, checked, (family, tuple(hits)))
    return LexityReport(True, checked, None)


@dataclass(frozen=True)
class CocontinuityReport:
    ok: bool
    witnesses: tuple[tuple[int, int, int], ...]
    failure: int | None


def check_cocontinuity(
    cat: FinCategory, point: ChainPoint, family: tuple[PresheafMap, ...]
) -> CocontinuityReport:
    """Every germ class of the common codomain factors through some leg.

    Witnesses are (class, leg index, preimage class); the first class with
    no preimage under any leg is reported as the failure.
    """
    if not family:
        raise ValueError("need at least one map")
    target = family[0].cod
    if any(phi.cod is not target for phi in family):
        raise ValueError("maps do not share a codomain")
    tev = Evaluation(cat, point, target)
    witnesses = []
    for c in tev.classes:
        hit = None
        for d, phi in enumerate(family):
            sev = Evaluation(cat, point, phi.dom)
            push = push_classes(sev, phi)
            for src in sev.classes:
                if push[src] == c:
                    hit = (c, d, src)
                    break
            if hit:
                break
        if hit is None:
            return CocontinuityReport(False, tuple(witnesses), c)
        witnesses.append(hit)
    return CocontinuityReport(True, tuple(witnesses), None)
