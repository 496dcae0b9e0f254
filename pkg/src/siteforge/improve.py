"""Improvement steps: refining a chain point until it separates two sections.

An improvement extends a chain point so that two given germs of a presheaf
become distinct while a witness germ factors through a chosen covering leg.
Improvements compose, transport along squares of subobjects, and are
scheduled by a diagonal pairing of (stage, presieve) indices; iterating the
step either synthesizes a point with a projectivity certificate or reports
exactly where refinement got stuck.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

from .fincat import Cospan, FinCategory, MorId, NotFound, ObjId, pullback
from .point import (
    ChainPoint,
    Evaluation,
    Germ,
    ProjectivityReport,
    check_projectivity,
    extend_chain,
    push_classes,
)
from .presheaf import (
    Presheaf,
    PresheafMap,
    Subpresheaf,
    compose_subobjects,
    sub_as_presheaf,
    yoneda,
    yoneda_map,
)
from .sites import (
    CoamalgamationData,
    DepthExceeded,
    GrothendieckTopology,
    Presieve,
    Warp,
    _find_cotree,
    multicomposite,
)


def pair_index(a: int, b: int) -> int:
    """Diagonal pairing of two naturals; never smaller than its first slot."""
    if a < 0 or b < 0:
        raise ValueError("pairing is defined on naturals")
    return (a + b) * (a + b + 1) // 2 + b


def pair_unindex(k: int) -> tuple[int, int]:
    """Inverse of :func:`pair_index`."""
    if k < 0:
        raise ValueError("pairing is defined on naturals")
    s = (isqrt(8 * k + 1) - 1) // 2
    b = k - s * (s + 1) // 2
    return s - b, b


class NoDistinguishingLeg(Exception):
    """No leg of the target presieve separates the two germs.

    ``witnesses`` records, per member, either the missing square or the fact
    that the pushed sections still agree.
    """

    def __init__(self, witnesses: tuple[tuple[MorId, str], ...]):
        self.witnesses = witnesses
        super().__init__(
            "; ".join(f"member {m}: {why}" for m, why in witnesses) or "empty presieve"
        )


class NotAPullback(Exception):
    """The supplied subobject square failed elementwise pullback checking."""


@dataclass(frozen=True)
class PresieveTarget:
    """Factor the witness germ of the representable through a presieve leg."""

    presieve: Presieve
    witness: Germ


@dataclass(frozen=True, eq=False)
class DenseTarget:
    """Lift the witness germ of the ambient presheaf into a subobject."""

    sub: Subpresheaf
    witness: Germ


@dataclass(frozen=True, eq=False)
class ImprovementData:
    point: ChainPoint
    presheaf: Presheaf
    x: Germ
    y: Germ
    target: PresieveTarget | DenseTarget


@dataclass(frozen=True, eq=False)
class Improvement:
    """A chain extension with a lifted witness separating the two germs."""

    data: ImprovementData
    extension: tuple[MorId, ...]
    member: MorId | None
    witness: Germ


def refined_point(cat: FinCategory, imp: Improvement) -> ChainPoint:
    p = imp.data.point
    for step in imp.extension:
        p = extend_chain(cat, p, step)
    return p


@dataclass(frozen=True)
class ImprovementCheck:
    ok: bool
    reasons: tuple[str, ...]


def check_improvement(cat: FinCategory, imp: Improvement) -> ImprovementCheck:
    """Verify the two improvement equations on the refined point.

    The pushed germs must be distinct, and the lifted witness must map to
    the pushed target witness: through postcomposition with the chosen
    member for presieve targets, through the inclusion for dense targets.
    """
    reasons = []
    data = imp.data
    try:
        p2 = refined_point(cat, imp)
    except ValueError as e:
        return ImprovementCheck(False, (str(e),))

    ev = Evaluation(cat, p2, data.presheaf)
    if ev.class_of(data.x) == ev.class_of(data.y):
        reasons.append("pushed sections are not distinct")

    if isinstance(data.target, PresieveTarget):
        t = data.target
        if imp.member is None or imp.member not in t.presieve.members:
            reasons.append("chosen member is not in the target presieve")
        else:
            d = cat.dom(imp.member)
            ev_d = Evaluation(cat, p2, yoneda(cat, d))
            ev_c = Evaluation(cat, p2, yoneda(cat, t.presieve.target))
            via = push_classes(ev_d, yoneda_map(cat, imp.member))
            if via[ev_d.class_of(imp.witness)] != ev_c.class_of(t.witness):
                reasons.append("lifted witness does not project to the target witness")
    else:
        t = data.target
        sub, incl = sub_as_presheaf(t.sub)
        ev_s = Evaluation(cat, p2, sub)
        ev_t = Evaluation(cat, p2, t.sub.of)
        via = push_classes(ev_s, incl)
        if via[ev_s.class_of(imp.witness)] != ev_t.class_of(t.witness):
            reasons.append("lifted witness does not include to the target witness")

    return ImprovementCheck(not reasons, tuple(reasons))


def _square_for(
    cat: FinCategory,
    coamalg: CoamalgamationData | None,
    w: MorId,
    member: MorId,
) -> tuple[ObjId, MorId, MorId] | None:
    """A commuting square over the cospan (w, member): apex and both legs."""
    if coamalg is not None:
        key = (w, member)
        if key not in coamalg.apex:
            return None
        return coamalg.apex[key], coamalg.left_leg[key], coamalg.right_leg[key]
    try:
        corner = pullback(cat, Cospan(w, member))
    except NotFound:
        return None
    return corner.apex, corner.left, corner.right


def improve_step(
    cat: FinCategory,
    point: ChainPoint,
    x_presheaf: Presheaf,
    x: Germ,
    y: Germ,
    target: PresieveTarget,
    coamalg: CoamalgamationData | None = None,
) -> Improvement:
    """Extend the chain along the first presieve leg that separates x and y.

    The witness germ is resolved to its canonical morphism at the tail, a
    completing square over each member is taken (exhaustive pullback search
    unless coamalgamation data supplies squares), and members are tried in
    ascending order.  Raises NoDistinguishingLeg with per-member reports
    when every leg fails.
    """
    if point.cycle:
        raise ValueError("cannot improve a chain that already cycles")
    c = target.presieve.target
    ev_c = Evaluation(cat, point, yoneda(cat, c))
    tail = point.tail(cat)
    w = cat.hom(tail, c)[ev_c.class_of(target.witness)]

    failures: list[tuple[MorId, str]] = []
    for member in sorted(target.presieve.members):
        square = _square_for(cat, coamalg, w, member)
        if square is None:
            failures.append((member, "no completing square"))
            continue
        _apex, to_tail_leg, to_member_leg = square
        p2 = extend_chain(cat, point, to_tail_leg)
        ev = Evaluation(cat, p2, x_presheaf)
        if ev.class_of(x) == ev.class_of(y):
            failures.append((member, "sections still agree"))
            continue
        d = cat.dom(member)
        elem = cat.hom(cat.dom(to_tail_leg), d).index(to_member_leg)
        return Improvement(
            data=ImprovementData(point, x_presheaf, x, y, target),
            extension=(to_tail_leg,),
            member=member,
            witness=Germ(len(p2.steps), elem),
        )
    raise NoDistinguishingLeg(tuple(failures))


def improve_step_coamalg(
    cat: FinCategory,
    coamalg: CoamalgamationData,
    point: ChainPoint,
    x_presheaf: Presheaf,
    x: Germ,
    y: Germ,
    target: PresieveTarget,
) -> Improvement:
    """improve_step with completing squares drawn from coamalgamation data.

    No pullbacks are searched; a member whose square is absent from the
    table is reported as having no completing square.
    """
    return improve_step(cat, point, x_presheaf, x, y, target, coamalg=coamalg)


def reduce_to_warp(
    cat: FinCategory,
    topology: GrothendieckTopology,
    warp: Warp,
    point: ChainPoint,
    target: DenseTarget,
    depth: int = 4,
) -> Presieve:
    """Replace a dense subobject target by a warp multicomposite presieve.

    The witness's canonical section at the tail determines the sieve of
    arrows along which it restricts into the subobject; density makes that
    sieve covering, and a warp cotree refines it into a presieve.  Raises
    DepthExceeded when no cotree is found within the bound.
    """
    t = target.sub.of
    ev = Evaluation(cat, point, t)
    e = ev.class_of(target.witness)
    tail = point.tail(cat)
    sieve = frozenset(
        f for f in cat.into(tail) if t.action[f][e] in target.sub.members[cat.dom(f)]
    )
    if not topology.is_covering(tail, sieve):
        raise ValueError("target subobject is not dense at the pushed witness")
    tree = _find_cotree(cat, warp, tail, sieve, depth, {})
    if tree is None:
        raise DepthExceeded(
            f"no warp cotree of height <= {depth} reaches the witness sieve"
        )
    return multicomposite(cat, tree)


def improve_dense(
    cat: FinCategory,
    topology: GrothendieckTopology,
    warp: Warp,
    point: ChainPoint,
    x_presheaf: Presheaf,
    x: Germ,
    y: Germ,
    target: DenseTarget,
    depth: int = 4,
) -> Improvement:
    """Improvement against a dense subobject via its warp reduction.

    The reduced presieve sits at the tail, so each member is its own
    completing square; the first member that separates the germs extends
    the chain, and the witness restricts into the subobject by construction.
    """
    if point.cycle:
        raise ValueError("cannot improve a chain that already cycles")
    presieve = reduce_to_warp(cat, topology, warp, point, target, depth)
    t = target.sub.of
    ev_t = Evaluation(cat, point, t)
    e = ev_t.class_of(target.witness)

    failures: list[tuple[MorId, str]] = []
    for member in sorted(presieve.members):
        p2 = extend_chain(cat, point, member)
        ev = Evaluation(cat, p2, x_presheaf)
        if ev.class_of(x) == ev.class_of(y):
            failures.append((member, "sections still agree"))
            continue
        d = cat.dom(member)
        pushed = t.action[member][e]
        elem = sorted(target.sub.members[d]).index(pushed)
        return Improvement(
            data=ImprovementData(point, x_presheaf, x, y, target),
            extension=(member,),
            member=member,
            witness=Germ(len(p2.steps), elem),
        )
    raise NoDistinguishingLeg(tuple(failures))


def compose_improvements(
    cat: FinCategory, first: Improvement, second: Improvement, dual: bool = False
) -> tuple[Improvement, Improvement] | Improvement:
    """Stack two improvements into one over the original point.

    With ``dual=False`` the second improvement targets its own witness over
    the once-refined point; the composite is returned in both readings: as
    an improvement for the first data and as one for the second target seen
    from the base point.  With ``dual=True`` the second target must be a
    subobject of the first (dense) target's materialization and its witness
    must refine the first lifted witness; the composite then improves
    against the composite subobject.
    """
    p1 = refined_point(cat, first)
    if second.data.point != p1:
        raise ValueError("second improvement does not start at the refined point")
    if second.data.presheaf is not first.data.presheaf:
        raise ValueError("improvements concern different presheaves")
    ev1 = Evaluation(cat, p1, first.data.presheaf)
    if ev1.class_of(second.data.x) != ev1.class_of(first.data.x) or ev1.class_of(
        second.data.y
    ) != ev1.class_of(first.data.y):
        raise ValueError("improvements concern different section pairs")
    extension = first.extension + second.extension

    if not dual:
        if second.data.target.witness.stage > len(first.data.point.steps):
            raise ValueError(
                "second target witness must live at a stage of the base point"
            )
        as_first = Improvement(first.data, extension, first.member, first.witness)
        rebased = ImprovementData(
            first.data.point,
            first.data.presheaf,
            first.data.x,
            first.data.y,
            second.data.target,
        )
        as_second = Improvement(rebased, extension, second.member, second.witness)
        return as_first, as_second

    if not isinstance(first.data.target, DenseTarget) or not isinstance(
        second.data.target, DenseTarget
    ):
        raise ValueError("dual composition needs dense targets on both sides")
    outer = first.data.target.sub
    inner = second.data.target.sub
    outer_sub, _ = sub_as_presheaf(outer)
    if inner.of.elements != outer_sub.elements:
        raise ValueError("second target is not a subobject of the first target")

    p2 = refined_point(cat, second)
    ev_outer = Evaluation(cat, p2, outer_sub)
    if ev_outer.class_of(second.data.target.witness) != ev_outer.class_of(first.witness):
        raise ValueError("second target witness does not refine the first lifted witness")

    composite_sub = compose_subobjects(outer, inner)
    obj = _stage_object(cat, p2, second.witness.stage)
    ambient_idx = outer.sorted_members(obj)[
        sorted(inner.members[obj])[second.witness.elem]
    ]
    elem = sorted(composite_sub.members[obj]).index(ambient_idx)
    data = ImprovementData(
        first.data.point,
        first.data.presheaf,
        first.data.x,
        first.data.y,
        DenseTarget(composite_sub, first.data.target.witness),
    )
    return Improvement(data, extension, None, Germ(second.witness.stage, elem))


def _stage_object(cat: FinCategory, point: ChainPoint, stage: int) -> ObjId:
    if stage > len(point.steps):
        raise ValueError("stage is past the end of the prefix")
    at = point.start
    for s in point.steps[:stage]:
        at = cat.dom(s)
    return at


@dataclass(frozen=True, eq=False)
class SubobjectSquare:
    """A commuting square of subobject inclusions over a map of ambients.

    ``top`` maps the materialization of ``sub`` to that of ``sub2`` and must
    commute with ``bottom`` over the inclusions.
    """

    sub: Subpresheaf
    sub2: Subpresheaf
    top: PresheafMap
    bottom: PresheafMap

    def validate(self, cat: FinCategory) -> None:
        for o in cat.objects():
            src = self.sub.sorted_members(o)
            dst = self.sub2.sorted_members(o)
            for k, ambient in enumerate(src):
                via_top = dst[self.top.components[o][k]]
                via_bottom = self.bottom.components[o][ambient]
                if via_top != via_bottom:
                    raise ValueError("subobject square does not commute")

    def is_pullback(self, cat: FinCategory) -> bool:
        for o in cat.objects():
            src = self.sub.sorted_members(o)
            dst_pos = {a: k for k, a in enumerate(self.sub2.sorted_members(o))}
            seen = set()
            for k, ambient in enumerate(src):
                pair = (self.top.components[o][k], ambient)
                if pair in seen:
                    return False
                seen.add(pair)
            want = {
                (dst_pos[self.bottom.components[o][t]], t)
                for t in range(self.sub.of.size(o))
                if self.bottom.components[o][t] in dst_pos
            }
            if seen != want:
                return False
        return True


def base_change_improvement(
    cat: FinCategory,
    imp: Improvement,
    square: SubobjectSquare,
    converse: bool = False,
    base_witness: Germ | None = None,
) -> Improvement:
    """Transport an improvement across a square of subobjects.

    Forward: an improvement against the left subobject pushes to one
    against the right, composing the witnesses with the square's maps.
    Converse: only across a certified elementwise pullback square
    (NotAPullback otherwise); the comparison germ into the left subobject
    is recovered and must be unique.  ``base_witness`` supplies the left
    ambient witness for the converse direction.
    """
    square.validate(cat)
    data = imp.data
    if not isinstance(data.target, DenseTarget):
        raise ValueError("base change applies to dense targets")
    p2 = refined_point(cat, imp)

    if not converse:
        if data.target.sub is not square.sub:
            raise ValueError("improvement does not target the square's left subobject")
        w = data.target.witness
        w_obj = _stage_object(cat, data.point, w.stage)
        new_witness_elem = square.top.components[_stage_object(cat, p2, imp.witness.stage)][
            imp.witness.elem
        ]
        pushed_w = Germ(w.stage, square.bottom.components[w_obj][w.elem])
        new_data = ImprovementData(
            data.point, data.presheaf, data.x, data.y, DenseTarget(square.sub2, pushed_w)
        )
        return Improvement(
            new_data, imp.extension, imp.member, Germ(imp.witness.stage, new_witness_elem)
        )

    if not square.is_pullback(cat):
        raise NotAPullback("square is not an elementwise pullback")
    if data.target.sub is not square.sub2:
        raise ValueError("improvement does not target the square's right subobject")
    if base_witness is None:
        raise ValueError("converse transport needs the base ambient witness")

    bw_obj = _stage_object(cat, data.point, base_witness.stage)
    ev_amb2 = Evaluation(cat, p2, square.sub2.of)
    pushed = Germ(base_witness.stage, square.bottom.components[bw_obj][base_witness.elem])
    if ev_amb2.class_of(pushed) != ev_amb2.class_of(data.target.witness):
        raise ValueError("base witness does not map to the improvement's target witness")

    left_sub, left_incl = sub_as_presheaf(square.sub)
    right_sub, _ = sub_as_presheaf(square.sub2)
    ev_left = Evaluation(cat, p2, left_sub)
    ev_amb = Evaluation(cat, p2, square.sub.of)
    via_top = push_classes(ev_left, PresheafMap(left_sub, right_sub, square.top.components))
    via_incl = push_classes(ev_left, left_incl)
    want_top = Evaluation(cat, p2, right_sub).class_of(imp.witness)
    want_amb = ev_amb.class_of(base_witness)
    hits = [
        c
        for c in ev_left.classes
        if via_top[c] == want_top and via_incl[c] == want_amb
    ]
    if len(hits) != 1:
        raise ValueError(
            f"comparison germ is not unique ({len(hits)} candidates); inputs inconsistent"
        )
    new_data = ImprovementData(
        data.point, data.presheaf, data.x, data.y, DenseTarget(square.sub, base_witness)
    )
    return Improvement(new_data, imp.extension, None, Germ(len(p2.steps), hits[0]))


@dataclass(frozen=True)
class ScheduleRecord:
    k: int
    stage: int
    presieve_index: int | None
    member: MorId
    step: MorId


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    """Outcome of iterated improvement from a representable start.

    On success ``point`` carries a projectivity certificate and the two
    final evaluation classes witness the separation.  Otherwise ``reason``
    distinguishes budget exhaustion from a refinement dead end, and the
    trace records every scheduled step taken.
    """

    ok: bool
    reason: str
    point: ChainPoint | None
    x: Germ
    y: Germ
    witness_classes: tuple[int, int] | None
    certificate: ProjectivityReport | None
    trace: tuple[ScheduleRecord, ...]
    leg_failures: tuple[tuple[MorId, str], ...] | None


def _closure_candidates(
    cat: FinCategory, point: ChainPoint, max_period: int
) -> list[ChainPoint]:
    out = [point]
    n = len(point.steps)
    tail = point.tail(cat)
    for j in range(n - 1, max(n - max_period, 0) - 1, -1):
        if _stage_object(cat, point, j) == tail:
            out.append(ChainPoint(point.start, point.steps[:j], point.steps[j:]))
    return out


def synthesize_point(
    cat: FinCategory,
    topology: GrothendieckTopology,
    warp: Warp,
    x_presheaf: Presheaf,
    at: ObjId,
    x_elem: int,
    y_elem: int,
    max_steps: int = 32,
    max_period: int = 8,
    coamalg: CoamalgamationData | None = None,
) -> SynthesisResult:
    """Grow a chain point separating two sections, certificate included.

    Starts at the representable chain on ``at`` and, before each step, tries
    to close: the bare prefix, then each rollup of a trailing segment into a
    cycle (shortest first), accepting the first candidate that keeps the
    sections distinct and passes the projectivity check.  Steps are
    dispatched by the diagonal pairing: step k unpacks to (stage a, presieve
    b) and improves against presieve b of the warp at the stage-a object,
    with the composite down the chain as witness; pair indices past the
    warp's presieve list fall back to the identity presieve, which keeps the
    dispatch total.
    """
    if x_elem == y_elem:
        raise ValueError("need two distinct sections to separate")
    point = ChainPoint(at, (), ())
    x = Germ(0, x_elem)
    y = Germ(0, y_elem)
    trace: list[ScheduleRecord] = []

    for k in range(max_steps + 1):
        for cand in _closure_candidates(cat, point, max_period):
            ev = Evaluation(cat, cand, x_presheaf)
            cx, cy = ev.class_of(x), ev.class_of(y)
            if cx == cy:
                continue
            report = check_projectivity(cat, topology, cand)
            if report.ok:
                return SynthesisResult(
                    True, "", cand, x, y, (cx, cy), report, tuple(trace), None
                )
        if k == max_steps:
            break
        a, b = pair_unindex(k)
        obj = _stage_object(cat, point, a)
        row = warp.at(obj)
        if b < len(row):
            presieve, pidx = row[b], b
        else:
            presieve, pidx = Presieve(obj, frozenset({cat.identity(obj)})), None
        witness = Germ(a, cat.hom(obj, obj).index(cat.identity(obj)))
        try:
            imp = improve_step(
                cat, point, x_presheaf, x, y, PresieveTarget(presieve, witness), coamalg
            )
        except NoDistinguishingLeg as e:
            return SynthesisResult(
                False, "no distinguishing leg", point, x, y, None, None, tuple(trace), e.witnesses
            )
        point = refined_point(cat, imp)
        trace.append(ScheduleRecord(k, a, pidx, imp.member, imp.extension[0]))

    return SynthesisResult(
        False, "max steps exhausted", point, x, y, None, None, tuple(trace), None
    )
