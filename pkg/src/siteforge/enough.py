"""Do the chain points of a site separate its sheaves?

This module turns the single-pair synthesis step into site-level reports:
separating every pair of sections of every sheaf, enumerating all small
points up to evaluation equivalence, comparing against the locale picture
on posetal sites, and cutting down to closed subtopologies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .fincat import FinCategory, MorId, ObjId
from .improve import SynthesisResult, synthesize_point
from .point import ChainPoint, Evaluation, check_projectivity, push_classes
from .presheaf import (
    Presheaf,
    PresheafMap,
    Subpresheaf,
    distinct_pair_witness,
    sheaf_check,
    sheafify,
    sub_as_presheaf,
    yoneda,
    yoneda_map,
)
from .sites import GrothendieckTopology, Warp, sieves_on


class NotPosetal(Exception):
    """The construction needs at most one morphism between any two objects."""


class NotSubterminal(Exception):
    """The given subobject does not live in the terminal presheaf."""


def distinguish_pair(
    cat: FinCategory,
    topology: GrothendieckTopology,
    warp: Warp,
    f: PresheafMap,
    g: PresheafMap,
    max_steps: int = 32,
    max_period: int = 8,
) -> tuple[tuple[ObjId, int], SynthesisResult]:
    """A point separating two parallel maps at their least disagreement."""
    witness = distinct_pair_witness(f, g)
    if witness is None:
        raise ValueError("maps are equal; nothing to distinguish")
    o, e = witness
    result = synthesize_point(
        cat,
        topology,
        warp,
        f.cod,
        o,
        f.components[o][e],
        g.components[o][e],
        max_steps=max_steps,
        max_period=max_period,
    )
    return witness, result


@dataclass(frozen=True, eq=False)
class PairOutcome:
    presheaf: str
    obj: ObjId
    x_elem: int
    y_elem: int
    result: SynthesisResult


@dataclass(frozen=True, eq=False)
class EnoughReport:
    ok: bool
    outcomes: tuple[PairOutcome, ...]
    skipped: tuple[tuple[str, str], ...]


def enough_points_report(
    cat: FinCategory,
    topology: GrothendieckTopology,
    warp: Warp,
    sheaves: Sequence[tuple[str, Presheaf]],
    max_steps: int = 32,
    max_period: int = 8,
) -> EnoughReport:
    """Synthesize a separating point for every unordered pair of sections.

    Presheaves that fail the sheaf check are skipped and reported rather
    than separated, since the synthesis guarantee only covers sheaves.
    """
    outcomes = []
    skipped = []
    ok = True
    for name, x in sheaves:
        verdict = sheaf_check(cat, topology, x)
        if not verdict.sheaf:
            skipped.append((name, "not a sheaf"))
            continue
        for o in cat.objects():
            for i in range(x.size(o)):
                for j in range(i + 1, x.size(o)):
                    result = synthesize_point(
                        cat, topology, warp, x, o, i, j,
                        max_steps=max_steps, max_period=max_period,
                    )
                    outcomes.append(PairOutcome(name, o, i, j, result))
                    ok = ok and result.ok
    return EnoughReport(ok, tuple(outcomes), tuple(skipped))


def points_equivalent(cat: FinCategory, p: ChainPoint, q: ChainPoint) -> bool:
    """Evaluation equivalence: natural bijections on representable values."""
    evs_p = [Evaluation(cat, p, yoneda(cat, o)) for o in cat.objects()]
    evs_q = [Evaluation(cat, q, yoneda(cat, o)) for o in cat.objects()]
    if any(
        len(evs_p[o].classes) != len(evs_q[o].classes) for o in cat.objects()
    ):
        return False
    pushes_p = {
        m: push_classes(evs_p[cat.dom(m)], yoneda_map(cat, m)) for m in cat.morphisms()
    }
    pushes_q = {
        m: push_classes(evs_q[cat.dom(m)], yoneda_map(cat, m)) for m in cat.morphisms()
    }
    n = cat.n_objects
    relevant: list[list[MorId]] = [[] for _ in range(n)]
    for m in cat.morphisms():
        relevant[max(cat.dom(m), cat.cod(m))].append(m)
    chosen: list[dict[int, int]] = []

    def consistent(o: ObjId) -> bool:
        for m in relevant[o]:
            a, b = cat.dom(m), cat.cod(m)
            for c in evs_p[a].classes:
                if chosen[b][pushes_p[m][c]] != pushes_q[m][chosen[a][c]]:
                    return False
        return True

    def rec(o: int) -> bool:
        if o == n:
            return True
        src, dst = evs_p[o].classes, evs_q[o].classes
        for perm in itertools.permutations(dst):
            chosen.append(dict(zip(src, perm)))
            if consistent(o) and rec(o + 1):
                return True
            chosen.pop()
        return False

    return rec(0)


def oracle_enumerate_points(
    cat: FinCategory,
    topology: GrothendieckTopology,
    max_len: int = 3,
    max_period: int = 2,
) -> tuple[ChainPoint, ...]:
    """All projective chain points within the budget, up to equivalence.

    Enumerates every composable prefix of non-identity steps from every
    start object, optionally closed by a non-identity cycle at the tail,
    filters by the projectivity certificate and deduplicates by evaluation
    equivalence.  Enumeration order is deterministic, so the chosen class
    representatives are stable.
    """
    candidates: list[ChainPoint] = []

    def prefixes(start: ObjId):
        frontier: list[tuple[MorId, ...]] = [()]
        yield ()
        for _ in range(max_len):
            new_frontier = []
            for steps in frontier:
                tail = cat.dom(steps[-1]) if steps else start
                for s in cat.into(tail):
                    if cat.is_identity(s):
                        continue
                    new_frontier.append(steps + (s,))
                    yield steps + (s,)
            frontier = new_frontier

    def cycles(tail: ObjId):
        frontier: list[tuple[MorId, ...]] = [()]
        for _ in range(max_period):
            new_frontier = []
            for cyc in frontier:
                at = cat.dom(cyc[-1]) if cyc else tail
                for s in cat.into(at):
                    if cat.is_identity(s):
                        continue
                    longer = cyc + (s,)
                    new_frontier.append(longer)
                    if cat.dom(s) == tail:
                        yield longer
            frontier = new_frontier

    for start in cat.objects():
        for steps in prefixes(start):
            tail = cat.dom(steps[-1]) if steps else start
            candidates.append(ChainPoint(start, steps, ()))
            for cyc in cycles(tail):
                candidates.append(ChainPoint(start, steps, cyc))

    kept: list[ChainPoint] = []
    for cand in candidates:
        if not check_projectivity(cat, topology, cand).ok:
            continue
        if any(points_equivalent(cat, cand, seen) for seen in kept):
            continue
        kept.append(cand)
    return tuple(kept)


@dataclass(frozen=True)
class LocalePoint:
    generator: frozenset[ObjId]
    filter: tuple[frozenset[ObjId], ...]
    chain: ChainPoint


@dataclass(frozen=True)
class LocaleResult:
    frame: tuple[frozenset[ObjId], ...]
    points: tuple[LocalePoint, ...]


def locale_points(cat: FinCategory, topology: GrothendieckTopology) -> LocaleResult:
    """Frame of covering-closed downsets and its join-irreducible elements.

    Only defined on posetal sites.  Each point corresponds to a principal
    filter at a join-irreducible open; its chain equivalent is the
    representable at the least object whose closed downset generates it.
    """
    for a in cat.objects():
        for b in cat.objects():
            if len(cat.hom(a, b)) > 1:
                raise NotPosetal(
                    f"two morphisms {cat.obj_names[a]} -> {cat.obj_names[b]}"
                )

    def close(u: frozenset[ObjId]) -> frozenset[ObjId]:
        cur = set(u)
        changed = True
        while changed:
            changed = False
            for c in cat.objects():
                if c in cur:
                    continue
                for s in topology.covers(c):
                    if all(cat.dom(f) in cur for f in s):
                        cur.add(c)
                        changed = True
                        break
        return frozenset(cur)

    def downset(objs) -> frozenset[ObjId]:
        return frozenset(
            a for a in cat.objects() if any(cat.hom(a, b) for b in objs)
        ) | frozenset(objs)

    frame = set()
    for bits in range(1 << cat.n_objects):
        u = frozenset(o for o in cat.objects() if bits >> o & 1)
        if u != downset(u):
            continue
        if u == close(u):
            frame.add(u)
    frame_sorted = tuple(sorted(frame, key=sorted))

    points = []
    for u in frame_sorted:
        below = [v for v in frame_sorted if v < u]
        join_below = close(frozenset().union(frozenset(), *below))
        if not u or join_below == u:
            continue
        filt = tuple(v for v in frame_sorted if v >= u)
        gen_obj = min(
            o for o in cat.objects() if close(downset({o})) == u
        )
        points.append(LocalePoint(u, filt, ChainPoint(gen_obj, (), ())))
    return LocaleResult(frame_sorted, tuple(points))


def closed_subtopology(
    cat: FinCategory, topology: GrothendieckTopology, sub: Subpresheaf
) -> GrothendieckTopology:
    """The closed complement topology of a subterminal object.

    A sieve covers in the result when its union with the arrows out of the
    subterminal's support covers in the input topology.  The support must
    select at most one section over each object of the terminal presheaf.
    """
    if any(sub.of.size(o) != 1 for o in cat.objects()):
        raise NotSubterminal("ambient presheaf is not the terminal one")
    sub.validate()
    support = {o for o in cat.objects() if sub.members[o]}
    covering = []
    for o in cat.objects():
        block = frozenset(f for f in cat.into(o) if cat.dom(f) in support)
        covering.append(
            frozenset(
                s
                for s in sieves_on(cat, o)
                if (s | block) in topology.covers(o)
            )
        )
    return GrothendieckTopology(tuple(covering))


def transfer_points(
    cat: FinCategory, points: Sequence[ChainPoint], sub: Subpresheaf
) -> tuple[tuple[ChainPoint, ...], tuple[ChainPoint, ...]]:
    """Split points by whether their evaluation of the subterminal is empty.

    Points with empty value land in the closed complement and survive the
    passage; the others are cut away.
    """
    u, _ = sub_as_presheaf(sub)
    kept, dropped = [], []
    for p in points:
        if Evaluation(cat, p, u).classes:
            dropped.append(p)
        else:
            kept.append(p)
    return tuple(kept), tuple(dropped)


@dataclass(frozen=True)
class TinyReport:
    tiny: tuple[ObjId, ...]
    generation_ok: bool
    failures: tuple[tuple[ObjId, ObjId, int], ...]


def tiny_objects(cat: FinCategory, topology: GrothendieckTopology) -> TinyReport:
    """Objects whose representable presheaf is already a sheaf.

    Also checks that the chosen objects generate: every section of every
    sheafified representable must be the restriction of a section over some
    chosen object.  Failures are (representable, object, section) triples.
    """
    tiny = tuple(
        o for o in cat.objects() if sheaf_check(cat, topology, yoneda(cat, o)).sheaf
    )
    failures = []
    for d in cat.objects():
        assoc = sheafify(cat, topology, yoneda(cat, d)).sheaf
        for e in cat.objects():
            for z in range(assoc.size(e)):
                hit = any(
                    assoc.action[f][zz] == z
                    for c in tiny
                    for f in cat.hom(e, c)
                    for zz in range(assoc.size(c))
                )
                if not hit:
                    failures.append((d, e, z))
    return TinyReport(tiny, not failures, tuple(failures))
