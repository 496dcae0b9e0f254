"""Seeded construction of small sites and presheaves for the property suites.

Everything is driven by a ``random.Random`` instance, so a seed pins the
whole instance; presheaves are built as quotients of coproducts of
representables, which keeps functoriality true by construction.
"""

from __future__ import annotations

import random

from siteforge.catalog import poset_category
from siteforge.fincat import FinCategory
from siteforge.presheaf import (
    Presheaf,
    coproduct_presheaf,
    terminal_presheaf,
    yoneda,
)
from siteforge.sites import Warp


def rand_poset(rng: random.Random, max_objects: int = 5) -> FinCategory:
    n = rng.randint(2, max_objects)
    names = [f"p{i}" for i in range(n)]
    # edges point from lower to higher index, so the relation is acyclic
    below = [
        (names[i], names[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < 0.45
    ]
    return poset_category(names, below)


def rand_warp(rng: random.Random, cat: FinCategory) -> Warp:
    rows: dict[int, list] = {}
    for o in cat.objects():
        proper = [f for f in cat.into(o) if not cat.is_identity(f)]
        if proper and rng.random() < 0.7:
            rows[o] = [rng.sample(proper, rng.randint(1, len(proper)))]
    return Warp.from_members(cat, rows)


def quotient_presheaf(x: Presheaf, pairs, name: str = "q") -> Presheaf:
    """Quotient by the congruence generated by the given identifications.

    ``pairs`` lists (object, elem, elem) triples; closure propagates along
    every restriction row until stable, so the result is again a presheaf.
    """
    cat = x.cat
    parent = [list(range(x.size(o))) for o in cat.objects()]

    def find(o: int, e: int) -> int:
        while parent[o][e] != e:
            parent[o][e] = parent[o][parent[o][e]]
            e = parent[o][e]
        return e

    def union(o: int, a: int, b: int) -> bool:
        ra, rb = find(o, a), find(o, b)
        if ra == rb:
            return False
        parent[o][max(ra, rb)] = min(ra, rb)
        return True

    for o, a, b in pairs:
        union(o, a, b)
    changed = True
    while changed:
        changed = False
        for m in cat.morphisms():
            o, d = cat.cod(m), cat.dom(m)
            row = x.action[m]
            for a in range(x.size(o)):
                if union(d, row[a], row[find(o, a)]):
                    changed = True

    reps = [[find(o, e) for e in range(x.size(o))] for o in cat.objects()]
    uniq = [sorted(set(reps[o])) for o in cat.objects()]
    pos = [{r: i for i, r in enumerate(uniq[o])} for o in cat.objects()]
    elements = tuple(
        tuple(
            "+".join(
                sorted(x.label(o, e) for e in range(x.size(o)) if reps[o][e] == r)
            )
            for r in uniq[o]
        )
        for o in cat.objects()
    )
    action = tuple(
        tuple(
            pos[cat.dom(m)][reps[cat.dom(m)][x.action[m][r]]] for r in uniq[cat.cod(m)]
        )
        for m in cat.morphisms()
    )
    return Presheaf(x.cat, elements, action, name)


def rand_presheaf(rng: random.Random, cat: FinCategory, name: str = "x") -> Presheaf:
    """A few representables glued by random identifications.

    On a poset each representable contributes at most one section per
    object, so sizes stay at or below four sections everywhere.
    """
    summands = [
        yoneda(cat, rng.randrange(cat.n_objects)) for _ in range(rng.randint(1, 3))
    ]
    if rng.random() < 0.35:
        summands.append(terminal_presheaf(cat))
    acc = summands[0]
    for s in summands[1:]:
        acc, _, _ = coproduct_presheaf(acc, s)
    pairs = []
    for _ in range(rng.randint(0, 2)):
        o = rng.randrange(cat.n_objects)
        if acc.size(o) >= 2:
            pairs.append((o, *rng.sample(range(acc.size(o)), 2)))
    return quotient_presheaf(acc, pairs, name)
