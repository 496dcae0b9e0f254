"""Programmatic example categories and square data used by tests and docs.

Everything here is constructed rather than hand-tabulated: poset categories
from an order relation, skeletons of finite sets (all functions or just the
injections), and pushout square data for spans of injections computed
set-theoretically.
"""

from __future__ import annotations

import itertools
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .fincat import FinCategory, MorId, validate_category
from .sites import CoamalgamationData, _span_morphisms
from .specfile import SiteBundle, load_bundle

EXAMPLES = (
    "cospan_v",
    "monoid_e",
    "one_object",
    "sierpinski",
    "site_d2",
    "site_d2_nobot",
)


def example_path(name: str) -> Path:
    if name not in EXAMPLES:
        raise KeyError(f"no bundled example named {name!r}")
    return Path(str(resources.files("siteforge").joinpath("data", f"{name}.json")))


def load_example(name: str) -> SiteBundle:
    return load_bundle(example_path(name))


def poset_category(names: Sequence[str], below: Iterable[tuple[str, str]]) -> FinCategory:
    """Finite poset as a category: one morphism per related pair.

    ``below`` lists generating strict relations; the reflexive-transitive
    closure is taken, and each related pair (a, b) yields ``a_to_b``.
    """
    n = len(names)
    idx = {s: i for i, s in enumerate(names)}
    leq = [[a == b for b in range(n)] for a in range(n)]
    for a, b in below:
        leq[idx[a]][idx[b]] = True
    for k in range(n):
        for a in range(n):
            for b in range(n):
                leq[a][b] = leq[a][b] or (leq[a][k] and leq[k][b])

    mor_names, dom, cod = [], [], []
    mid = {}
    for a in range(n):
        for b in range(n):
            if leq[a][b]:
                mid[(a, b)] = len(mor_names)
                mor_names.append(f"id_{names[a]}" if a == b else f"{names[a]}_to_{names[b]}")
                dom.append(a)
                cod.append(b)
    identity_of = [mid[(a, a)] for a in range(n)]
    entries = [
        (mid[(a, b)], mid[(b, c)], mid[(a, c)])
        for a in range(n)
        for b in range(n)
        for c in range(n)
        if leq[a][b] and leq[b][c]
    ]
    return validate_category(names, mor_names, dom, cod, identity_of, entries)


def chain_poset(n: int) -> FinCategory:
    names = [f"c{i}" for i in range(n)]
    return poset_category(names, [(f"c{i}", f"c{i+1}") for i in range(n - 1)])


def _functions(d: int, c: int, mono: bool) -> list[tuple[int, ...]]:
    if mono:
        return sorted(itertools.permutations(range(c), d))
    return sorted(itertools.product(range(c), repeat=d))


def fin_skeleton(n: int, mono: bool = False) -> FinCategory:
    """Skeleton of finite sets on cardinalities 0..n, fully validated.

    Morphism names encode the underlying function, e.g. ``f2t3_01`` sends
    0 to 0 and 1 to 1; with ``mono=True`` only injections are kept.
    """
    names = [str(k) for k in range(n + 1)]
    mor_names, dom, cod, funcs = [], [], [], []
    mid: dict[tuple[int, int, tuple[int, ...]], MorId] = {}
    for d in range(n + 1):
        for c in range(n + 1):
            for fun in _functions(d, c, mono):
                mid[(d, c, fun)] = len(mor_names)
                mor_names.append(f"f{d}t{c}_" + "".join(map(str, fun)))
                dom.append(d)
                cod.append(c)
                funcs.append(fun)
    identity_of = [mid[(k, k, tuple(range(k)))] for k in range(n + 1)]
    entries = []
    for f, fun_f in enumerate(funcs):
        for g, fun_g in enumerate(funcs):
            if cod[f] != dom[g]:
                continue
            composite = tuple(fun_g[v] for v in fun_f)
            entries.append((f, g, mid[(dom[f], cod[g], composite)]))
    return validate_category(names, mor_names, dom, cod, identity_of, entries)


def fin_function(cat: FinCategory, m: MorId) -> tuple[int, ...]:
    """Decode the underlying function of a skeleton morphism from its name."""
    digits = cat.mor_names[m].split("_", 1)[1]
    return tuple(int(ch) for ch in digits)


def _set_pushout(
    fun_f: tuple[int, ...], fun_g: tuple[int, ...], m: int, n: int
) -> tuple[int, list[int], list[int]]:
    """Pushout of two injections out of a common finite set.

    Returns the apex cardinality and both leg functions, with apex elements
    numbered by first occurrence scanning the left copy then the right.
    """
    parent = list(range(m + n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for d in range(len(fun_f)):
        ra, rb = find(fun_f[d]), find(m + fun_g[d])
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    order: dict[int, int] = {}
    for a in range(m + n):
        r = find(a)
        if r not in order:
            order[r] = len(order)
    left = [order[find(i)] for i in range(m)]
    right = [order[find(m + j)] for j in range(n)]
    return len(order), left, right


def mono_pushout_amalgamation(cat: FinCategory) -> CoamalgamationData:
    """Span squares for an injection skeleton, via set-level pushouts.

    Squares whose pushout outgrows the skeleton are left out, and arrow
    images whose induced comparison map is not injective are recorded as
    None; the checker reports both honestly.
    """
    top = cat.n_objects - 1
    spans = [
        (f, g)
        for f in cat.morphisms()
        for g in cat.morphisms()
        if cat.dom(f) == cat.dom(g)
    ]
    apex: dict[tuple[MorId, MorId], int] = {}
    left: dict[tuple[MorId, MorId], MorId] = {}
    right: dict[tuple[MorId, MorId], MorId] = {}
    legs: dict[tuple[MorId, MorId], tuple[list[int], list[int]]] = {}
    for f, g in spans:
        m, n = cat.cod(f), cat.cod(g)
        card, lf, rf = _set_pushout(fin_function(cat, f), fin_function(cat, g), m, n)
        if card > top:
            continue
        key = (f, g)
        apex[key] = card
        legs[key] = (lf, rf)
        left[key] = cat.mor_index(f"f{m}t{card}_" + "".join(map(str, lf)))
        right[key] = cat.mor_index(f"f{n}t{card}_" + "".join(map(str, rf)))

    on_mor: dict = {}
    for src in spans:
        if src not in apex:
            continue
        for dst in spans:
            if dst not in apex:
                continue
            for triple in _span_morphisms(cat, src, dst):
                alpha, _delta, beta = triple
                fa = fin_function(cat, alpha)
                fb = fin_function(cat, beta)
                lf_s, rf_s = legs[src]
                lf_d, rf_d = legs[dst]
                induced = [-1] * apex[src]
                ok = True
                for i, cls in enumerate(lf_s):
                    v = lf_d[fa[i]]
                    if induced[cls] not in (-1, v):
                        ok = False
                    induced[cls] = v
                for j, cls in enumerate(rf_s):
                    v = rf_d[fb[j]]
                    if induced[cls] not in (-1, v):
                        ok = False
                    induced[cls] = v
                if not ok or len(set(induced)) != len(induced):
                    on_mor[(src, dst, triple)] = None
                    continue
                on_mor[(src, dst, triple)] = cat.mor_index(
                    f"f{apex[src]}t{apex[dst]}_" + "".join(map(str, induced))
                )
    return CoamalgamationData("span", apex, left, right, on_mor)
