import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from siteforge import (
    Cotree,
    Presieve,
    Sieve,
    Warp,
    check_coamalgamation,
    close_under_pullbacks,
    coamalgamation_from_pullbacks,
    is_warp,
    is_woven,
    multicomposite,
    pullback_sieve,
    saturate,
    sieve_generated,
)
from siteforge.catalog import chain_poset, fin_skeleton, load_example, mono_pushout_amalgamation
from siteforge.sites import sieves_on

from generators import rand_poset, rand_warp
from oracles import least_topology


def test_sieve_generated_closes_under_precomposition(d2):
    cat = d2.cat
    top = cat.obj_index("top")
    gen = sieve_generated(cat, Presieve(top, frozenset({cat.mor_index("a_top"), cat.mor_index("b_top")})))
    assert gen.members == {
        cat.mor_index(n) for n in ("a_top", "b_top", "bot_top")
    }


def test_pullback_of_a_sieve_along_a_member_is_maximal(d2):
    cat = d2.cat
    top = cat.obj_index("top")
    s = Sieve(top, frozenset({cat.mor_index(n) for n in ("a_top", "b_top", "bot_top")}))
    pulled = pullback_sieve(cat, s, cat.mor_index("a_top"))
    assert pulled.members == set(cat.into(cat.obj_index("a")))


def test_sieves_on_counts(d2):
    assert [len(sieves_on(d2.cat, o)) for o in d2.cat.objects()] == [2, 3, 3, 6]


def test_warp_from_members_validates(d2):
    cat = d2.cat
    top = cat.obj_index("top")
    w = Warp.from_members(cat, {top: [[cat.mor_index("a_top"), cat.mor_index("b_top")]]})
    w.validate(cat)
    assert len(w.at(top)) == 1
    with pytest.raises(ValueError):
        bad = Warp.from_members(cat, {top: [[cat.mor_index("bot_a")]]})
        bad.validate(cat)


def test_saturate_matches_brute_force_on_the_diamond(d2):
    cat, warp = d2.cat, d2.warp
    topology = saturate(cat, warp)
    forced = {o: [p.members for p in warp.at(o)] for o in cat.objects()}
    oracle = least_topology(cat, forced)
    assert all(oracle[o] == topology.covering[o] for o in cat.objects())
    assert topology.counts() == (2, 1, 1, 2)


@given(st.integers(0, 60))
def test_saturate_output_satisfies_the_topology_axioms(seed):
    """Maximal sieve present, pullback stable, and locally closed."""
    rng = random.Random(seed)
    cat = rand_poset(rng, 4)
    warp = rand_warp(rng, cat)
    topology = saturate(cat, warp)
    for o in cat.objects():
        covers = topology.covers(o)
        assert frozenset(cat.into(o)) in covers
        for s in covers:
            for h in cat.into(o):
                pulled = pullback_sieve(cat, Sieve(o, s), h)
                assert pulled.members in topology.covers(cat.dom(h))
    for o in cat.objects():
        for s in sieves_on(cat, o):
            if s in topology.covers(o):
                continue
            for r in topology.covers(o):
                locally = all(
                    pullback_sieve(cat, Sieve(o, s), f).members
                    in topology.covers(cat.dom(f))
                    for f in r
                )
                assert not locally


def test_covers_and_is_covering(d2, d2_site):
    cat = d2.cat
    topology = d2_site.topology
    top = cat.obj_index("top")
    proper = frozenset({cat.mor_index(n) for n in ("a_top", "b_top", "bot_top")})
    assert topology.is_covering(top, proper)
    assert not topology.is_covering(top, frozenset({cat.mor_index("a_top"), cat.mor_index("bot_top")}))


def test_cotree_validation_and_multicomposite(d2):
    cat = d2.cat
    top, b = cat.obj_index("top"), cat.obj_index("b")
    leaf = Cotree(b)
    assert multicomposite(cat, leaf).members == {cat.identity(b)}
    tree = Cotree(top, ((cat.mor_index("b_top"), leaf),))
    tree.validate(cat)
    assert multicomposite(cat, tree).members == {cat.mor_index("b_top")}
    with pytest.raises(ValueError, match="cotree edge endpoints"):
        Cotree(top, ((cat.mor_index("bot_a"), leaf),)).validate(cat)


def test_warp_conditions_hold_on_the_diamond(d2, d2_site):
    report = is_warp(d2.cat, d2_site.topology, d2.warp)
    assert report.verdict == "pass"
    assert report.stability_failures == ()
    assert report.undecided == ()
    covered = {(o, s) for o, s, _ in report.witnesses}
    assert len(covered) == sum(d2_site.topology.counts())


def test_warp_conditions_fail_on_the_cospan(cospan_v):
    site = cospan_v.site()
    report = is_warp(cospan_v.cat, site.topology, cospan_v.warp)
    assert report.verdict == "fail"
    names = [
        (cospan_v.cat.obj_names[o], k, cospan_v.cat.mor_names[h])
        for o, k, h in report.stability_failures
    ]
    assert names == [("C", 0, "f"), ("C", 0, "g")]


def test_deep_cotree_needs_the_full_depth_budget():
    """A five-object chain hides its lowest cover behind four refinements."""
    cat = chain_poset(5)
    rows = {cat.obj_index("c0"): [[cat.mor_index("id_c0")]]}
    for i in range(4):
        rows[cat.obj_index(f"c{i + 1}")] = [[cat.mor_index(f"c{i}_to_c{i + 1}")]]
    warp = Warp.from_members(cat, rows)
    topology = saturate(cat, warp)
    assert topology.counts() == (1, 2, 3, 4, 5)

    shallow = is_warp(cat, topology, warp, depth=2)
    assert shallow.verdict == "undecided"
    assert len(shallow.undecided) == 3

    deep = is_warp(cat, topology, warp, depth=4)
    assert deep.verdict == "pass"
    tall = [(o, s, t) for o, s, t in deep.witnesses if t.height() == 4]
    assert len(tall) == 1
    o, s, tree = tall[0]
    assert cat.obj_names[o] == "c4"
    assert multicomposite(cat, tree).members == {cat.mor_index("c0_to_c4")}


def test_woven_verdicts_across_the_bundles():
    expected = {
        "site_d2": ("pass", (1, 1, 1, 1)),
        "sierpinski": ("pass", (1, 0, 0)),
        "monoid_e": ("pass", (1,)),
        "site_d2_nobot": ("pass", (1, 1, 1, 1)),
        "cospan_v": ("fail", (0, 0, 1)),
        "one_object": ("pass", (0,)),
    }
    for name, (verdict, counts) in expected.items():
        bundle = load_example(name)
        site = bundle.site()
        report = is_woven(bundle.cat, site.topology, site.warp)
        assert (report.verdict, report.presieve_counts) == (verdict, counts), name


def test_close_under_pullbacks_is_a_no_op_on_the_diamond(d2):
    result = close_under_pullbacks(d2.cat, d2.warp)
    assert result.new_object_cards == ()
    assert result.site.cat.n_objects == 4


def test_close_under_pullbacks_adds_the_missing_corner(cospan_v):
    result = close_under_pullbacks(cospan_v.cat, cospan_v.warp)
    assert result.new_object_cards == ((0, 0, 0),)
    names = [result.site.cat.obj_names[o] for o in result.site.cat.objects()]
    assert names == ["A", "B", "C", "P0"]


def test_coamalgamation_from_pullbacks_on_the_diamond(d2, d2_site):
    data = coamalgamation_from_pullbacks(d2.cat)
    assert data.orientation == "cospan"
    assert len(data.apex) == 25
    report = check_coamalgamation(d2.cat, data, warp=d2.warp, topology=d2_site.topology)
    assert report.ok
    assert report.violations == ()


def test_mono_amalgamation_data_is_honestly_partial():
    """Set-level pushout squares of monos need not assemble functorially."""
    cat = fin_skeleton(2, mono=True)
    data = mono_pushout_amalgamation(cat)
    assert data.orientation == "span"
    assert len(data.on_mor) == 192
    report = check_coamalgamation(cat, data)
    assert not report.ok
    by_detail = Counter(v.detail for v in report.violations)
    assert by_detail == {"missing square": 7, "no apex morphism for this arrow": 13}
