import json

import pytest
from hypothesis import given, strategies as st

from siteforge import (
    ChainPoint,
    DenseTarget,
    Evaluation,
    Germ,
    NoDistinguishingLeg,
    NotAPullback,
    Presieve,
    PresheafMap,
    PresieveTarget,
    Sieve,
    SubobjectSquare,
    Subpresheaf,
    base_change_improvement,
    check_improvement,
    coamalgamation_from_pullbacks,
    compose_improvements,
    improve_dense,
    improve_step,
    improve_step_coamalg,
    pair_index,
    pair_unindex,
    reduce_to_warp,
    sub_as_presheaf,
    synthesize_point,
    yoneda_sieve_sub,
)
from siteforge.improve import refined_point
from siteforge.render import improvement_doc

from oracles import diagonal_pairs


def test_pairing_walks_the_diagonals():
    assert [pair_unindex(k) for k in range(6)] == diagonal_pairs(6)
    for k in range(10_000):
        a, b = pair_unindex(k)
        assert pair_index(a, b) == k


@given(st.integers(0, 3000), st.integers(0, 3000))
def test_pairing_round_trip(a, b):
    assert pair_unindex(pair_index(a, b)) == (a, b)
    assert pair_index(a, b) >= a


def _d2_handles(d2, d2_site):
    cat = d2.cat
    return (
        cat,
        d2_site.topology,
        d2_site.warp,
        d2.presheaves["prod2x2"],
        {name: cat.obj_index(name) for name in ("bot", "a", "b", "top")},
        {name: cat.mor_index(name) for name in cat.mor_names},
    )


def test_dense_target_reduces_to_the_warp_presieve(d2, d2_site):
    cat, topology, warp, x, o, m = _d2_handles(d2, d2_site)
    point = ChainPoint(o["top"], (), ())
    sieve = Sieve(o["top"], frozenset({m["a_top"], m["b_top"], m["bot_top"]}))
    target = DenseTarget(yoneda_sieve_sub(cat, sieve), Germ(0, 0))
    presieve = reduce_to_warp(cat, topology, warp, point, target)
    assert presieve.target == o["top"]
    assert sorted(cat.mor_names[f] for f in presieve.members) == ["a_top", "b_top"]


def test_improve_dense_lifts_into_the_subobject(d2, d2_site):
    cat, topology, warp, x, o, m = _d2_handles(d2, d2_site)
    point = ChainPoint(o["top"], (), ())
    sieve = Sieve(o["top"], frozenset({m["a_top"], m["b_top"], m["bot_top"]}))
    target = DenseTarget(yoneda_sieve_sub(cat, sieve), Germ(0, 0))
    imp = improve_dense(cat, topology, warp, point, x, Germ(0, 0), Germ(0, 1), target)
    assert cat.mor_names[imp.member] == "b_top"
    assert [cat.mor_names[s] for s in imp.extension] == ["b_top"]
    assert imp.witness == Germ(1, 0)
    assert check_improvement(cat, imp).ok
    assert refined_point(cat, imp).tail(cat) == o["b"]


def test_improve_step_picks_the_separating_leg(d2, d2_site):
    """The two product coordinates are told apart by the two legs."""
    cat, topology, warp, x, o, m = _d2_handles(d2, d2_site)
    point = ChainPoint(o["top"], (), ())
    target = PresieveTarget(
        Presieve(o["top"], frozenset({m["a_top"], m["b_top"]})), Germ(0, 0)
    )
    left = improve_step(cat, point, x, Germ(0, 0), Germ(0, 2), target)
    assert cat.mor_names[left.member] == "a_top"
    assert [cat.mor_names[s] for s in left.extension] == ["a_top"]
    assert left.witness == Germ(1, 0)
    assert check_improvement(cat, left).ok
    right = improve_step(cat, point, x, Germ(0, 0), Germ(0, 1), target)
    assert cat.mor_names[right.member] == "b_top"
    assert right.witness == Germ(1, 0)
    assert check_improvement(cat, right).ok


def test_improvements_compose_over_the_refined_point(d2, d2_site):
    cat, topology, warp, x, o, m = _d2_handles(d2, d2_site)
    point = ChainPoint(o["top"], (), ())
    target = PresieveTarget(
        Presieve(o["top"], frozenset({m["a_top"], m["b_top"]})), Germ(0, 0)
    )
    first = improve_step(cat, point, x, Germ(0, 0), Germ(0, 2), target)
    p1 = refined_point(cat, first)
    second = improve_step(cat, p1, x, Germ(1, 0), Germ(1, 1), target)
    assert cat.mor_names[second.member] == "a_top"
    assert [cat.mor_names[s] for s in second.extension] == ["id_a"]
    assert second.witness == Germ(2, 0)

    as_first, as_second = compose_improvements(cat, first, second)
    names = [cat.mor_names[s] for s in as_first.extension]
    assert names == ["a_top", "id_a"]
    assert as_second.extension == as_first.extension
    assert as_second.witness == Germ(2, 0)
    assert check_improvement(cat, as_first).ok
    assert check_improvement(cat, as_second).ok

    with pytest.raises(ValueError, match="does not start at the refined point"):
        compose_improvements(cat, first, first)


def test_dual_composition_stacks_subobjects(d2, d2_site):
    cat, topology, warp, x, o, m = _d2_handles(d2, d2_site)
    point = ChainPoint(o["top"], (), ())
    sieve = Sieve(o["top"], frozenset({m["a_top"], m["b_top"], m["bot_top"]}))
    outer = yoneda_sieve_sub(cat, sieve)
    first = improve_dense(
        cat, topology, warp, point, x, Germ(0, 0), Germ(0, 1), DenseTarget(outer, Germ(0, 0))
    )
    outer_mat, _ = sub_as_presheaf(outer)
    inner = Subpresheaf(
        outer_mat,
        {
            o["top"]: frozenset(),
            o["a"]: frozenset(),
            o["b"]: frozenset({0}),
            o["bot"]: frozenset({0}),
        },
    )
    p1 = refined_point(cat, first)
    second = improve_dense(
        cat, topology, warp, p1, x, Germ(0, 0), Germ(0, 1), DenseTarget(inner, Germ(1, 0))
    )
    assert cat.mor_names[second.member] == "id_b"
    assert second.witness == Germ(2, 0)

    dual = compose_improvements(cat, first, second, dual=True)
    assert [cat.mor_names[s] for s in dual.extension] == ["b_top", "id_b"]
    assert dual.member is None
    assert dual.witness == Germ(2, 0)
    assert check_improvement(cat, dual).ok
    members = {cat.obj_names[ob]: sorted(dual.data.target.sub.members[ob]) for ob in cat.objects()}
    assert members == {"bot": [0], "a": [], "b": [0], "top": []}


def test_empty_presieve_has_no_leg(d2, d2_site):
    cat, topology, warp, x, o, m = _d2_handles(d2, d2_site)
    point = ChainPoint(o["top"], (), ())
    target = PresieveTarget(Presieve(o["top"], frozenset()), Germ(0, 0))
    with pytest.raises(NoDistinguishingLeg) as exc:
        improve_step(cat, point, x, Germ(0, 0), Germ(0, 1), target)
    assert exc.value.witnesses == ()
    assert str(exc.value) == "empty presieve"


def test_per_member_failure_reports(cospan_v):
    cat = cospan_v.cat
    c = cat.obj_index("C")
    f, g = cat.mor_index("f"), cat.mor_index("g")
    pairs = cospan_v.presheaves["pairsheaf"]
    point = ChainPoint(c, (f,), ())
    target = PresieveTarget(Presieve(c, frozenset({f, g})), Germ(0, 0))
    with pytest.raises(NoDistinguishingLeg) as exc:
        improve_step(cat, point, pairs, Germ(0, 0), Germ(0, 1), target)
    reports = [(cat.mor_names[mor], why) for mor, why in exc.value.witnesses]
    assert reports == [("f", "sections still agree"), ("g", "no completing square")]


def _inclusion_square(cat, sub, sub2):
    """Square whose top is the inclusion of sub into sub2 over the identity."""
    sub_mat, _ = sub_as_presheaf(sub)
    sub2_mat, _ = sub_as_presheaf(sub2)
    comp = {}
    for ob in cat.objects():
        dst = sub2.sorted_members(ob)
        comp[ob] = tuple(dst.index(amb) for amb in sub.sorted_members(ob))
    top = PresheafMap(sub_mat, sub2_mat, comp)
    ident = PresheafMap(
        sub.of, sub2.of, {ob: tuple(range(sub.of.size(ob))) for ob in cat.objects()}
    )
    return SubobjectSquare(sub, sub2, top, ident)


def test_base_change_forward(d2, d2_site):
    cat, topology, warp, x, o, m = _d2_handles(d2, d2_site)
    point = ChainPoint(o["top"], (), ())
    sieve = Sieve(o["top"], frozenset({m["a_top"], m["b_top"], m["bot_top"]}))
    sub = yoneda_sieve_sub(cat, sieve)
    imp = improve_dense(
        cat, topology, warp, point, x, Germ(0, 0), Germ(0, 1), DenseTarget(sub, Germ(0, 0))
    )
    maximal = Sieve(o["top"], frozenset({m["a_top"], m["b_top"], m["bot_top"], m["id_top"]}))
    sub2 = yoneda_sieve_sub(cat, maximal)
    square = _inclusion_square(cat, sub, sub2)
    square.validate(cat)
    assert not square.is_pullback(cat)

    pushed = base_change_improvement(cat, imp, square)
    assert [cat.mor_names[s] for s in pushed.extension] == ["b_top"]
    assert pushed.witness == Germ(1, 0)
    assert pushed.data.target.sub is sub2
    assert check_improvement(cat, pushed).ok

    with pytest.raises(NotAPullback, match="not an elementwise pullback"):
        base_change_improvement(cat, imp, square, converse=True, base_witness=Germ(0, 0))


def test_base_change_converse(d2, d2_site):
    cat, topology, warp, x, o, m = _d2_handles(d2, d2_site)
    point = ChainPoint(o["top"], (), ())
    sieve = Sieve(o["top"], frozenset({m["a_top"], m["b_top"], m["bot_top"]}))
    sub = yoneda_sieve_sub(cat, sieve)
    imp = improve_dense(
        cat, topology, warp, point, x, Germ(0, 0), Germ(0, 1), DenseTarget(sub, Germ(0, 0))
    )
    bang = PresheafMap(
        x, sub.of, {ob: tuple(0 for _ in range(x.size(ob))) for ob in cat.objects()}
    )
    pre = Subpresheaf(
        x,
        {
            ob: frozenset(
                t for t in range(x.size(ob)) if bang.components[ob][t] in sub.members[ob]
            )
            for ob in cat.objects()
        },
    )
    assert {cat.obj_names[ob]: len(pre.members[ob]) for ob in cat.objects()} == {
        "bot": 1,
        "a": 2,
        "b": 2,
        "top": 0,
    }
    pre_mat, _ = sub_as_presheaf(pre)
    sub_mat, _ = sub_as_presheaf(sub)
    comp = {}
    for ob in cat.objects():
        dst = sub.sorted_members(ob)
        comp[ob] = tuple(dst.index(bang.components[ob][amb]) for amb in pre.sorted_members(ob))
    square = SubobjectSquare(pre, sub, PresheafMap(pre_mat, sub_mat, comp), bang)
    square.validate(cat)
    assert square.is_pullback(cat)

    with pytest.raises(ValueError, match="needs the base ambient witness"):
        base_change_improvement(cat, imp, square, converse=True)

    back = base_change_improvement(cat, imp, square, converse=True, base_witness=Germ(0, 0))
    assert [cat.mor_names[s] for s in back.extension] == ["b_top"]
    assert back.member is None
    assert back.witness == Germ(1, 0)
    assert back.data.target.sub is pre
    assert check_improvement(cat, back).ok


def test_base_change_stage_bound(d2, d2_site):
    """A base witness deeper than the original prefix is rejected."""
    cat, topology, warp, x, o, m = _d2_handles(d2, d2_site)
    point = ChainPoint(o["top"], (), ())
    sieve = Sieve(o["top"], frozenset({m["a_top"], m["b_top"], m["bot_top"]}))
    sub = yoneda_sieve_sub(cat, sieve)
    imp = improve_dense(
        cat, topology, warp, point, x, Germ(0, 0), Germ(0, 1), DenseTarget(sub, Germ(0, 0))
    )
    from siteforge import yoneda

    yb = yoneda(cat, o["b"])
    full = Subpresheaf(yb, {ob: frozenset(range(yb.size(ob))) for ob in cat.objects()})
    full_mat, _ = sub_as_presheaf(full)
    sub_mat, _ = sub_as_presheaf(sub)
    bottom = {
        ob: tuple(
            cat.hom(ob, o["top"]).index(cat.compose(f, m["b_top"]))
            for f in cat.hom(ob, o["b"])
        )
        for ob in cat.objects()
    }
    comp = {}
    for ob in cat.objects():
        dst = sub.sorted_members(ob)
        comp[ob] = tuple(
            dst.index(cat.hom(ob, o["top"]).index(cat.compose(cat.hom(ob, o["b"])[k], m["b_top"])))
            for k in full.sorted_members(ob)
        )
    square = SubobjectSquare(
        full, sub, PresheafMap(full_mat, sub_mat, comp), PresheafMap(yb, sub.of, bottom)
    )
    square.validate(cat)
    assert square.is_pullback(cat)
    with pytest.raises(ValueError, match="past the end of the prefix"):
        base_change_improvement(cat, imp, square, converse=True, base_witness=Germ(1, 0))


def test_synthesis_separates_the_product(d2, d2_site):
    cat, topology, warp, x, o, m = _d2_handles(d2, d2_site)
    result = synthesize_point(cat, topology, warp, x, o["top"], 0, 1)
    assert result.ok
    assert result.point.start == o["top"]
    assert [cat.mor_names[s] for s in result.point.steps] == ["b_top"]
    assert result.point.cycle == ()
    assert result.witness_classes == (0, 1)
    trace = [
        (t.k, t.stage, t.presieve_index, cat.mor_names[t.member], cat.mor_names[t.step])
        for t in result.trace
    ]
    assert trace == [(0, 0, 0, "b_top", "b_top")]
    assert result.certificate.ok


def test_synthesis_budget_exhaustion(d2, d2_site):
    cat, topology, warp, x, o, m = _d2_handles(d2, d2_site)
    result = synthesize_point(cat, topology, warp, x, o["top"], 0, 1, max_steps=0)
    assert not result.ok
    assert result.reason == "max steps exhausted"
    assert result.trace == ()


def test_synthesis_dead_end(d2, d2_site):
    cat, topology, warp, _, o, m = _d2_handles(d2, d2_site)
    tp = d2.presheaves["twopoint"]
    result = synthesize_point(cat, topology, warp, tp, o["bot"], 0, 1)
    assert not result.ok
    assert result.reason == "no distinguishing leg"
    assert result.leg_failures == ()


def test_synthesis_rejects_equal_sections(d2, d2_site):
    cat, topology, warp, x, o, m = _d2_handles(d2, d2_site)
    with pytest.raises(ValueError, match="two distinct sections"):
        synthesize_point(cat, topology, warp, x, o["top"], 1, 1)


def test_coamalgamation_route_matches_pullback_search(d2, d2_site):
    cat, topology, warp, x, o, m = _d2_handles(d2, d2_site)
    data = coamalgamation_from_pullbacks(cat)
    point = ChainPoint(o["top"], (), ())
    target = PresieveTarget(
        Presieve(o["top"], frozenset({m["a_top"], m["b_top"]})), Germ(0, 0)
    )
    for x_germ, y_germ in ((Germ(0, 0), Germ(0, 2)), (Germ(0, 0), Germ(0, 1))):
        plain = improve_step(cat, point, x, x_germ, y_germ, target)
        tabled = improve_step_coamalg(cat, data, point, x, x_germ, y_germ, target)
        assert json.dumps(improvement_doc(cat, plain), sort_keys=True) == json.dumps(
            improvement_doc(cat, tabled), sort_keys=True
        )
