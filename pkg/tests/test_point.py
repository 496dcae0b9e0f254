import random

import pytest
from hypothesis import given, strategies as st

from siteforge import (
    ChainPoint,
    Cochain,
    Evaluation,
    Germ,
    check_cocontinuity,
    check_lexity,
    check_projectivity,
    concat_certified,
    eval_on_map,
    eval_point,
    extend_chain,
    push_classes,
    yoneda,
)
from siteforge.point import Cone
from siteforge.presheaf import (
    PresheafMap,
    compose_maps,
    element_map,
    identity_map,
    product_presheaf,
)

from generators import rand_poset, rand_presheaf
from oracles import chain_colimit


def test_constant_chain_recovers_the_sections(d2):
    cat = d2.cat
    x = d2.presheaves["prod2x2"]
    ev = eval_point(cat, Cochain(cat.obj_index("top"), (), ()), x)
    assert sorted(ev.classes) == [0, 1, 2, 3]
    assert ev.class_label(0) == "00"


def test_representable_point_recovers_hom(d2):
    cat = d2.cat
    a = cat.obj_index("a")
    ev = eval_point(cat, Cochain(a, (), ()), yoneda(cat, cat.obj_index("top")))
    assert len(ev.classes) == 1
    assert ev.class_label(next(iter(ev.classes))) == "a_top"


def test_two_step_chain_classes(d2):
    cat = d2.cat
    point = Cochain(cat.obj_index("top"), (cat.mor_index("a_top"), cat.mor_index("id_a")), ())
    ev = Evaluation(cat, point, d2.presheaves["prod2x2"])
    assert [ev.class_of(Germ(0, i)) for i in range(4)] == [0, 0, 1, 1]
    assert [ev.class_of(Germ(1, i)) for i in range(2)] == [0, 1]
    assert [ev.class_of(Germ(2, i)) for i in range(2)] == [0, 1]


def test_monoid_cycle_matches_brute_force_colimit(monoid_e):
    """The germ classes agree with an unrolled finite colimit."""
    cat = monoid_e.cat
    x = monoid_e.presheaves["regular"]
    point = Cochain(cat.obj_index("star"), (), (cat.mor_index("e"),))
    ev = Evaluation(cat, point, x)
    count, images = chain_colimit(cat, x, point, germs=[(0, 0), (0, 1)])
    assert len(ev.classes) == count == 1
    assert (images[(0, 0)] == images[(0, 1)]) == (
        ev.class_of(Germ(0, 0)) == ev.class_of(Germ(0, 1))
    )


def test_fixed_sections_survive_the_cycle(monoid_e):
    cat = monoid_e.cat
    x = monoid_e.presheaves["fixedpair"]
    point = Cochain(cat.obj_index("star"), (), (cat.mor_index("e"),))
    ev = Evaluation(cat, point, x)
    count, _ = chain_colimit(cat, x, point)
    assert len(ev.classes) == count


@given(st.integers(0, 60))
def test_acyclic_evaluation_matches_the_oracle(seed):
    rng = random.Random(seed)
    cat = rand_poset(rng, 4)
    x = rand_presheaf(rng, cat)
    start = rng.randrange(cat.n_objects)
    steps = []
    here = start
    for _ in range(2):
        arrows = [f for f in cat.into(here) if not cat.is_identity(f)]
        if not arrows:
            break
        step = rng.choice(arrows)
        steps.append(step)
        here = cat.dom(step)
    point = Cochain(start, tuple(steps), ())
    ev = Evaluation(cat, point, x)
    germs = [(0, e) for e in range(x.size(start))]
    count, images = chain_colimit(cat, x, point, germs=germs)
    assert len(ev.classes) == count
    for (s1, e1) in germs:
        for (s2, e2) in germs:
            lib = ev.class_of(Germ(s1, e1)) == ev.class_of(Germ(s2, e2))
            assert lib == (images[(s1, e1)] == images[(s2, e2)])


def test_push_classes_requires_the_same_presheaf(d2):
    cat = d2.cat
    point = Cochain(cat.obj_index("top"), (), ())
    ev = Evaluation(cat, point, d2.presheaves["prod2x2"])
    swap = identity_map(d2.presheaves["twopoint"])
    with pytest.raises(ValueError, match="does not start at the evaluated presheaf"):
        push_classes(ev, swap)


def test_eval_on_map_identity_and_composites(d2):
    cat = d2.cat
    point = Cochain(cat.obj_index("top"), (cat.mor_index("a_top"),), ())
    x = d2.presheaves["prod2x2"]
    assert eval_on_map(cat, point, identity_map(x)) == {0: 0, 1: 1}
    flip, ident = d2.maps["flip_b"], d2.maps["ident"]
    composite = eval_on_map(cat, point, compose_maps(flip, ident))
    step1 = eval_on_map(cat, point, flip)
    step2 = eval_on_map(cat, point, ident)
    assert composite == {c: step2[step1[c]] for c in step1}


def test_eval_on_map_projection_is_surjective(d2):
    cat = d2.cat
    top = cat.obj_index("top")
    prod, proj, _ = product_presheaf(d2.presheaves["prod2x2"], d2.presheaves["twopoint"])
    for point in (Cochain(top, (), ()), Cochain(top, (cat.mor_index("a_top"),), ())):
        push = eval_on_map(cat, point, proj)
        target = Evaluation(cat, point, d2.presheaves["prod2x2"])
        assert set(push.values()) == set(target.classes)
        source = Evaluation(cat, point, prod)
        tail = point.tail(cat)
        for e in range(prod.size(tail)):
            lhs = push[source.class_of(Germ(len(point.steps), e))]
            rhs = target.class_of(Germ(len(point.steps), proj.components[tail][e]))
            assert lhs == rhs


def test_extend_chain_and_errors(d2):
    cat = d2.cat
    top = cat.obj_index("top")
    point = Cochain(top, (), ())
    longer = extend_chain(cat, point, cat.mor_index("a_top"))
    assert longer.steps == (cat.mor_index("a_top"),)
    with pytest.raises(ValueError, match="must land in the current tail"):
        extend_chain(cat, point, cat.mor_index("bot_a"))
    cyclic = Cochain(top, (), (cat.mor_index("id_top"),))
    with pytest.raises(ValueError, match="already cycles"):
        extend_chain(cat, cyclic, cat.mor_index("a_top"))


def test_concat_certified_folds_segments(d2):
    cat = d2.cat
    point = Cochain(cat.obj_index("top"), (), ())
    chained = concat_certified(
        cat, point, [(cat.mor_index("a_top"),), (cat.mor_index("id_a"),)]
    )
    assert chained.steps == (cat.mor_index("a_top"), cat.mor_index("id_a"))
    assert chained.tail(cat) == cat.obj_index("a")


def test_projectivity_certificate_at_an_irreducible(d2, d2_site):
    report = check_projectivity(d2.cat, d2_site.topology, Cochain(d2.cat.obj_index("a"), (), ()))
    assert report.ok
    assert report.failure is None
    assert len(report.certificate) == 3


def test_projectivity_counterexample_at_the_join(d2, d2_site):
    cat = d2.cat
    report = check_projectivity(cat, d2_site.topology, Cochain(cat.obj_index("top"), (), ()))
    assert not report.ok
    obj, sieve, cls = report.failure
    assert cat.obj_names[obj] == "top"
    assert sorted(cat.mor_names[m] for m in sieve) == ["a_top", "b_top", "bot_top"]
    assert cls == 0


def test_projectivity_restored_one_step_down(d2, d2_site):
    cat = d2.cat
    point = Cochain(cat.obj_index("top"), (cat.mor_index("b_top"),), ())
    report = check_projectivity(cat, d2_site.topology, point)
    assert report.ok
    entries = [(cat.obj_names[e.obj], e.stage, cat.mor_names[e.member]) for e in report.certificate]
    assert entries == [("b", 1, "id_b"), ("top", 1, "b_top"), ("top", 1, "b_top")]


def test_lexity_on_the_meet_cone(d2):
    cat = d2.cat
    prod, p1, p2 = product_presheaf(
        yoneda(cat, cat.obj_index("a")), yoneda(cat, cat.obj_index("b"))
    )
    cone = Cone(prod, (p1, p2), ())
    at_bot = check_lexity(cat, Cochain(cat.obj_index("bot"), (), ()), cone)
    assert at_bot.ok and at_bot.checked_families == 1
    below_b = check_lexity(
        cat, Cochain(cat.obj_index("top"), (cat.mor_index("b_top"),), ()), cone
    )
    assert below_b.ok and below_b.checked_families == 0


def test_lexity_flags_a_non_limit_cone(d2):
    """An empty cone over a two-class evaluation admits two factorizations."""
    cat = d2.cat
    tp = d2.presheaves["twopoint"]
    report = check_lexity(cat, Cochain(cat.obj_index("bot"), (), ()), Cone(tp, (), ()))
    assert not report.ok
    assert report.checked_families == 1
    assert report.failure == ((), (0, 1))


def test_cone_validation(d2):
    cat = d2.cat
    tp = d2.presheaves["twopoint"]
    good = Cone(tp, (identity_map(tp), identity_map(tp)), ((0, 1, identity_map(tp)),))
    good.validate()
    report = check_lexity(cat, Cochain(cat.obj_index("bot"), (), ()), good)
    assert report.ok and report.checked_families == 2
    swap = PresheafMap(tp, tp, tuple((1, 0) for _ in cat.objects()))
    bad = Cone(tp, (identity_map(tp), identity_map(tp)), ((0, 1, swap),))
    with pytest.raises(ValueError, match="cone does not commute over arrow 0->1"):
        bad.validate()


def test_cocontinuity_over_the_covering_family(d2):
    cat = d2.cat
    ytop = yoneda(cat, cat.obj_index("top"))
    family = (
        element_map(ytop, cat.obj_index("a"), 0),
        element_map(ytop, cat.obj_index("b"), 0),
    )
    below_b = check_cocontinuity(cat, Cochain(cat.obj_index("top"), (cat.mor_index("b_top"),), ()), family)
    assert below_b.ok and below_b.witnesses == ((0, 1, 0),)
    at_bot = check_cocontinuity(cat, Cochain(cat.obj_index("bot"), (), ()), family)
    assert at_bot.ok and at_bot.witnesses == ((0, 0, 0),)
    at_top = check_cocontinuity(cat, Cochain(cat.obj_index("top"), (), ()), family)
    assert not at_top.ok
    assert at_top.failure == 0 and at_top.witnesses == ()


def test_cocontinuity_input_errors(d2):
    cat = d2.cat
    point = Cochain(cat.obj_index("top"), (), ())
    with pytest.raises(ValueError, match="at least one map"):
        check_cocontinuity(cat, point, ())
    mixed = (identity_map(d2.presheaves["prod2x2"]), identity_map(d2.presheaves["twopoint"]))
    with pytest.raises(ValueError, match="share a codomain"):
        check_cocontinuity(cat, point, mixed)
