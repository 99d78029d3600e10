"""Process syntax, normal forms, congruence and reduction."""

from __future__ import annotations

import itertools

import pytest

from shrew.fusion import (
    CommEvent,
    Constant,
    FuseEvent,
    Inaction,
    InputPrefix,
    ParseError,
    Rec,
    Scope,
    Sum,
    alpha_equal,
    as_agent,
    free_names,
    linearize,
    nf_alpha_equal,
    normalize,
    parse_process,
    pretty,
    reductions,
    rename_agent,
    standardize,
    substitutive_effect,
)
from shrew.oracles import SweepConfig, gen_processes
from shrew.terms import Name, Subst

n = Name


def nf(text: str):
    return normalize(parse_process(text))


# ------------------------------------------------------------ parsing


def test_parse_pretty_round_trip_on_written_text():
    source = "(u x) (Q(x,u) | 'u<x>.0 + u<x>.{x=u}.0)"
    agent = parse_process(source)
    assert pretty(agent) == source
    assert parse_process(pretty(agent)) == agent


def test_parse_accepts_commas_and_comments():
    a = parse_process("# a comment\n(x, y) Q(x y)  # trailing\n")
    assert a == Scope((n("x"), n("y")), Constant("Q", (n("x"), n("y"))))


def test_parse_nested_prefixes_build_singleton_sums():
    a = parse_process("u<x>.'v<y>.0")
    assert isinstance(a, Sum)
    inner = a.branches[0].cont
    assert isinstance(inner, Sum) and len(inner.branches) == 1


def test_parse_distinguishes_scope_from_grouping():
    assert isinstance(parse_process("(x) 0"), Scope)
    assert parse_process("(0)") == Inaction()
    assert parse_process("('u<x>.0)") == parse_process("'u<x>.0")


@pytest.mark.parametrize(
    "bad",
    [
        "",
        "u<x>",  # prefix without continuation
        "() 0",  # empty scope
        "rec x. 0",  # lowercase recursion variable
        "Q(x) | ",
        "{x=}.0",
    ],
)
def test_parse_rejects_malformed_input(bad):
    with pytest.raises(ParseError):
        parse_process(bad)


def test_free_names_sees_through_binders():
    a = parse_process("(x) ('u<x>.Q(y) | {y=z}.0)")
    assert free_names(a) == {n("u"), n("y"), n("z")}


# ------------------------------------------------------- normal forms


def test_normalize_flattens_scopes_and_orders_by_first_occurrence():
    form = nf("(u x y z w) (Q(x,y,z) | 'u<x y>.R(u,x) | u<z w>.S(z,w))")
    assert [str(b) for b in form.restricted] == ["x", "y", "z", "u", "w"]
    assert len(form.parts) == 3


def test_normalize_drops_vacuous_binders_and_inaction():
    form = nf("(x) (0 | (y) Q(x))")
    assert form.restricted == (n("x"),)
    assert form.parts == (Constant("Q", (n("x"),)),)


def test_normalize_freshens_clashing_binders():
    form = nf("(x) Q(x) | (x) R(x)")
    assert len(form.restricted) == 2
    assert len(set(form.restricted)) == 2
    q, r = form.parts
    assert q.args != r.args


def test_normalize_unfolds_top_level_recursion_once():
    form = nf("(u z) ('u<z>.0 | rec X. (x) u<x>.('u<x>.0 | X))")
    assert [str(b) for b in form.restricted] == ["u", "z", "x"]
    assert len(form.parts) == 2
    trigger = form.parts[1]
    assert isinstance(trigger, Sum)
    pfx = trigger.branches[0].prefix
    assert isinstance(pfx, InputPrefix)
    assert pfx.channel == n("u") and pfx.args == (n("x"),)
    # the unfolded body still carries the recursion for the next round
    assert "rec" in pretty(trigger)


def test_normalize_rejects_unguarded_recursion():
    with pytest.raises(ValueError):
        nf("rec X. (X | Q(x))")
    with pytest.raises(ValueError):
        normalize(Rec("X", parse_process("X")))


def test_normalize_is_idempotent_up_to_congruence():
    form = nf("(u x y z w) (Q(x,y,z) | 'u<x y>.R(u,x) | u<z w>.S(z,w))")
    assert nf_alpha_equal(normalize(as_agent(form)), form)


# -------------------------------------------------------- congruence


class TestAlphaEqual:
    def test_bound_names_do_not_matter(self):
        assert alpha_equal(parse_process("(x) Q(x)"), parse_process("(y) Q(y)"))
        assert not alpha_equal(parse_process("(x) Q(x)"), parse_process("Q(y)"))

    def test_scope_order_and_vacuity(self):
        assert alpha_equal(
            parse_process("(x y) Q(x,y)"), parse_process("(y) (x) Q(x,y)")
        )
        assert alpha_equal(parse_process("(z) Q(x)"), parse_process("Q(x)"))

    def test_composition_is_commutative_with_unit(self):
        assert alpha_equal(
            parse_process("Q(x) | R(y) | 0"), parse_process("R(y) | Q(x)")
        )

    def test_scope_extrusion(self):
        assert alpha_equal(
            parse_process("(x) (Q(x) | R(y))"), parse_process("(x) Q(x) | R(y)")
        )

    def test_capture_is_not_extrusion(self):
        assert not alpha_equal(
            parse_process("(x) (Q(x) | R(x))"), parse_process("(x) Q(x) | R(x)")
        )

    def test_fusion_pairs_are_unordered_and_symmetric(self):
        assert alpha_equal(
            parse_process("{x=y, u=v}.0"), parse_process("{v=u, y=x}.0")
        )
        assert not alpha_equal(parse_process("{x=y}.0"), parse_process("{x=z}.0"))

    def test_sum_branches_are_a_multiset(self):
        assert alpha_equal(
            parse_process("u<x>.0 + 'v<y>.0"), parse_process("'v<y>.0 + u<x>.0")
        )

    def test_recursion_unfolds_on_either_side(self):
        r = "rec X. 'u<x>.X"
        assert alpha_equal(parse_process(r), parse_process(f"'u<x>.{r}"))
        assert not alpha_equal(parse_process(r), parse_process("'u<x>.0"))


def test_rename_agent_avoids_capture():
    a = parse_process("(y) Q(x,y)")
    renamed = rename_agent(a, {n("x"): n("y")})
    assert alpha_equal(renamed, parse_process("(z) Q(y,z)"))


def test_rename_agent_is_identity_without_work():
    a = parse_process("(y) Q(x,y)")
    assert rename_agent(a, {n("x"): n("x")}) is a
    assert rename_agent(a, {n("z"): n("w")}) == a


# -------------------------------------------- linear/standard forms


def test_linearize_splits_occurrences_and_remembers_them():
    dec = linearize(nf("Q(x,y,x)"))
    (part,) = dec.parts
    assert part == Constant("Q", (n("x1"), n("y1"), n("x2")))
    assert dec.fnarray == (n("x1"), n("y1"), n("x2"))
    assert dec.sigma.apply_names(dec.fnarray) == (n("x"), n("y"), n("x"))
    assert dict(dec.groups) == {n("x"): (n("x1"), n("x2")), n("y"): (n("y1"),)}


def test_linearize_avoids_existing_numbered_names():
    dec = linearize(nf("Q(x,x1)"))
    assert dec.fnarray[0] != n("x1")


def test_standardize_numbers_every_occurrence():
    sf = standardize(parse_process("'u<x y>.R(w,x)"))
    assert sf.label == "L{'x1<x2 x3>.R(x4,x5)}"
    assert sf.args == (n("u"), n("x"), n("y"), n("w"), n("x"))
    assert sf.arity == 5


def test_standardize_keeps_bound_structure_out_of_the_interface():
    sf = standardize(parse_process("u<x>.(v) 'v<v>.0"))
    assert sf.args == (n("u"), n("x"))
    assert "b1" in sf.label


def test_standardize_equal_labels_mean_alpha_equal_agents():
    one = standardize(parse_process("u<x>.Q(x,u)"))
    two = standardize(parse_process("w<z>.Q(z,w)"))
    assert one.label == two.label
    assert one.args != two.args


# ---------------------------------------------------------- reduction


def test_substitutive_effect_prefers_untouchable_names():
    x, y, z = n("x"), n("y"), n("z")
    assert substitutive_effect([(x, y)], {x, y}) == Subst.of_names({y: x})
    assert substitutive_effect([(x, y)], {x}) == Subst.of_names({x: y})
    assert substitutive_effect([(x, y), (y, z)], {y, z}) == Subst.of_names(
        {y: x, z: x}
    )
    assert substitutive_effect([(x, y)], set()) is None


def test_communication_merges_restricted_names():
    rs = reductions(parse_process("(u x y z w) (Q(x,y,z) | 'u<x y>.R(u,x) | u<z w>.S(z,w))"))
    assert len(rs) == 1
    step = rs[0]
    assert isinstance(step.event, CommEvent)
    assert step.event.channel == n("u")
    assert step.effect == Subst.of_names({n("y"): n("w"), n("z"): n("x")})
    assert nf_alpha_equal(step.result, nf("(u x y) (Q(x,y,x) | R(u,x) | S(x,y))"))


def test_communication_needs_matching_arity_and_polarity():
    assert reductions(parse_process("(x y) (u<x>.0 | u<y>.0)")) == ()
    assert reductions(parse_process("(x y) ('u<x>.0 | u<y z>.0)")) == ()


def test_communication_on_free_names_is_blocked():
    # no restricted name can absorb the merge
    assert reductions(parse_process("'u<x>.0 | u<y>.0")) == ()
    rs = reductions(parse_process("(x) ('u<x>.0 | u<y>.0)"))
    assert len(rs) == 1
    assert rs[0].effect == Subst.of_names({n("x"): n("y")})


def test_identical_arguments_step_with_empty_effect():
    rs = reductions(parse_process("'u<x>.Q(x) | u<x>.R(x)"))
    assert len(rs) == 1
    assert not rs[0].effect


def test_fusion_prefix_fires_alone():
    rs = reductions(parse_process("(x y) {x=y}.Q(x,y)"))
    assert len(rs) == 1
    assert isinstance(rs[0].event, FuseEvent)
    assert nf_alpha_equal(rs[0].result, nf("(x) Q(x,x)"))


def test_fusion_of_two_free_names_is_blocked():
    assert reductions(parse_process("{x=y}.0")) == ()
    assert len(reductions(parse_process("(x) {x=y}.0"))) == 1


def test_trivial_fusion_reduces_to_nothing():
    rs = reductions(parse_process("(x y) {x=y}.0"))
    assert len(rs) == 1
    assert rs[0].result.parts == ()


def test_sum_offers_each_branch():
    rs = reductions(parse_process("(x) ('u<x>.Q(x) + u<x>.R(x) | u<y>.S(y))"))
    events = {type(r.event) for r in rs}
    assert events == {CommEvent}
    assert len(rs) == 1  # the input branch finds no output partner


def test_reductions_are_stable_under_renaming_bound_names():
    a = parse_process("(u x y z w) (Q(x,y,z) | 'u<x y>.R(u,x) | u<z w>.S(z,w))")
    b = parse_process("(u p q r s) (Q(p,q,r) | 'u<p q>.R(u,p) | u<r s>.S(r,s))")
    ra, rb = reductions(a), reductions(b)
    assert len(ra) == len(rb) == 1
    assert ra[0].event == rb[0].event
    assert nf_alpha_equal(ra[0].result, rb[0].result)


# ----------------------------------------------------- generated pool


def _sample(count: int = 40):
    return itertools.islice(gen_processes(SweepConfig(seed=3)), count)


def test_generated_processes_print_parse_round_trip():
    for agent in _sample():
        assert parse_process(pretty(agent)) == agent


def test_generated_processes_normalize_idempotently():
    for agent in _sample(25):
        form = normalize(agent)
        assert nf_alpha_equal(normalize(as_agent(form)), form)


def test_generated_processes_reduce_deterministically():
    for agent in _sample(25):
        first = reductions(agent)
        second = reductions(agent)
        assert [r.event for r in first] == [r.event for r in second]
        assert [r.effect for r in first] == [r.effect for r in second]
        for one, two in zip(first, second):
            assert one.result == two.result
