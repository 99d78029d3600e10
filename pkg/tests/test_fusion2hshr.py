"""From processes to hypergraphs: judgements, productions, amoeboids."""

from __future__ import annotations

import itertools

import pytest

from shrew.fusion import normalize, parse_process
from shrew.fusion2hshr import (
    AuxOrigin,
    NotAmoeboid,
    ProcessOrigin,
    auxiliary_production,
    classify_amoeboid,
    collapse_even_chains,
    interleaving_filter,
    is_connector_label,
    m_label,
    needed_auxiliaries,
    normalize_graph,
    prefix_arities,
    process_productions,
    same_modulo_amoeboids,
    translate_process,
    translate_substitution,
)
from shrew.hshr import (
    Edge,
    derive_transition,
    graph,
    parse_graph,
    parse_production,
    print_production,
    validate_production,
)
from shrew.oracles import SweepConfig, gen_processes
from shrew.terms import Name

n = Name

QRS = "(u x y z w) (Q(x,y,z) | 'u<x y>.R(u,x) | u<z w>.S(z,w))"

QRS_JUDGEMENT = """
nodes u, w, x, y, z;
L{Q(x1,x2,x3)}(x1,y1,z1)
| L{'x1<x2 x3>.R(x4,x5)}(u1,x2,y2,u2,x3)
| L{x1<x2 x3>.S(x4,x5)}(u3,z2,w1,z3,w2)
| n(x) | n(y) | n(z) | n(u) | n(w)
| m4(x,x1,x2,x3) | m3(y,y1,y2) | m4(z,z1,z2,z3)
| m4(u,u1,u2,u3) | m3(w,w1,w2)
"""


def jud(text: str):
    return translate_process(normalize(parse_process(text)))


# ----------------------------------------------------------- judgements


def test_connector_labels():
    assert is_connector_label("n")
    assert is_connector_label("m2") and is_connector_label("m14")
    assert not is_connector_label("m") and not is_connector_label("m2x")
    assert not is_connector_label("L{Q(x1)}")
    assert m_label(3) == "m3"


def test_judgement_splits_occurrences_and_routes_them():
    g = jud(QRS)
    expect = parse_graph(QRS_JUDGEMENT)
    assert g.nodes == expect.nodes
    assert sorted(g.edges, key=str) == sorted(expect.edges, key=str)


def test_judgement_keeps_free_names_as_hubs():
    g = jud("Q(a) | R(a)")
    assert n("a") in g.nodes
    labels = sorted(e.label for e in g.edges)
    assert labels == ["L{Q(x1)}", "L{R(x1)}", "m3"]
    (m,) = [e for e in g.edges if e.label == "m3"]
    assert m.nodes[0] == n("a")


def test_judgement_closes_restricted_names_only():
    g = jud("(a) (Q(a) | R(b))")
    assert [e for e in g.edges if e.label == "n"] == [
        Edge("n", (next(x for x in g.nodes if x.base == "a"),))
    ]


def test_single_occurrence_still_gets_a_wire():
    g = jud("Q(a)")
    kinds = sorted(e.label for e in g.edges)
    assert kinds == ["L{Q(x1)}", "m2"]


def test_translate_process_accepts_explicit_node_choices():
    form = normalize(parse_process("(a) Q(a)"))
    g = translate_process(form, v=[n("hub")], w=[n("occ")])
    assert g.edges == (
        Edge("L{Q(x1)}", (n("occ"),)),
        Edge("n", (n("hub"),)),
        Edge("m2", (n("hub"), n("occ"))),
    )
    with pytest.raises(ValueError):
        translate_process(form, v=[n("same")], w=[n("same")])
    with pytest.raises(ValueError):
        translate_process(form, v=[n("a"), n("b")])


def test_translate_substitution_builds_one_connector_per_class():
    edges = translate_substitution({n("x"): [n("b"), n("a")], n("y"): [n("c")]})
    assert edges == [
        Edge("m3", (n("x"), n("a"), n("b"))),
        Edge("m2", (n("y"), n("c"))),
    ]


# ---------------------------------------------------------- productions

OUT_PRODUCTION = (
    "L{'x1<x2 x3>.R(x4,x5)}(x1,x2,x3,x4,x5)"
    " --[x1: out2<x2 x3>]--> L{R(x1,x2)}(x4,x5) | n(x1)"
)
IN_PRODUCTION = (
    "L{x1<x2 x3>.S(x4,x5)}(x1,x2,x3,x4,x5)"
    " --[x1: in2<x2 x3>]--> L{S(x1,x2)}(x4,x5) | n(x1)"
)


def test_output_summand_production():
    (p,) = process_productions(parse_process("'u<x y>.R(u,x)"))
    assert print_production(p) == OUT_PRODUCTION
    assert p.origin == ProcessOrigin("L{'x1<x2 x3>.R(x4,x5)}", 0, "output", 2)


def test_input_summand_production():
    (p,) = process_productions(parse_process("u<z w>.S(z,w)"))
    assert print_production(p) == IN_PRODUCTION
    assert p.origin.kind == "input" and p.origin.arity == 2


def test_fusion_summand_production_wires_the_merged_names():
    (p,) = process_productions(parse_process("{x=y}.Q(y)"))
    assert print_production(p) == (
        "L{{x1=x2}.Q(x3)}(x1,x2,x3) --[]--> L{Q(x1)}(x3) | m2(x1,x2)"
    )
    assert p.origin.kind == "fusion"


def test_constants_are_inert():
    assert process_productions(parse_process("Q(x,y)")) == ()


def test_dropped_interface_names_are_closed():
    (p,) = process_productions(parse_process("'u<>.0"))
    assert print_production(p) == "L{'x1<>.0}(x1) --[x1: out0<>]--> n(x1)"


def test_each_summand_gets_its_own_production():
    ps = process_productions(parse_process("'u<x>.0 + u<y>.Q(y)"))
    assert len(ps) == 2
    assert [p.origin.branch for p in ps] == [0, 1]
    assert {p.origin.kind for p in ps} == {"output", "input"}
    for p in ps:
        assert parse_production(print_production(p)) == p


def test_uncollapsed_target_means_the_same_modulo_wiring():
    (collapsed,) = process_productions(parse_process("'u<x y>.R(u,x)"))
    (verbose,) = process_productions(
        parse_process("'u<x y>.R(u,x)"), collapse=False
    )
    assert len(verbose.target.edges) > len(collapsed.target.edges)
    assert same_modulo_amoeboids(verbose.target, collapsed.target)
    validate_production(verbose)


def test_auxiliary_production_routes_between_two_tentacles():
    p = auxiliary_production(3, 1, 1, 2)
    assert print_production(p) == (
        "m3(x1,x2,x3) --[x1: in1<y1>, x2: out1<z1>]-->"
        " nodes +y1, +z1; m3(x1,x2,x3) | m2(y1,z1)"
    )
    assert p.origin == AuxOrigin(3, 1, 1, 2)
    with pytest.raises(ValueError):
        auxiliary_production(3, 1, 2, 2)


def test_auxiliary_zero_arity_spawns_no_bridges():
    p = auxiliary_production(2, 0, 2, 1)
    assert p.target.edges == (Edge("m2", (n("x1"), n("x2"))),)


def test_needed_auxiliaries_cover_connectors_times_arities():
    g = jud(QRS)
    arities = prefix_arities(
        process_productions(parse_process("'u<x y>.R(u,x)"))
        + process_productions(parse_process("u<z w>.S(z,w)"))
    )
    assert arities == {2}
    aux = needed_auxiliaries(g, arities)
    # ordered tentacle pairs: 3*2 on each m3, 4*3 on each m4
    assert len(aux) == 6 + 12
    assert {p.origin.k for p in aux} == {3, 4}


# ---------------------------------------------- connector normalization


def test_collapse_leaves_odd_chains_and_rings():
    odd = graph([n("a"), n("b")], [Edge("m2", (n("a"), n("b")))])
    assert collapse_even_chains(odd) == odd
    ring = parse_graph("nodes a, b; m2(a,b) | m2(b,a)")
    assert collapse_even_chains(ring) == ring


def test_collapse_merges_an_even_chain_toward_the_preferred_end():
    g = parse_graph("nodes a, b, c; m2(a,b) | m2(b,c) | A(c)")
    folded = collapse_even_chains(g, prefer={n("a")})
    assert folded == parse_graph("nodes a; A(a)")


class TestClassify:
    def test_single_connector_is_simple(self):
        r = classify_amoeboid(
            [Edge("m3", (n("u"), n("a"), n("b")))], [n("u"), n("a"), n("b")]
        )
        assert r.kind == "simple" and r.ok

    def test_odd_chains_are_structured(self):
        edges = [
            Edge("m2", (n("a"), n("c"))),
            Edge("m2", (n("c"), n("d"))),
            Edge("m2", (n("d"), n("b"))),
        ]
        r = classify_amoeboid(edges, [n("a"), n("b")])
        assert r.kind == "structured"
        assert r.internal == {n("c"), n("d")}

    def test_even_paths_flip_polarity_and_are_rejected(self):
        edges = [Edge("m2", (n("a"), n("c"))), Edge("m2", (n("c"), n("b")))]
        r = classify_amoeboid(edges, [n("a"), n("b")])
        assert r.kind == "not-amoeboid"
        assert "even path" in r.reason

    def test_m2_ring_is_a_pseudoamoeboid(self):
        edges = [Edge("m2", (n("a"), n("b"))), Edge("m2", (n("b"), n("a")))]
        assert classify_amoeboid(edges, []).kind == "pseudo"

    def test_closed_component_with_larger_connectors(self):
        edges = [
            Edge("m3", (n("a"), n("b"), n("c"))),
            Edge("m3", (n("c"), n("a"), n("b"))),
        ]
        assert classify_amoeboid(edges, []).kind == "closed"

    def test_external_node_on_two_tentacles_is_rejected(self):
        r = classify_amoeboid(
            [Edge("m2", (n("a"), n("a")))], [n("a")]
        )
        assert not r.ok

    def test_process_edges_are_not_connectors(self):
        r = classify_amoeboid([Edge("A", (n("a"),))], [n("a")])
        assert not r.ok and "not a connector" in r.reason


def test_normalize_graph_folds_components_to_their_anchors():
    g = parse_graph(
        "nodes a, b, h, t, u; A(a) | B(b) | m3(h,t,u) | m2(t,a) | m2(u,b) | n(h)"
    )
    folded = normalize_graph(g)
    assert sorted(str(e) for e in folded.edges) == ["A(a)", "B(b)", "m2(a,b)"]


def test_normalize_graph_emits_closures_for_lone_anchors():
    g = parse_graph("nodes a, x; A(a) | m2(x,a) | n(x)")
    folded = normalize_graph(g)
    assert sorted(str(e) for e in folded.edges) == ["A(a)", "n(a)"]
    free = parse_graph("nodes a, x; A(a) | m2(x,a)")
    assert sorted(str(e) for e in normalize_graph(free).edges) == ["A(a)"]


def test_normalize_graph_drops_pseudoamoeboids_and_spare_nodes():
    g = parse_graph("nodes a, p, q, z; A(a) | m2(p,q) | m2(q,p)")
    folded = normalize_graph(g)
    assert folded == parse_graph("nodes a; A(a)")
    kept = normalize_graph(g, protected=[n("z")])
    assert n("z") in kept.nodes


def test_normalize_graph_rejects_even_anchor_paths():
    g = parse_graph("nodes a, b, c; A(a) | B(b) | m2(a,c) | m2(c,b)")
    with pytest.raises(NotAmoeboid):
        normalize_graph(g)


def test_same_modulo_amoeboids_sees_through_the_wiring():
    hub = parse_graph("nodes p, q, s; A(p) | B(q) | m3(s,p,q)")
    chain = parse_graph("nodes a, b, c, d; A(a) | B(b) | m2(a,c) | m2(c,d) | m2(d,b)")
    assert same_modulo_amoeboids(hub, chain)
    assert not same_modulo_amoeboids(hub, parse_graph("nodes p, q; A(p) | B(q)"))


def test_same_modulo_amoeboids_respects_fixed_names():
    one = parse_graph("nodes a; A(a)")
    two = parse_graph("nodes b; A(b)")
    assert same_modulo_amoeboids(one, two)
    assert not same_modulo_amoeboids(one, two, fixed=[n("a"), n("b")])


# ------------------------------------------------- transitions filtered


def _qrs_pieces():
    form = normalize(parse_process(QRS))
    g = translate_process(form)
    prods = []
    for part in form.parts:
        prods.extend(process_productions(part))
    prods.extend(needed_auxiliaries(g, prefix_arities(prods)))
    return g, prods


def test_interleaving_filter_keeps_single_calculus_steps():
    from shrew.hshr import Blocked, Transition

    g, prods = _qrs_pieces()
    out_p = next(p for p in prods if getattr(p.origin, "kind", "") == "output")
    in_p = next(p for p in prods if getattr(p.origin, "kind", "") == "input")
    # the u amoeboid is m4(u,u1,u2,u3): the router must face out2 at its
    # second tentacle (u1, the output edge's channel) and in2 at its
    # fourth (u3, the input edge's channel)
    aux = next(
        p
        for p in prods
        if isinstance(p.origin, AuxOrigin) and p.origin == AuxOrigin(4, 2, 4, 2)
    )
    edge_of = {e.label: i for i, e in enumerate(g.edges)}
    u_edge = next(
        i for i, e in enumerate(g.edges) if e.label == "m4" and e.nodes[0] == n("u")
    )
    t = derive_transition(
        g, {edge_of[out_p.label]: out_p, edge_of[in_p.label]: in_p, u_edge: aux}
    )
    assert isinstance(t, Transition)
    assert interleaving_filter(t)
    idle = derive_transition(g, {})
    assert not interleaving_filter(idle)
    # a lone output is blocked by its epsilon neighbours, never filtered
    lone = derive_transition(g, {edge_of[out_p.label]: out_p})
    assert isinstance(lone, Blocked)


# ------------------------------------------------------ generated pool


def test_generated_translations_validate_and_round_trip():
    cfg = SweepConfig(seed=11)
    for agent in itertools.islice(gen_processes(cfg), 20):
        form = normalize(agent)
        g = translate_process(form)
        assert parse_graph(str(g)) == g
        for part in form.parts:
            for p in process_productions(part):
                validate_production(p)
                assert parse_production(print_production(p)) == p


def test_generated_translations_normalize_without_complaint():
    cfg = SweepConfig(seed=12)
    from shrew.fusion2hshr import free_names_of_nf

    for agent in itertools.islice(gen_processes(cfg), 20):
        form = normalize(agent)
        g = translate_process(form)
        folded = normalize_graph(g, protected=free_names_of_nf(form))
        assert same_modulo_amoeboids(g, folded, fixed=free_names_of_nf(form))
