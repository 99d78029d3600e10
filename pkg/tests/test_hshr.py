"""Hypergraphs, productions and synchronized transition derivation."""

from __future__ import annotations

import itertools

import pytest

from shrew.hshr import (
    Blocked,
    Edge,
    Graph,
    GraphParseError,
    derive_transition,
    enumerate_transitions,
    graph,
    graph_iso,
    isolated_nodes,
    parse_graph,
    parse_hg,
    parse_name,
    parse_production,
    print_graph,
    print_production,
    rename_graph,
    same_graph,
    to_dot,
    transitions_equal_up_to_renaming,
)
from shrew.oracles import SweepConfig, gen_hshr_instances
from shrew.terms import Name, Subst

n = Name

SPLIT = "C(x,y) --[]--> nodes +z; C(x,z) | C(z,y)"
STAR = "C(x,y) --[x: r<w>, y: r<w>]--> nodes +w; S(y,w)"
FUSE = "D(x,y) --[/ x=y]--> nil"


# ------------------------------------------------------------- graphs


def test_graph_rejects_edges_outside_the_interface():
    with pytest.raises(ValueError):
        graph([n("x")], [Edge("C", (n("x"), n("y")))])


def test_parse_graph_collects_edge_nodes_and_declared_ones():
    g = parse_graph("nodes u; C(x,y)")
    assert g.nodes == {n("u"), n("x"), n("y")}
    assert isolated_nodes(g) == {n("u")}


def test_print_parse_round_trip():
    g = parse_graph("nodes x, y, z~2; C(x,y) | C(y,x) | nil_like(z~2)")
    assert parse_graph(print_graph(g)) == g
    assert print_graph(parse_graph("nodes x; nil")) == "nodes x; nil"


def test_parse_name_reads_generated_names_back():
    assert parse_name("x") == n("x")
    assert parse_name("x~3") == n("x", 3)
    assert parse_name("x~") == n("x~")


def test_same_graph_compares_edge_multisets():
    a = parse_graph("nodes x, y; C(x,y) | C(x,y)")
    b = parse_graph("nodes x, y; C(x,y)")
    assert not same_graph(a, b)
    assert same_graph(a, parse_graph("nodes y, x; C(x,y) | C(x,y)"))


def test_rename_graph_may_merge_nodes():
    g = parse_graph("nodes x, y; C(x,y)")
    h = rename_graph(g, {n("y"): n("x")})
    assert h == parse_graph("nodes x; C(x,x)")


def test_to_dot_mentions_every_node_and_edge_slot():
    out = to_dot(parse_graph("nodes x, y; C(x,y)"), title="demo")
    assert 'graph "demo" {' in out
    assert out.count("--") == 2  # one line per attachment
    assert '"n_x"' in out and '"n_y"' in out


class TestGraphIso:
    def test_finds_a_renaming(self):
        a = parse_graph("nodes x, y; C(x,y) | C(y,x)")
        b = parse_graph("nodes p, q; C(p,q) | C(q,p)")
        m = graph_iso(a, b)
        assert m is not None
        assert rename_graph(a, m) == b

    def test_respects_fixed_names(self):
        a = parse_graph("nodes x, y; C(x,y)")
        b = parse_graph("nodes x, y; C(y,x)")
        assert graph_iso(a, b) is not None
        assert graph_iso(a, b, fixed=[n("x"), n("y")]) is None

    def test_distinguishes_labels_and_multiplicity(self):
        a = parse_graph("nodes x, y; C(x,y)")
        assert graph_iso(a, parse_graph("nodes x, y; D(x,y)")) is None
        assert graph_iso(a, parse_graph("nodes x, y; C(x,y) | C(x,y)")) is None

    def test_unordered_labels_match_up_to_slot_permutation(self):
        a = parse_graph("nodes x, y, z; m3(x,y,z)")
        b = parse_graph("nodes x, y, z; m3(z,y,x)")
        assert graph_iso(a, b, fixed=[n("x"), n("y"), n("z")]) is None
        assert (
            graph_iso(a, b, fixed=[n("x"), n("y"), n("z")], unordered=["m3"])
            is not None
        )

    def test_ignore_isolated_disregards_spare_nodes(self):
        a = parse_graph("nodes x, u; C(x,x)")
        b = parse_graph("nodes x; C(x,x)")
        assert graph_iso(a, b) is None
        assert graph_iso(a, b, ignore_isolated=True) is not None


# -------------------------------------------------------- productions


def test_parse_production_round_trips_through_print():
    for text in (SPLIT, STAR, FUSE, "A(x) --[x: go<>]--> A(x)"):
        p = parse_production(text)
        assert parse_production(print_production(p)) == p


def test_parse_production_accepts_declared_new_nodes_only_if_correct():
    parse_production(SPLIT)
    with pytest.raises(GraphParseError):
        parse_production("C(x,y) --[]--> nodes +z, +w; C(x,z) | C(z,y)")


def test_production_source_nodes_must_be_distinct():
    with pytest.raises((GraphParseError, ValueError)):
        parse_production("C(x,x) --[]--> C(x,x)")


def test_production_actions_must_sit_on_source_nodes():
    with pytest.raises((GraphParseError, ValueError)):
        parse_production("C(x,y) --[z: r<>]--> C(x,y)")


def test_production_exposed_names_must_survive_its_fusion():
    with pytest.raises((GraphParseError, ValueError)):
        parse_production("C(x,y) --[x: r<y> / x=y]--> nil")


def test_fusion_label_determines_the_interface():
    p = parse_production(FUSE)
    assert p.fusion == Subst.of_names({n("y"): n("x")})
    assert p.target.nodes == {n("x")}
    assert p.target.edges == ()


def test_parse_hg_splits_graph_line_from_productions():
    f = parse_hg(
        """
        # a file
        nodes x; C(x,x)

        C(x,y) --[]--> nodes +z; C(x,z) | C(z,y)
        """
    )
    assert f.graph == parse_graph("nodes x; C(x,x)")
    assert len(f.productions) == 1


def test_parse_hg_reports_line_numbers_and_single_graph():
    with pytest.raises(GraphParseError, match="line 2"):
        parse_hg("nodes x; C(x,x)\nC(x --[]--> nil")
    with pytest.raises(GraphParseError, match="more than one graph"):
        parse_hg("nodes x; nil\nnodes y; nil")


# ---------------------------------------------------------- derivation


def test_idle_everywhere_is_the_identity_transition():
    g = parse_graph("nodes x; C(x,x)")
    t = derive_transition(g, {})
    assert not isinstance(t, Blocked)
    assert t.actions == ()
    assert not t.fusion
    assert same_graph(t.target, g)


def test_loop_edge_split_keeps_the_attachment():
    g = parse_graph("nodes x; C(x,x)")
    t = derive_transition(g, {0: parse_production(SPLIT)})
    assert not isinstance(t, Blocked)
    assert t.actions == () and not t.fusion
    fresh = [z for z in t.target.nodes if z != n("x")]
    assert len(fresh) == 1
    (z,) = fresh
    assert same_graph(
        t.target, graph({n("x"), z}, [Edge("C", (n("x"), z)), Edge("C", (z, n("x")))])
    )


def test_derivation_is_deterministic():
    g = parse_graph("nodes x; C(x,x)")
    one = derive_transition(g, {0: parse_production(SPLIT)})
    two = derive_transition(g, {0: parse_production(SPLIT)})
    assert one == two


def test_hoare_synchronization_merges_payloads_at_shared_nodes():
    g = parse_graph("nodes x, y; C(x,y) | C(y,x)")
    star = parse_production(STAR)
    t = derive_transition(g, {0: star, 1: star})
    assert not isinstance(t, Blocked)
    hubs = {payload for _, _, payload in t.actions}
    assert len(hubs) == 1  # every attachment exposes the same fresh hub
    (w,) = hubs.pop()
    assert {a for _, a, _ in t.actions} == {"r"}
    assert same_graph(
        t.target,
        graph({n("x"), n("y"), w}, [Edge("S", (n("y"), w)), Edge("S", (n("x"), w))]),
    )


def test_an_idling_neighbour_blocks_a_synchronized_action():
    g = parse_graph("nodes x, y, z; C(x,y) | C(y,z)")
    t = derive_transition(g, {0: parse_production(STAR)})
    assert isinstance(t, Blocked)
    assert t.node == n("y")
    assert t.reason == "action-mismatch"


def test_isolated_nodes_default_to_idle_and_block_disagreement():
    g = parse_graph("nodes x, y; C(x,y) | C(y,x)")
    star = parse_production(STAR)
    lonely = parse_graph("nodes x, y, u; C(x,y) | C(y,x)")
    ok = derive_transition(g, {0: star, 1: star})
    also_ok = derive_transition(lonely, {0: star, 1: star})
    assert not isinstance(ok, Blocked) and not isinstance(also_ok, Blocked)
    # but an isolated node cannot silently join an action
    assert n("u") in also_ok.target.nodes


def test_new_nodes_let_an_isolated_node_act():
    g = parse_graph("nodes x, u; C(x,x)")
    t = derive_transition(g, {}, new_nodes={n("u"): ("s", ())})
    assert not isinstance(t, Blocked)
    assert (n("u"), "s", ()) in t.actions
    with pytest.raises(ValueError):
        derive_transition(g, {}, new_nodes={n("x"): ("s", ())})


def test_production_fusion_becomes_the_transition_fusion():
    g = parse_graph("nodes x, y; D(x,y)")
    t = derive_transition(g, {0: parse_production(FUSE)})
    assert not isinstance(t, Blocked)
    assert t.fusion == Subst.of_names({n("y"): n("x")})
    assert t.target == parse_graph("nodes x; nil")


def test_fusion_representatives_stay_in_the_source():
    # at each shared node one copy exposes a source name and the other a
    # fresh payload; the merged class must keep the source name
    g = parse_graph("nodes x, y; E(x,y) | E(y,x)")
    q = parse_production("E(x,y) --[x: r<x>, y: r<w>]--> nodes +w; nil")
    t = derive_transition(g, {0: q, 1: q})
    assert not isinstance(t, Blocked)
    payloads = {payload for _, _, payload in t.actions}
    assert payloads == {(n("x"),), (n("y"),)}
    assert t.fusion == Subst()


def test_mismatched_production_raises():
    g = parse_graph("nodes x; C(x,x)")
    with pytest.raises(ValueError):
        derive_transition(g, {0: parse_production("D(x,y) --[]--> D(x,y)")})
    with pytest.raises(ValueError):
        derive_transition(g, {3: parse_production(SPLIT)})


def test_ring_start_has_exactly_idle_and_split():
    f = parse_hg("nodes x; C(x,x)\n" + SPLIT)
    result = enumerate_transitions(f.graph, f.productions)
    assert result.complete
    assert len(result) == 2
    sizes = sorted(len(t.target.edges) for t in result)
    assert sizes == [1, 2]


def test_enumeration_deduplicates_renamed_variants():
    # two identical edges: rewriting either one alone is the same
    # transition up to renaming, so only one survives
    g = parse_graph("nodes x; C(x,x) | C(x,x)")
    result = enumerate_transitions(g, [parse_production(SPLIT)])
    assert result.complete
    assert len(result) == 3  # idle, one split, both split
    for a, b in itertools.combinations(result.transitions, 2):
        assert not transitions_equal_up_to_renaming(a, b)


def test_enumeration_respects_the_freshness_budget():
    f = parse_hg("nodes x; C(x,x)\n" + SPLIT)
    result = enumerate_transitions(f.graph, f.productions, max_fresh=0)
    assert not result.complete
    assert len(result) == 1  # only the all-idle choice fits


def test_equal_up_to_renaming_relates_derived_copies():
    g = parse_graph("nodes x, y; C(x,y) | C(y,x)")
    star = parse_production(STAR)
    t = derive_transition(g, {0: star, 1: star})
    s = derive_transition(g, {0: star, 1: star})
    assert transitions_equal_up_to_renaming(t, s)
    idle = derive_transition(g, {})
    assert not transitions_equal_up_to_renaming(t, idle)


# ------------------------------------------------------ generated pool


def test_generated_productions_round_trip_and_validate():
    cfg = SweepConfig(seed=5)
    for _, prods in itertools.islice(gen_hshr_instances(cfg), 30):
        for p in prods:
            assert parse_production(print_production(p)) == p


def test_generated_instances_enumerate_deterministically():
    cfg = SweepConfig(seed=6)
    for g, prods in itertools.islice(gen_hshr_instances(cfg), 15):
        one = enumerate_transitions(g, prods, max_fresh=48)
        two = enumerate_transitions(g, prods, max_fresh=48)
        assert one.complete == two.complete
        assert one.transitions == two.transitions
