"""Productions and transitions for synchronized hypergraph rewriting.

A transition `Γ ⊢ G --Λ,π--> Φ ⊢ G'` carries a total action assignment Λ
(stored sparsely: nodes without an entry are ε) and an idempotent node
fusion π. A production is a transition whose source is a single edge on
pairwise distinct nodes, read as an α-convertible schema.

Production text syntax:

    C(x,y) --[x: r<w>, y: r<w>]--> nodes +w; S(y,w)

The bracket holds the non-ε actions and, after an optional `/`, fusion
pairs (`--[ / x=y]-->` for a pure fusion). The `nodes +...;` clause on
the right lists the new nodes; it is checked against the computed
interface, which is always determined by the rest of the production.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ..terms import Name, Subst, Var, mgu
from .graph import (
    Edge,
    Graph,
    GraphParseError,
    _HgCursor,
    edge_names,
    graph_iso,
    parse_graph_body,
    same_graph,
    tokenize_hg,
)

ActionEntry = tuple[Name, str, tuple[Name, ...]]  # (node, action symbol, payload)


def action_map(entries: Iterable[ActionEntry]) -> dict[Name, tuple[str, tuple[Name, ...]]]:
    out: dict[Name, tuple[str, tuple[Name, ...]]] = {}
    for node, act, payload in entries:
        if node in out:
            raise ValueError(f"two actions on node {node}")
        out[node] = (act, payload)
    return out


def sort_entries(entries: Iterable[ActionEntry]) -> tuple[ActionEntry, ...]:
    return tuple(sorted(entries, key=lambda e: e[0].sort_key))


def entry_payload_names(entries: Iterable[ActionEntry]) -> set[Name]:
    out: set[Name] = set()
    for _, _, payload in entries:
        out.update(payload)
    return out


@dataclass(frozen=True)
class Production:
    lhs: Edge
    actions: tuple[ActionEntry, ...]
    fusion: Subst
    target: Graph
    origin: object = field(default=None, compare=False)

    def __str__(self) -> str:
        return print_production(self)

    @property
    def label(self) -> str:
        return self.lhs.label

    @property
    def rank(self) -> int:
        return self.lhs.rank

    def names(self) -> set[Name]:
        out = set(self.lhs.nodes) | entry_payload_names(self.actions) | set(self.target.nodes)
        out |= self.fusion.names()
        for node, _, _ in self.actions:
            out.add(node)
        return out


@dataclass(frozen=True)
class Transition:
    source: Graph
    actions: tuple[ActionEntry, ...]
    fusion: Subst
    target: Graph
    used: tuple = field(default=None, compare=False)

    def names(self) -> set[Name]:
        out = set(self.source.nodes) | set(self.target.nodes)
        out |= entry_payload_names(self.actions) | self.fusion.names()
        for node, _, _ in self.actions:
            out.add(node)
        return out


def validate_production(p: Production) -> None:
    """Raise ValueError when a production schema is malformed."""
    if len(set(p.lhs.nodes)) != len(p.lhs.nodes):
        raise ValueError(f"production source nodes must be distinct: {p.lhs}")
    sources = set(p.lhs.nodes)
    amap = action_map(p.actions)
    for node in amap:
        if node not in sources:
            raise ValueError(f"action on {node}, which is not a source node")
    _validate_label(p.actions, p.fusion, sources, p.target, p.lhs.nodes)


def _validate_label(
    actions: tuple[ActionEntry, ...],
    fusion: Subst,
    interface: set[Name],
    target: Graph,
    interface_order: Iterable[Name],
) -> None:
    if not fusion.is_name_map() or not fusion.is_idempotent():
        raise ValueError("fusion must be an idempotent node substitution")
    for x in fusion.domain | fusion.range_names():
        if x not in interface:
            raise ValueError(f"fusion mentions {x}, which is not an interface node")
    for x in entry_payload_names(actions):
        if fusion.apply_name(x) != x:
            raise ValueError(f"exposed name {x} is not a fusion representative")
    expected = interface_of(actions, fusion, interface_order, target.edges)
    if target.nodes != expected:
        raise ValueError(
            f"target interface {sorted(target.nodes)} differs from the determined "
            f"{sorted(expected)}"
        )


def interface_of(
    actions: Iterable[ActionEntry],
    fusion: Subst,
    source_nodes: Iterable[Name],
    target_edges: Iterable[Edge],
) -> frozenset[Name]:
    """The target interface determined by a label and a target body:
    π-images of the source, exposed payload names, and internal nodes of
    the new body."""
    out = {fusion.apply_name(x) for x in source_nodes}
    out |= entry_payload_names(actions)
    out |= edge_names(target_edges)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Renaming and renaming-equality


def transition_rename(t: Transition, rho: Mapping[Name, Name]) -> Transition:
    """Transport a transition along an injective renaming."""
    names = t.names()
    images = {rho.get(n, n) for n in names}
    if len(images) != len(names):
        raise ValueError("renaming is not injective on the transition's names")

    def f(n: Name) -> Name:
        return rho.get(n, n)

    def fg(g: Graph) -> Graph:
        return Graph(
            frozenset(f(n) for n in g.nodes),
            tuple(Edge(e.label, tuple(f(n) for n in e.nodes)) for e in g.edges),
        )

    return Transition(
        source=fg(t.source),
        actions=sort_entries((f(n), a, tuple(f(v) for v in p)) for n, a, p in t.actions),
        fusion=Subst.of_names({f(x): f(t.fusion.apply_name(x)) for x in t.fusion.domain}),
        target=fg(t.target),
        used=t.used,
    )


def transitions_equal_up_to_renaming(a: Transition, b: Transition) -> bool:
    """True when an injective renaming σ of `b`'s names yields `a`:
    same source judgement, actions with σ-renamed payloads, π related by
    σ∘π_b = π_a∘... (pointwise σ(xπ_b) = xπ_a), and σ(target_b) =
    target_a."""
    if not same_graph(a.source, b.source):
        return False
    amap = action_map(a.actions)
    bmap = action_map(b.actions)
    if set(amap) != set(bmap):
        return False

    sigma: dict[Name, Name] = {}

    def bind(x: Name, y: Name) -> bool:
        img = sigma.get(x)
        if img is not None:
            return img == y
        if y in sigma.values():
            return False
        sigma[x] = y
        return True

    for x in a.source.nodes:
        if not bind(b.fusion.apply_name(x), a.fusion.apply_name(x)):
            return False
    for node, (act_a, pay_a) in amap.items():
        act_b, pay_b = bmap[node]
        if act_a != act_b or len(pay_a) != len(pay_b):
            return False
        for vb, va in zip(pay_b, pay_a):
            if not bind(vb, va):
                return False
    return graph_iso(b.target, a.target, partial=sigma) is not None


# ---------------------------------------------------------------------------
# Parsing and printing


def parse_production(text: str) -> Production:
    cur = _HgCursor(tokenize_hg(text))
    p = parse_production_at(cur)
    if cur.peek() is not None:
        raise GraphParseError(f"trailing input at {cur.peek()!r}")
    return p


def parse_production_at(cur: _HgCursor) -> Production:
    label = cur.word()
    cur.expect("(")
    lhs_nodes: list[Name] = []
    while not cur.at(")"):
        if cur.at(","):
            cur.next()
            continue
        lhs_nodes.append(cur.name())
    cur.next()
    cur.expect("--[")
    entries: list[ActionEntry] = []
    pairs: list[tuple[Name, Name]] = []
    while not cur.at("]-->") and not cur.at("/"):
        if cur.at(","):
            cur.next()
            continue
        node = cur.name()
        cur.expect(":")
        act = cur.word()
        cur.expect("<")
        payload: list[Name] = []
        while not cur.at(">"):
            if cur.at(","):
                cur.next()
                continue
            payload.append(cur.name())
        cur.next()
        entries.append((node, act, tuple(payload)))
    if cur.at("/"):
        cur.next()
        while not cur.at("]-->"):
            if cur.at(","):
                cur.next()
                continue
            left = cur.name()
            cur.expect("=")
            pairs.append((left, cur.name()))
    cur.expect("]-->")

    declared_new: list[Name] | None = None
    if cur.at("nodes"):
        cur.next()
        declared_new = []
        while not cur.at(";"):
            if cur.at(","):
                cur.next()
                continue
            cur.expect("+")
            declared_new.append(cur.name())
        cur.next()
    target_edges: list[Edge] = []
    if cur.at("nil"):
        cur.next()
    else:
        from .graph import _parse_edge, _is_word

        while cur.peek() is not None and _is_word(cur.peek()):
            target_edges.append(_parse_edge(cur))
            if cur.at("|"):
                cur.next()
            else:
                break

    fusion = fusion_from_pairs(pairs)
    if fusion is None:
        raise GraphParseError("inconsistent fusion pairs")
    lhs = Edge(label, tuple(lhs_nodes))
    actions = sort_entries(entries)
    interface = interface_of(actions, fusion, lhs.nodes, target_edges)
    target = Graph(interface, tuple(target_edges))
    p = Production(lhs=lhs, actions=actions, fusion=fusion, target=target)
    validate_production(p)
    if declared_new is not None:
        computed_new = interface - set(lhs.nodes)
        if set(declared_new) != computed_new:
            raise GraphParseError(
                f"declared new nodes {sorted(set(declared_new))} differ from the "
                f"determined {sorted(computed_new)}"
            )
    return p


def fusion_from_pairs(pairs: Iterable[tuple[Name, Name]]) -> Subst | None:
    """Canonical idempotent substitution with the pairs as kernel,
    least name in each class as representative."""
    return mgu([(Var(a), Var(b)) for a, b in pairs])


def print_production(p: Production) -> str:
    inner = ", ".join(
        f"{node}: {act}<{' '.join(str(v) for v in payload)}>" for node, act, payload in p.actions
    )
    if p.fusion:
        ker = ", ".join(f"{x}={p.fusion.apply_name(x)}" for x in sorted(p.fusion.domain))
        inner = f"{inner} / {ker}" if inner else f"/ {ker}"
    new = sorted(p.target.nodes - set(p.lhs.nodes), key=lambda n: n.sort_key)
    rhs = " | ".join(str(e) for e in p.target.edges) if p.target.edges else "nil"
    if new:
        decl = ", ".join(f"+{n}" for n in new)
        rhs = f"nodes {decl}; {rhs}"
    return f"{p.lhs} --[{inner}]--> {rhs}"


@dataclass(frozen=True)
class HgFile:
    graph: Graph | None
    productions: tuple[Production, ...]


def parse_hg(text: str) -> HgFile:
    """A graph/production file: one statement per line; lines starting
    with `nodes` declare the (single) graph, the rest are productions."""
    graph_part: Graph | None = None
    prods: list[Production] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            if stripped.startswith("nodes"):
                cur = _HgCursor(tokenize_hg(stripped))
                declared, edges = parse_graph_body(cur)
                if cur.peek() is not None:
                    raise GraphParseError(f"trailing input at {cur.peek()!r}")
                if graph_part is not None:
                    raise GraphParseError("more than one graph declaration")
                graph_part = Graph(frozenset(declared) | edge_names(edges), tuple(edges))
            else:
                prods.append(parse_production(stripped))
        except GraphParseError as err:
            raise GraphParseError(f"line {lineno}: {err}") from None
    return HgFile(graph=graph_part, productions=tuple(prods))
