"""Transition derivation.

`derive_transition` implements the standard derivation shape: one fresh
copy of a production per rewritten edge, a single merge along the
attachment map, then default actions for isolated nodes. The merge
unifier prefers representatives among the source nodes, so fused
classes keep a source name whenever possible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from ..terms import Name, NameGen, Subst, Var, mgu
from .graph import Edge, Graph, edge_names, isolated_nodes
from .production import (
    ActionEntry,
    Production,
    Transition,
    action_map,
    sort_entries,
    transitions_equal_up_to_renaming,
    validate_production,
)


@dataclass(frozen=True)
class Blocked:
    """A choice map that admits no transition."""

    node: Name
    reason: str  # "action-mismatch" | "arity-mismatch"
    left: str
    right: str

    def __str__(self) -> str:
        return f"{self.reason} at {self.node}: {self.left} vs {self.right}"


NewNodes = Mapping[Name, tuple[str, tuple[Name, ...]]]


def derive_transition(
    g: Graph,
    choice: Mapping[int, Production],
    new_nodes: NewNodes | None = None,
    gen: NameGen | None = None,
) -> Transition | Blocked:
    """Apply the chosen production to each edge occurrence (missing
    indices stay idle) and synchronize. Returns Blocked when two
    attachments of one node disagree on the action."""
    for idx, p in choice.items():
        if not 0 <= idx < len(g.edges):
            raise ValueError(f"no edge occurrence {idx}")
        e = g.edges[idx]
        if p.lhs.label != e.label or p.lhs.rank != e.rank:
            raise ValueError(f"production {p.lhs} does not match edge {e}")
        validate_production(p)
    iso = isolated_nodes(g)
    if new_nodes:
        for x in new_nodes:
            if x not in iso:
                raise ValueError(f"{x} is not an isolated node of the source")
    if gen is None:
        avoid = set(g.nodes)
        for p in choice.values():
            avoid |= p.names()
        if new_nodes:
            for a, payload in new_nodes.values():
                avoid |= set(payload)
        gen = NameGen(avoid=avoid)

    # One fresh copy per rewritten edge; sp maps copy source nodes to
    # their attachments and is the identity elsewhere.
    sp: dict[Name, Name] = {}
    copy_entries: list[tuple[Name, str, tuple[Name, ...]]] = []  # on copy nodes
    fusion_pairs: list[tuple[Name, Name]] = []
    copy_targets: list[tuple[int, Graph]] = []
    for idx in sorted(choice):
        p = choice[idx]
        e = g.edges[idx]
        mu = {n: gen.fresh_like(n) for n in sorted(p.names(), key=lambda n: n.sort_key)}
        for schema_node, attach in zip(p.lhs.nodes, e.nodes):
            sp[mu[schema_node]] = attach
        amap = action_map(p.actions)
        for schema_node in p.lhs.nodes:
            act = amap.get(schema_node)
            if act is not None:
                copy_entries.append(
                    (mu[schema_node], act[0], tuple(mu[v] for v in act[1]))
                )
        for x in p.fusion.domain:
            fusion_pairs.append((mu[x], mu[p.fusion.apply_name(x)]))
        copy_targets.append(
            (
                idx,
                Graph(
                    frozenset(mu[n] for n in p.target.nodes),
                    tuple(Edge(te.label, tuple(mu[n] for n in te.nodes)) for te in p.target.edges),
                ),
            )
        )

    def attach(n: Name) -> Name:
        return sp.get(n, n)

    # Hoare check: group the copies' actions by attachment node.
    per_node: dict[Name, list[tuple[str, tuple[Name, ...]]]] = {}
    for node, act, payload in copy_entries:
        per_node.setdefault(attach(node), []).append((act, payload))
    epsilon_nodes: set[Name] = set()
    for idx, e in enumerate(g.edges):
        p = choice.get(idx)
        exposed = set() if p is None else {
            e.nodes[pos]
            for pos, schema_node in enumerate((p.lhs.nodes if p else ()))
            if schema_node in action_map(p.actions)
        }
        for n in e.nodes:
            if n not in exposed:
                epsilon_nodes.add(n)
    for z, acts in sorted(per_node.items(), key=lambda kv: kv[0].sort_key):
        symbols = sorted({a for a, _ in acts})
        if z in epsilon_nodes and symbols:
            return Blocked(z, "action-mismatch", symbols[0], "eps")
        if len(symbols) > 1:
            return Blocked(z, "action-mismatch", symbols[0], symbols[1])
        arities = sorted({len(payload) for _, payload in acts})
        if len(arities) > 1:
            return Blocked(z, "arity-mismatch", str(arities[0]), str(arities[1]))

    # Merge unifier: payload agreement at shared nodes plus the copies'
    # fusions, representatives preferably source nodes.
    equations = []
    for z, acts in sorted(per_node.items(), key=lambda kv: kv[0].sort_key):
        first = acts[0]
        for other in acts[1:]:
            for u, v in zip(first[1], other[1]):
                equations.append((Var(attach(u)), Var(attach(v))))
    for u, v in fusion_pairs:
        equations.append((Var(attach(u)), Var(attach(v))))
    preferred = tuple(sorted(g.nodes, key=lambda n: n.sort_key))
    rho = mgu(equations, preferred=preferred)
    assert rho is not None  # node equations cannot clash

    def final(n: Name) -> Name:
        return rho.apply_name(attach(n))

    entries: list[ActionEntry] = []
    for node, act, payload in copy_entries:
        entries.append((attach(node), act, tuple(final(v) for v in payload)))
    dedup: dict[Name, ActionEntry] = {}
    for entry in entries:
        dedup.setdefault(entry[0], entry)
    if new_nodes:
        for x in sorted(new_nodes, key=lambda n: n.sort_key):
            act, payload = new_nodes[x]
            dedup[x] = (x, act, payload)

    pi = Subst.of_names(
        {x: rho.apply_name(x) for x in sorted(g.nodes, key=lambda n: n.sort_key)}
    )

    target_edges: list[Edge] = []
    rewritten = set(choice)
    for idx, e in enumerate(g.edges):
        if idx in rewritten:
            continue
        target_edges.append(Edge(e.label, tuple(rho.apply_name(n) for n in e.nodes)))
    for _, tg in copy_targets:
        for te in tg.edges:
            target_edges.append(Edge(te.label, tuple(final(n) for n in te.nodes)))

    interface = {rho.apply_name(x) for x in g.nodes}
    for _, act, payload in dedup.values():
        interface.update(payload)
    interface |= edge_names(target_edges)

    used = tuple(choice.get(idx) for idx in range(len(g.edges)))
    return Transition(
        source=g,
        actions=sort_entries(dedup.values()),
        fusion=pi,
        target=Graph(frozenset(interface), tuple(target_edges)),
        used=used,
    )


@dataclass(frozen=True)
class EnumerationResult:
    transitions: tuple[Transition, ...]
    complete: bool

    def __iter__(self):
        return iter(self.transitions)

    def __len__(self) -> int:
        return len(self.transitions)


def enumerate_transitions(
    g: Graph,
    productions: Sequence[Production],
    max_fresh: int = 64,
    keep_blocked: bool = False,
) -> EnumerationResult:
    """All transitions over choice maps built from `productions`
    (every edge may also idle), deduplicated up to injective renaming.
    Isolated nodes take the default ε action. Choice maps whose fresh
    copies would exceed `max_fresh` fresh names are skipped and the
    result is flagged incomplete."""
    candidates: list[list[Production | None]] = []
    for e in g.edges:
        cs: list[Production | None] = [None]
        for p in productions:
            if p.lhs.label == e.label and p.lhs.rank == e.rank:
                cs.append(p)
        candidates.append(cs)

    results: list[Transition] = []
    complete = True

    def symbol_conflict(committed: dict[Name, tuple[str, int]], idx: int, p: Production | None) -> bool:
        e = g.edges[idx]
        amap = {} if p is None else action_map(p.actions)
        if p is None:
            exposed: dict[Name, tuple[str, int]] = {n: ("", 0) for n in e.nodes}
        else:
            exposed = {}
            for pos, schema_node in enumerate(p.lhs.nodes):
                node = e.nodes[pos]
                act = amap.get(schema_node)
                sig = (act[0], len(act[1])) if act else ("", 0)
                prev = exposed.get(node)
                if prev is not None and prev != sig:
                    return True
                exposed[node] = sig
        for node, sig in exposed.items():
            prev = committed.get(node)
            if prev is not None and prev != sig:
                return True
        return False

    def commit(committed: dict[Name, tuple[str, int]], idx: int, p: Production | None) -> dict[Name, tuple[str, int]]:
        out = dict(committed)
        e = g.edges[idx]
        amap = {} if p is None else action_map(p.actions)
        for pos, node in enumerate(e.nodes):
            if p is None:
                out[node] = ("", 0)
            else:
                act = amap.get(p.lhs.nodes[pos])
                out[node] = (act[0], len(act[1])) if act else ("", 0)
        return out

    def fresh_cost(assignment: list[Production | None]) -> int:
        return sum(len(p.names()) for p in assignment if p is not None)

    def search(idx: int, committed: dict[Name, tuple[str, int]], assignment: list[Production | None]) -> None:
        nonlocal complete
        if idx == len(g.edges):
            if fresh_cost(assignment) > max_fresh:
                complete = False
                return
            choice = {i: p for i, p in enumerate(assignment) if p is not None}
            t = derive_transition(g, choice)
            if isinstance(t, Blocked):
                return
            for prev in results:
                if transitions_equal_up_to_renaming(prev, t):
                    return
            results.append(t)
            return
        for p in candidates[idx]:
            if symbol_conflict(committed, idx, p):
                continue
            search(idx + 1, commit(committed, idx, p), assignment + [p])

    search(0, {}, [])
    return EnumerationResult(tuple(results), complete)
