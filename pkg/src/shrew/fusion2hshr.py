"""Processes as hypergraphs.

A normal form `(z⃗)(S1 | ... | Sn)` becomes: one edge per sequential
agent, attached to fresh nodes standing for its free-name occurrences;
one connector (`m`) edge per original name, joining the name to its
occurrences; and a closing `n` edge per restricted name. Occurrence
renaming makes every path between two process edges cross an odd number
of connectors, which the rewriting rules preserve.

Process edges rewrite via one production per summand; `m` edges route
`in`/`out` actions between any two tentacles, spawning bridges for the
transmitted names; `n` edges have no productions at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .fusion.normal import (
    NormalForm,
    StandardForm,
    linearize,
    normalize,
    rename_agent,
    standardize,
)
from .fusion.reduce import substitutive_effect
from .fusion.syntax import (
    Agent,
    Constant,
    FusionPrefix,
    InputPrefix,
    OutputPrefix,
    Prefix,
    Sum,
    all_names,
    free_names,
)
from .hshr.graph import Edge, Graph, edge_names, graph_iso
from .hshr.production import (
    ActionEntry,
    Production,
    Transition,
    sort_entries,
    validate_production,
)
from .terms import Name, NameGen, Subst

M_PREFIX = "m"
N_LABEL = "n"


def is_connector_label(label: str) -> bool:
    if label == N_LABEL:
        return True
    return label.startswith(M_PREFIX) and label[len(M_PREFIX) :].isdigit()


def m_label(k: int) -> str:
    return f"{M_PREFIX}{k}"


# ---------------------------------------------------------------------------
# Processes to judgements


def translate_process(
    nf: NormalForm,
    v: Sequence[Name] | None = None,
    w: Sequence[Name] | None = None,
) -> Graph:
    """The judgement for a normal form. `v` replaces the restricted
    names, `w` the occurrence names, both defaulting to the names the
    linear decomposition picks. Free names are kept as themselves."""
    lin = linearize(nf)
    if v is None:
        v = tuple(nf.restricted)
    if len(v) != len(nf.restricted):
        raise ValueError(f"need {len(nf.restricted)} restriction nodes, got {len(v)}")
    if w is None:
        w = lin.fnarray
    if len(w) != len(lin.fnarray):
        raise ValueError(f"need {len(lin.fnarray)} occurrence nodes, got {len(w)}")
    occ = dict(zip(lin.fnarray, w))
    vmap = dict(zip(nf.restricted, v))
    if set(occ.values()) & (set(vmap.values()) | set(vmap)):
        raise ValueError("occurrence nodes must be disjoint from restriction nodes")

    edges: list[Edge] = []
    for part in lin.parts:
        sf = standardize(part)
        edges.append(Edge(sf.label, tuple(occ[a] for a in sf.args)))
    # closures before amoeboids: rewriting engines commit edges in
    # order, and an early epsilon on each restricted hub prunes the
    # amoeboids' routing choices instead of discovering the conflict
    # after the fact
    for x in v:
        edges.append(Edge(N_LABEL, (x,)))
    for orig, occurrences in lin.groups:
        hub = vmap.get(orig, orig)
        tentacles = sorted((occ[o] for o in occurrences), key=lambda n: n.sort_key)
        edges.append(Edge(m_label(len(tentacles) + 1), (hub, *tentacles)))

    frees = free_names_of_nf(nf)
    nodes = frees | set(v) | set(occ.values())
    return Graph(frozenset(nodes), tuple(edges))


def free_names_of_nf(nf: NormalForm) -> set[Name]:
    out: set[Name] = set()
    for part in nf.parts:
        out |= free_names(part)
    return out - set(nf.restricted)


def translate_substitution(sigma: Mapping[Name, Sequence[Name]]) -> list[Edge]:
    """Connector edges for a name substitution given as image ->
    preimages; used standalone in tests and reports."""
    edges = []
    for hub in sorted(sigma, key=lambda n: n.sort_key):
        pre = sorted(sigma[hub], key=lambda n: n.sort_key)
        edges.append(Edge(m_label(len(pre) + 1), (hub, *pre)))
    return edges


# ---------------------------------------------------------------------------
# Prefixes to labels


def translate_prefix(p: Prefix) -> tuple[tuple[ActionEntry, ...], Subst]:
    """The action entries and fusion a prefix contributes: inputs and
    outputs expose `in_k`/`out_k` actions carrying their arguments,
    fusions expose nothing and yield a substitutive effect."""
    if isinstance(p, InputPrefix):
        return ((p.channel, f"in{len(p.args)}", tuple(p.args)),), Subst({})
    if isinstance(p, OutputPrefix):
        return ((p.channel, f"out{len(p.args)}", tuple(p.args)),), Subst({})
    assert isinstance(p, FusionPrefix)
    effect = substitutive_effect(p.pairs)
    assert effect is not None
    return (), effect


# ---------------------------------------------------------------------------
# Productions


@dataclass(frozen=True)
class ProcessOrigin:
    label: str
    branch: int
    kind: str  # "input" | "output" | "fusion"
    arity: int


@dataclass(frozen=True)
class AuxOrigin:
    k: int
    n: int
    i: int
    j: int


def process_productions(seq: Agent, collapse: bool = True) -> tuple[Production, ...]:
    """One production per summand of a sequential agent's standard form.
    Process constants are inert and yield none."""
    sf = standardize(seq)
    if isinstance(sf.canonical, Constant):
        return ()
    assert isinstance(sf.canonical, Sum)
    xs = tuple(Name(f"x{i + 1}") for i in range(sf.arity))
    lhs = Edge(sf.label, xs)
    out: list[Production] = []
    for j, branch in enumerate(sf.canonical.branches):
        out.append(_branch_production(sf, lhs, xs, j, branch.prefix, branch.cont, collapse))
    return tuple(out)


def _branch_production(
    sf: StandardForm,
    lhs: Edge,
    xs: tuple[Name, ...],
    j: int,
    prefix: Prefix,
    cont: Agent,
    collapse: bool,
) -> Production:
    entries, effect = translate_prefix(prefix)
    gen = NameGen(avoid=set(xs) | all_names(sf.canonical) | effect.names())

    cont_free = sorted(free_names(cont), key=lambda n: n.sort_key)
    xi = {f: gen.fresh_like(f) for f in cont_free}
    nf = normalize(rename_agent(cont, xi, gen), gen)
    jud = translate_process(nf)

    edges = list(jud.edges)
    for f in cont_free:
        edges.append(Edge(m_label(2), (f, xi[f])))
    for hub, pre in sorted(effect.classes().items(), key=lambda kv: kv[0].sort_key):
        edges.append(Edge(m_label(len(pre) + 1), (hub, *pre)))
    exposed = {v for _, _, payload in entries for v in payload}
    forgotten = set(xs) - exposed - effect.names() - set(cont_free)
    for x in sorted(forgotten, key=lambda n: n.sort_key):
        edges.append(Edge(N_LABEL, (x,)))

    target = Graph(frozenset(jud.nodes) | set(xs), tuple(edges))
    if collapse:
        target = collapse_even_chains(target, prefer=set(xs))

    if isinstance(prefix, InputPrefix):
        kind, arity = "input", len(prefix.args)
    elif isinstance(prefix, OutputPrefix):
        kind, arity = "output", len(prefix.args)
    else:
        kind, arity = "fusion", 0
    p = Production(
        lhs=lhs,
        actions=sort_entries(entries),
        fusion=Subst({}),
        target=target,
        origin=ProcessOrigin(sf.label, j, kind, arity),
    )
    validate_production(p)
    return p


def auxiliary_production(k: int, n: int, i: int, j: int) -> Production:
    """The `m_k` production routing an arity-`n` synchronization from
    tentacle `i` (input side) to tentacle `j` (output side), 1-based."""
    if not (1 <= i <= k and 1 <= j <= k and i != j):
        raise ValueError(f"positions must be distinct and within 1..{k}: {(i, j)}")
    xs = tuple(Name(f"x{p + 1}") for p in range(k))
    ys = tuple(Name(f"y{l + 1}") for l in range(n))
    zs = tuple(Name(f"z{l + 1}") for l in range(n))
    entries = ((xs[i - 1], f"in{n}", ys), (xs[j - 1], f"out{n}", zs))
    edges = [Edge(m_label(k), xs)]
    for l in range(n):
        edges.append(Edge(m_label(2), (ys[l], zs[l])))
    p = Production(
        lhs=Edge(m_label(k), xs),
        actions=sort_entries(entries),
        fusion=Subst({}),
        target=Graph(frozenset(xs) | set(ys) | set(zs), tuple(edges)),
        origin=AuxOrigin(k, n, i, j),
    )
    validate_production(p)
    return p


def needed_auxiliaries(g: Graph, arities: Iterable[int]) -> list[Production]:
    """All auxiliary productions that could fire on the connector edges
    of `g` for the given synchronization arities."""
    ks = sorted(
        {
            e.rank
            for e in g.edges
            if e.label.startswith(M_PREFIX) and e.label == m_label(e.rank)
        }
    )
    out = []
    for k in ks:
        for n in sorted(set(arities)):
            for i in range(1, k + 1):
                for j in range(1, k + 1):
                    if i != j:
                        out.append(auxiliary_production(k, n, i, j))
    return out


def prefix_arities(productions: Iterable[Production]) -> set[int]:
    out: set[int] = set()
    for p in productions:
        if isinstance(p.origin, ProcessOrigin) and p.origin.kind in ("input", "output"):
            out.add(p.origin.arity)
    return out


# ---------------------------------------------------------------------------
# Even connector-chain collapse


def collapse_even_chains(g: Graph, prefer: frozenset[Name] | set[Name] = frozenset()) -> Graph:
    """Remove even-length chains of `m2` edges whose inner nodes have no
    other attachment, merging the chain's nodes. The survivor is the
    least preferred node on the chain, else the least node."""
    edges = list(g.edges)
    nodes = set(g.nodes)
    changed = True
    while changed:
        changed = False
        slots: dict[Name, list[int]] = {}
        for idx, e in enumerate(edges):
            for x in e.nodes:
                slots.setdefault(x, []).append(idx)
        def inner(x: Name) -> bool:
            ids = slots.get(x, [])
            return (
                len(ids) == 2
                and ids[0] != ids[1]
                and all(edges[i].label == m_label(2) for i in ids)
            )

        used: set[int] = set()
        for start, e in enumerate(edges):
            if e.label != m_label(2) or start in used:
                continue
            chain = [start]
            ends: list[Name] = []
            for x in e.nodes:
                cur_edge, cur_node = start, x
                while inner(cur_node):
                    nxt = next(i for i in slots[cur_node] if i != cur_edge)
                    if nxt in chain:
                        break
                    chain.append(nxt)
                    cur_node = next(n for n in edges[nxt].nodes if n != cur_node)
                    cur_edge = nxt
                ends.append(cur_node)
            if any(inner(x) for x in ends):
                continue  # a ring; leave it alone
            if len(chain) % 2 != 0:
                used.update(chain)
                continue
            merged = set()
            for i in chain:
                merged.update(edges[i].nodes)
            preferred = sorted(merged & set(prefer), key=lambda n: n.sort_key)
            rep = preferred[0] if preferred else min(merged, key=lambda n: n.sort_key)
            keep = []
            for i, other in enumerate(edges):
                if i in chain:
                    continue
                keep.append(
                    Edge(other.label, tuple(rep if n in merged else n for n in other.nodes))
                )
            edges = keep
            nodes -= merged - {rep}
            changed = True
            break
    return Graph(frozenset(nodes), tuple(edges))


# ---------------------------------------------------------------------------
# Amoeboids


@dataclass(frozen=True)
class AmoeboidReport:
    kind: str  # "simple" | "structured" | "pseudo" | "closed" | "not-amoeboid"
    external: frozenset[Name]
    internal: frozenset[Name]
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.kind != "not-amoeboid"


def classify_amoeboid(edges: Sequence[Edge], external: Iterable[Name]) -> AmoeboidReport:
    """Check that a connected bunch of connector edges realizes a name
    equivalence over `external`: external nodes sit on exactly one
    tentacle, internal ones on exactly two, and every external-to-
    external path crosses an odd number of edges. A ring of `m2` edges
    with no external nodes is a pseudoamoeboid, any other closed
    component an amoeboid for the empty set; a lone `m` edge is
    simple."""
    ext = frozenset(external)
    if not edges:
        return AmoeboidReport("not-amoeboid", ext, frozenset(), "no edges")
    for e in edges:
        if not is_connector_label(e.label):
            return AmoeboidReport("not-amoeboid", ext, frozenset(), f"edge {e.label} is not a connector")
    covered = edge_names(edges)
    if not ext <= covered:
        missing = ", ".join(str(n) for n in sorted(ext - covered, key=lambda n: n.sort_key))
        return AmoeboidReport("not-amoeboid", ext, frozenset(), f"external nodes not attached: {missing}")
    internal = frozenset(covered - ext)

    degree: dict[Name, int] = {}
    incident: dict[Name, list[int]] = {}
    for idx, e in enumerate(edges):
        for x in e.nodes:
            degree[x] = degree.get(x, 0) + 1
            incident.setdefault(x, []).append(idx)
    for x in ext:
        if degree[x] != 1:
            return AmoeboidReport("not-amoeboid", ext, internal, f"external node {x} on {degree[x]} tentacles")
    for x in internal:
        if degree[x] != 2:
            return AmoeboidReport("not-amoeboid", ext, internal, f"internal node {x} on {degree[x]} tentacles")

    if not _connected(edges, covered, incident):
        return AmoeboidReport("not-amoeboid", ext, internal, "not connected")

    if not ext:
        if all(e.label == m_label(2) for e in edges):
            return AmoeboidReport("pseudo", ext, internal)
        return AmoeboidReport("closed", ext, internal)

    bad = _even_path(edges, incident, ext)
    if bad is not None:
        a, b = bad
        return AmoeboidReport("not-amoeboid", ext, internal, f"even path between {a} and {b}")
    if len(edges) == 1 and edges[0].label != N_LABEL:
        return AmoeboidReport("simple", ext, internal)
    return AmoeboidReport("structured", ext, internal)


def _connected(edges: Sequence[Edge], covered: frozenset[Name], incident: dict[Name, list[int]]) -> bool:
    if not edges:
        return True
    seen_e = {0}
    stack = [0]
    while stack:
        for x in edges[stack.pop()].nodes:
            for i in incident[x]:
                if i not in seen_e:
                    seen_e.add(i)
                    stack.append(i)
    return len(seen_e) == len(edges)


def _even_path(
    edges: Sequence[Edge], incident: dict[Name, list[int]], ext: frozenset[Name]
) -> tuple[Name, Name] | None:
    """A pair of external nodes joined by an even simple path, if any."""
    for a in sorted(ext, key=lambda n: n.sort_key):
        stack: list[tuple[Name, frozenset[int], int]] = [(a, frozenset(), 0)]
        while stack:
            at, used, length = stack.pop()
            if at in ext and length > 0:
                if length % 2 == 0:
                    return (a, at)
                continue
            for i in incident[at]:
                if i in used:
                    continue
                for nxt in edges[i].nodes:
                    if nxt != at:
                        stack.append((nxt, used | {i}, length + 1))
    return None


class NotAmoeboid(ValueError):
    pass


def normalize_graph(g: Graph, protected: Iterable[Name] = ()) -> Graph:
    """Fold every connector component down to the equivalence it imposes
    on the nodes that still matter: those attached to process edges,
    plus `protected`.

    A component keeping two or more such anchors becomes a single `m`
    edge over them; one keeping a single anchor becomes `n(anchor)` when
    the component carries a restriction closure (an `n` edge), else
    nothing; one keeping no anchor vanishes entirely — that covers
    pseudoamoeboids and the closed residue left behind by names whose
    occurrences have all been consumed. Isolated nodes outside
    `protected` are dropped too. Raises NotAmoeboid when two anchors are
    joined by an even path, which would flip synchronization polarity."""
    keep = frozenset(protected)
    process_edges = [e for e in g.edges if not is_connector_label(e.label)]
    connector_edges = [e for e in g.edges if is_connector_label(e.label)]
    touched = edge_names(process_edges) | keep

    incident: dict[Name, list[int]] = {}
    for idx, e in enumerate(connector_edges):
        for x in e.nodes:
            incident.setdefault(x, []).append(idx)
    seen: set[int] = set()
    components: list[list[Edge]] = []
    for start in range(len(connector_edges)):
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            for x in connector_edges[stack.pop()].nodes:
                for i in incident[x]:
                    if i not in comp:
                        comp.add(i)
                        stack.append(i)
        seen |= comp
        components.append([connector_edges[i] for i in sorted(comp)])
    components.sort(key=lambda comp: min(n.sort_key for n in edge_names(comp)))

    out_edges = list(process_edges)
    for comp in components:
        anchors = sorted(edge_names(comp) & touched, key=lambda n: n.sort_key)
        if not anchors:
            continue
        if len(anchors) == 1:
            if any(e.label == N_LABEL for e in comp):
                out_edges.append(Edge(N_LABEL, (anchors[0],)))
            continue
        comp_incident: dict[Name, list[int]] = {}
        for idx, e in enumerate(comp):
            for x in e.nodes:
                comp_incident.setdefault(x, []).append(idx)
        bad = _even_path(comp, comp_incident, frozenset(anchors))
        if bad is not None:
            raise NotAmoeboid(f"even path between anchors {bad[0]} and {bad[1]}")
        out_edges.append(Edge(m_label(len(anchors)), tuple(anchors)))
    return Graph(edge_names(out_edges) | keep, tuple(out_edges))


def same_modulo_amoeboids(a: Graph, b: Graph, fixed: Iterable[Name] = ()) -> bool:
    """Whether two graphs in the translation image denote the same
    process: equal up to renaming outside `fixed`, amoeboid shape, and
    tentacle order on connectors."""
    try:
        na = normalize_graph(a, protected=fixed)
        nb = normalize_graph(b, protected=fixed)
    except NotAmoeboid:
        return False
    labels = {e.label for e in na.edges if e.label != N_LABEL and is_connector_label(e.label)}
    return graph_iso(na, nb, fixed=fixed, unordered=labels) is not None


# ---------------------------------------------------------------------------
# Which transitions mirror reductions


def interleaving_filter(t: Transition) -> bool:
    """Keep the transitions that play a single calculus step: exactly
    one complementary pair of input/output summands of equal arity, or
    exactly one fusion summand, helped by any number of connector
    productions."""
    kinds = []
    for used in t.used or ():
        if used is not None and isinstance(used.origin, ProcessOrigin):
            kinds.append((used.origin.kind, used.origin.arity))
    if len(kinds) == 1:
        return kinds[0][0] == "fusion"
    if len(kinds) == 2:
        (k1, a1), (k2, a2) = kinds
        return {k1, k2} == {"input", "output"} and a1 == a2
    return False
