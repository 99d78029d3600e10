"""Hypergraphs as judgements: a node interface plus a multiset of
labelled hyperedges.

Text syntax (one graph per line):

    nodes u, x, y; C(x,y) | C(y,x)

`nil` stands for the empty edge list. Labels are identifiers or
`L{...}` forms (braces balanced), which lets translated process edges
round-trip.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator

from ..terms import Name


@dataclass(frozen=True)
class Edge:
    label: str
    nodes: tuple[Name, ...]

    @property
    def rank(self) -> int:
        return len(self.nodes)

    def __str__(self) -> str:
        return f"{self.label}({','.join(str(n) for n in self.nodes)})"


@dataclass(frozen=True)
class Graph:
    nodes: frozenset[Name]
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        for e in self.edges:
            missing = set(e.nodes) - self.nodes
            if missing:
                raise ValueError(f"edge {e} uses nodes outside the interface: {sorted(missing)}")

    def __str__(self) -> str:
        return print_graph(self)


def graph(nodes: Iterable[Name], edges: Iterable[Edge]) -> Graph:
    return Graph(frozenset(nodes), tuple(edges))


def edge_names(edges: Iterable[Edge]) -> set[Name]:
    out: set[Name] = set()
    for e in edges:
        out.update(e.nodes)
    return out


def isolated_nodes(g: Graph) -> set[Name]:
    return set(g.nodes) - edge_names(g.edges)


def same_graph(a: Graph, b: Graph) -> bool:
    """Structural congruence: same interface, same edge multiset."""
    return a.nodes == b.nodes and Counter(a.edges) == Counter(b.edges)


def rename_graph(g: Graph, mapping: dict[Name, Name]) -> Graph:
    """Apply a (possibly merging) node renaming."""

    def f(n: Name) -> Name:
        return mapping.get(n, n)

    return Graph(
        frozenset(f(n) for n in g.nodes),
        tuple(Edge(e.label, tuple(f(n) for n in e.nodes)) for e in g.edges),
    )


def sorted_edges(edges: Iterable[Edge]) -> list[Edge]:
    return sorted(edges, key=lambda e: (e.label, tuple(n.sort_key for n in e.nodes)))


# ---------------------------------------------------------------------------
# Isomorphism up to injective renaming


def graph_iso(
    a: Graph,
    b: Graph,
    fixed: Iterable[Name] = (),
    partial: dict[Name, Name] | None = None,
    ignore_isolated: bool = False,
    unordered: Iterable[str] = (),
) -> dict[Name, Name] | None:
    """An injective node bijection turning `a` into `b`, identity on
    `fixed` and extending `partial`, or None.

    With `ignore_isolated`, nodes outside every edge (and outside
    `fixed`) are disregarded on both sides. Edges whose label is listed
    in `unordered` match up to permutation of their attachments.
    """
    unordered = frozenset(unordered)
    fixed = set(fixed)
    base: dict[Name, Name] = dict(partial) if partial else {}
    for x in fixed:
        if base.setdefault(x, x) != x:
            return None

    sig_a = Counter((e.label, e.rank) for e in a.edges)
    sig_b = Counter((e.label, e.rank) for e in b.edges)
    if sig_a != sig_b:
        return None

    order = sorted(range(len(a.edges)), key=lambda i: (a.edges[i].label, -a.edges[i].rank))
    by_sig: dict[tuple[str, int], list[int]] = {}
    for j, e in enumerate(b.edges):
        by_sig.setdefault((e.label, e.rank), []).append(j)

    used = [False] * len(b.edges)

    def extend(m: dict[Name, Name], xs: tuple[Name, ...], ys: tuple[Name, ...]) -> dict[Name, Name] | None:
        out = m
        for x, y in zip(xs, ys):
            img = out.get(x)
            if img is not None:
                if img != y:
                    return None
                continue
            if x in fixed and x != y:
                return None
            if y in out.values():
                return None
            if out is m:
                out = dict(m)
            out[x] = y
        return out

    def unordered_extensions(
        m: dict[Name, Name], xs: tuple[Name, ...], pool: tuple[Name, ...]
    ) -> Iterator[dict[Name, Name]]:
        # assign target slots to source slots up to permutation, but one
        # slot at a time so bound nodes prune instead of exploding
        counts = Counter(pool)

        def go(i: int, cur: dict[Name, Name]) -> Iterator[dict[Name, Name]]:
            if i == len(xs):
                yield cur
                return
            x = xs[i]
            img = cur.get(x)
            if img is not None:
                if counts[img] > 0:
                    counts[img] -= 1
                    yield from go(i + 1, cur)
                    counts[img] += 1
                return
            taken = set(cur.values())
            for y in sorted(counts, key=lambda n: n.sort_key):
                if counts[y] == 0 or y in taken:
                    continue
                if x in fixed and x != y:
                    continue
                counts[y] -= 1
                nxt = dict(cur)
                nxt[x] = y
                yield from go(i + 1, nxt)
                counts[y] += 1

        yield from go(0, m)

    def search(pos: int, m: dict[Name, Name]) -> dict[Name, Name] | None:
        if pos == len(order):
            return m
        e = a.edges[order[pos]]
        for j in by_sig.get((e.label, e.rank), []):
            if used[j]:
                continue
            if e.label in unordered:
                extensions: Iterable[dict[Name, Name]] = unordered_extensions(
                    m, e.nodes, b.edges[j].nodes
                )
            else:
                m2 = extend(m, e.nodes, b.edges[j].nodes)
                extensions = () if m2 is None else (m2,)
            for m2 in extensions:
                used[j] = True
                found = search(pos + 1, m2)
                used[j] = False
                if found is not None:
                    return found
        return None

    m = base
    for x, y in list(m.items()):
        if (x in a.nodes) != (y in b.nodes):
            return None
    result = search(0, m)
    if result is None:
        return None

    rest_a = sorted(a.nodes - set(result), key=lambda n: n.sort_key)
    taken = set(result.values())
    rest_b = sorted(b.nodes - taken, key=lambda n: n.sort_key)
    if ignore_isolated:
        rest_a = [x for x in rest_a if x in fixed]
        rest_b = [y for y in rest_b if y in fixed]
    # Fixed leftovers must be present and map to themselves; no leftover
    # on the right may be a fixed name we cannot reach.
    for x in [x for x in rest_a if x in fixed]:
        if x not in rest_b:
            return None
        result[x] = x
        rest_b.remove(x)
    free_a = [x for x in rest_a if x not in fixed]
    if any(y in fixed for y in rest_b):
        return None
    if len(free_a) != len(rest_b):
        return None
    for x, y in zip(free_a, rest_b):
        result[x] = y
    return result


# ---------------------------------------------------------------------------
# Parsing and printing


class GraphParseError(ValueError):
    pass


_NAME_CHARS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_~'"


def tokenize_hg(text: str) -> list[str]:
    """Tokens: identifiers (possibly `L{...}` labels), punctuation."""
    tokens: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isspace():
            i += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and text[j] in _NAME_CHARS:
                j += 1
            if j < n and text[j] == "{":
                depth = 0
                k = j
                while k < n:
                    if text[k] == "{":
                        depth += 1
                    elif text[k] == "}":
                        depth -= 1
                        if depth == 0:
                            break
                    k += 1
                if depth != 0:
                    raise GraphParseError("unbalanced braces in label")
                tokens.append(text[i : k + 1])
                i = k + 1
                continue
            tokens.append(text[i:j])
            i = j
            continue
        if text.startswith("--[", i):
            tokens.append("--[")
            i += 3
            continue
        if text.startswith("]-->", i):
            tokens.append("]-->")
            i += 4
            continue
        if c in "();|,<>:=+/":
            tokens.append(c)
            i += 1
            continue
        raise GraphParseError(f"cannot tokenize near {text[i:i+12]!r}")
    return tokens


def _is_word(tok: str) -> bool:
    return bool(tok) and (tok[0].isalpha() or tok[0] == "_")


class _HgCursor:
    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> str:
        t = self.peek()
        if t is None:
            raise GraphParseError("unexpected end of input")
        self.i += 1
        return t

    def expect(self, t: str) -> None:
        got = self.next()
        if got != t:
            raise GraphParseError(f"expected {t!r}, found {got!r}")

    def at(self, t: str) -> bool:
        return self.peek() == t

    def word(self) -> str:
        t = self.next()
        if not _is_word(t):
            raise GraphParseError(f"expected an identifier, found {t!r}")
        return t

    def name(self) -> Name:
        return parse_name(self.word())


def parse_name(word: str) -> Name:
    """Read back the `base~k` rendering of generated names."""
    if "~" in word and not word.endswith("~") and word.rsplit("~", 1)[1].isdigit():
        base, idx = word.rsplit("~", 1)
        return Name(base, int(idx))
    return Name(word)


def _parse_edge(cur: _HgCursor) -> Edge:
    label = cur.word()
    cur.expect("(")
    nodes: list[Name] = []
    while not cur.at(")"):
        if cur.at(","):
            cur.next()
            continue
        nodes.append(cur.name())
    cur.next()
    return Edge(label, tuple(nodes))


def parse_graph_body(cur: _HgCursor) -> tuple[list[Name], list[Edge]]:
    """`nodes <list>; <edges>` — returns (declared nodes, edges)."""
    cur.expect("nodes")
    declared: list[Name] = []
    while not cur.at(";"):
        if cur.at(","):
            cur.next()
            continue
        declared.append(cur.name())
    cur.next()
    edges: list[Edge] = []
    if cur.at("nil"):
        cur.next()
        return declared, edges
    if cur.peek() is not None and _is_word(cur.peek()):
        edges.append(_parse_edge(cur))
        while cur.at("|"):
            cur.next()
            edges.append(_parse_edge(cur))
    return declared, edges


def parse_graph(text: str) -> Graph:
    cur = _HgCursor(tokenize_hg(text))
    declared, edges = parse_graph_body(cur)
    if cur.peek() is not None:
        raise GraphParseError(f"trailing input at {cur.peek()!r}")
    nodes = set(declared) | edge_names(edges)
    return Graph(frozenset(nodes), tuple(edges))


def print_graph(g: Graph) -> str:
    nodes = ", ".join(str(n) for n in sorted(g.nodes, key=lambda n: n.sort_key))
    body = " | ".join(str(e) for e in g.edges) if g.edges else "nil"
    return f"nodes {nodes}; {body}"


# ---------------------------------------------------------------------------
# DOT export (bipartite rendering: hyperedges as boxes)


def to_dot(g: Graph, title: str = "G") -> str:
    def esc(s: str) -> str:
        return s.replace("\\", "\\\\").replace('"', '\\"')

    lines = [f'graph "{esc(title)}" {{']
    lines.append("  node [fontsize=11];")
    for n in sorted(g.nodes, key=lambda x: x.sort_key):
        lines.append(f'  "n_{esc(str(n))}" [label="{esc(str(n))}", shape=circle];')
    for i, e in enumerate(g.edges):
        lines.append(f'  "e_{i}" [label="{esc(e.label)}", shape=box];')
        for pos, n in enumerate(e.nodes):
            lines.append(f'  "e_{i}" -- "n_{esc(str(n))}" [label="{pos + 1}", fontsize=9];')
    lines.append("}")
    return "\n".join(lines) + "\n"
