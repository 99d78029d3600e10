"""Process syntax: AST, parser and pretty-printer.

Grammar (documented with examples in docs/formats.md):

    process   := seq ('|' seq)*
    seq       := sum | atom
    sum       := branch ('+' branch)*
    branch    := prefix '.' item            item := atom | branch
    prefix    := name '<' names? '>'        input
               | "'" name '<' names? '>'    output
               | '{' (name '=' name),* '}'  fusion
    atom      := '0'
               | Upper '(' names ')'        process constant
               | Upper                      agent variable
               | '(' names ')' seq          scope
               | 'rec' Upper '.' seq
               | '(' process ')'

Names are lowercase identifiers, process constants and agent variables
uppercase ones. `#` starts a line comment. Name lists accept both
whitespace and commas.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from ..terms import Name


class Agent:
    __slots__ = ()

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class Inaction(Agent):
    pass


@dataclass(frozen=True)
class InputPrefix:
    channel: Name
    args: tuple[Name, ...] = ()

    def __str__(self) -> str:
        return f"{self.channel}<{' '.join(str(a) for a in self.args)}>"


@dataclass(frozen=True)
class OutputPrefix:
    channel: Name
    args: tuple[Name, ...] = ()

    def __str__(self) -> str:
        return f"'{self.channel}<{' '.join(str(a) for a in self.args)}>"


@dataclass(frozen=True)
class FusionPrefix:
    pairs: tuple[tuple[Name, Name], ...] = ()

    def __str__(self) -> str:
        return "{" + ", ".join(f"{a}={b}" for a, b in self.pairs) + "}"


Prefix = InputPrefix | OutputPrefix | FusionPrefix


@dataclass(frozen=True)
class Branch:
    prefix: Prefix
    cont: Agent


@dataclass(frozen=True)
class Sum(Agent):
    """A guarded sum with at least one branch.

    Branches are stored in written order but compared as a multiset by
    the congruence checker.
    """

    branches: tuple[Branch, ...]


@dataclass(frozen=True)
class Constant(Agent):
    """An uninterpreted sequential process such as Q(x,y,z).

    Constants take part in every translation but have no behaviour of
    their own: they can only stay idle.
    """

    label: str
    args: tuple[Name, ...]


@dataclass(frozen=True)
class Par(Agent):
    parts: tuple[Agent, ...]  # flattened, len >= 2


@dataclass(frozen=True)
class Scope(Agent):
    names: tuple[Name, ...]
    body: Agent


@dataclass(frozen=True)
class Rec(Agent):
    var: str
    body: Agent


@dataclass(frozen=True)
class AgentVar(Agent):
    var: str


def par(parts: list[Agent]) -> Agent:
    """Smart constructor: flattens nested composition, drops nothing."""
    flat: list[Agent] = []
    for p in parts:
        if isinstance(p, Par):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return Inaction()
    if len(flat) == 1:
        return flat[0]
    return Par(tuple(flat))


def prefix_names(p: Prefix) -> list[Name]:
    """All names of a prefix, in written order (with repeats)."""
    if isinstance(p, (InputPrefix, OutputPrefix)):
        return [p.channel, *p.args]
    return [n for pair in p.pairs for n in pair]


def free_names(agent: Agent) -> set[Name]:
    out: set[Name] = set()

    def walk(a: Agent, bound: frozenset[Name]) -> None:
        if isinstance(a, Inaction):
            return
        if isinstance(a, (Constant,)):
            out.update(n for n in a.args if n not in bound)
        elif isinstance(a, Sum):
            for br in a.branches:
                out.update(n for n in prefix_names(br.prefix) if n not in bound)
                walk(br.cont, bound)
        elif isinstance(a, Par):
            for p in a.parts:
                walk(p, bound)
        elif isinstance(a, Scope):
            walk(a.body, bound | set(a.names))
        elif isinstance(a, Rec):
            walk(a.body, bound)
        elif isinstance(a, AgentVar):
            pass
        else:
            raise TypeError(f"not an agent: {a!r}")

    walk(agent, frozenset())
    return out


def all_names(agent: Agent) -> set[Name]:
    """Every name appearing anywhere, bound or free."""
    out: set[Name] = set()

    def walk(a: Agent) -> None:
        if isinstance(a, Constant):
            out.update(a.args)
        elif isinstance(a, Sum):
            for br in a.branches:
                out.update(prefix_names(br.prefix))
                walk(br.cont)
        elif isinstance(a, Par):
            for p in a.parts:
                walk(p)
        elif isinstance(a, Scope):
            out.update(a.names)
            walk(a.body)
        elif isinstance(a, Rec):
            walk(a.body)

    walk(agent)
    return out


def free_agent_vars(agent: Agent) -> set[str]:
    out: set[str] = set()

    def walk(a: Agent, bound: frozenset[str]) -> None:
        if isinstance(a, AgentVar):
            if a.var not in bound:
                out.add(a.var)
        elif isinstance(a, Sum):
            for br in a.branches:
                walk(br.cont, bound)
        elif isinstance(a, Par):
            for p in a.parts:
                walk(p, bound)
        elif isinstance(a, Scope):
            walk(a.body, bound)
        elif isinstance(a, Rec):
            walk(a.body, bound | {a.var})

    walk(agent, frozenset())
    return out


def check_guarded(agent: Agent) -> None:
    """Raise ValueError unless every recursion variable occurrence is
    within a sequential agent (i.e. under a prefix) of its binder."""

    def walk(a: Agent, pending: frozenset[str]) -> None:
        # `pending` holds recursion variables whose occurrence at the
        # current position would be unguarded.
        if isinstance(a, AgentVar):
            if a.var in pending:
                raise ValueError(f"unguarded recursion variable {a.var}")
        elif isinstance(a, Sum):
            for br in a.branches:
                walk(br.cont, frozenset())
        elif isinstance(a, Par):
            for p in a.parts:
                walk(p, pending)
        elif isinstance(a, Scope):
            walk(a.body, pending)
        elif isinstance(a, Rec):
            walk(a.body, pending | {a.var})

    walk(agent, frozenset())


# ---------------------------------------------------------------------------
# Parsing


class ParseError(ValueError):
    pass


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<comment>\#[^\n]*)
      | (?P<lower>[a-z_][A-Za-z0-9_]*)
      | (?P<upper>[A-Z][A-Za-z0-9_]*)
      | (?P<zero>0)
      | (?P<punct>[<>(){}|+.,'=])
    )""",
    re.VERBOSE,
)

_RESERVED = {"rec"}


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:].lstrip()
            if not rest:
                break
            raise ParseError(f"cannot tokenize near {rest[:20]!r}")
        pos = m.end()
        kind = m.lastgroup
        if kind == "comment":
            continue
        assert kind is not None
        tokens.append((kind, m.group(kind)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> tuple[str, str] | None:
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def next(self) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, value: str) -> None:
        tok = self.next()
        if tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1]!r}")

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok is not None and tok[1] == value

    # -- name lists ---------------------------------------------------------

    def name(self) -> Name:
        kind, value = self.next()
        if kind != "lower" or value in _RESERVED:
            raise ParseError(f"expected a name, found {value!r}")
        return Name(value)

    def name_list(self, *, stop: str) -> tuple[Name, ...]:
        names: list[Name] = []
        while not self.at(stop):
            if self.at(","):
                self.next()
                continue
            names.append(self.name())
        self.next()  # consume the closing token
        return tuple(names)

    # -- grammar ------------------------------------------------------------

    def process(self) -> Agent:
        parts = [self.seq()]
        while self.at("|"):
            self.next()
            parts.append(self.seq())
        return par(parts)

    def seq(self) -> Agent:
        if self._at_prefix():
            return self.sum()
        return self.atom()

    def sum(self) -> Agent:
        branches = [self.branch()]
        while self.at("+"):
            self.next()
            branches.append(self.branch())
        return Sum(tuple(branches))

    def branch(self) -> Branch:
        pfx = self.prefix()
        self.expect(".")
        if self._at_prefix():
            inner = self.branch()
            cont: Agent = Sum((inner,))
        else:
            cont = self.atom()
        return Branch(pfx, cont)

    def _at_prefix(self) -> bool:
        tok = self.peek()
        if tok is None:
            return False
        if tok[1] in ("'", "{"):
            return True
        if tok[0] == "lower" and tok[1] not in _RESERVED:
            nxt = self.peek(1)
            return nxt is not None and nxt[1] == "<"
        return False

    def prefix(self) -> Prefix:
        tok = self.peek()
        assert tok is not None
        if tok[1] == "'":
            self.next()
            ch = self.name()
            self.expect("<")
            return OutputPrefix(ch, self.name_list(stop=">"))
        if tok[1] == "{":
            self.next()
            pairs: list[tuple[Name, Name]] = []
            while not self.at("}"):
                if self.at(","):
                    self.next()
                    continue
                left = self.name()
                self.expect("=")
                pairs.append((left, self.name()))
            self.next()
            return FusionPrefix(tuple(pairs))
        ch = self.name()
        self.expect("<")
        return InputPrefix(ch, self.name_list(stop=">"))

    def atom(self) -> Agent:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        kind, value = tok
        if kind == "zero":
            self.next()
            return Inaction()
        if kind == "lower" and value == "rec":
            self.next()
            var_tok = self.next()
            if var_tok[0] != "upper":
                raise ParseError(f"expected an agent variable after rec, found {var_tok[1]!r}")
            self.expect(".")
            return Rec(var_tok[1], self.seq())
        if kind == "upper":
            self.next()
            if self.at("("):
                self.next()
                return Constant(value, self.name_list(stop=")"))
            return AgentVar(value)
        if value == "(":
            if self._at_scope():
                self.next()
                names = self.name_list(stop=")")
                if not names:
                    raise ParseError("empty scope")
                return Scope(names, self.seq())
            self.next()
            inner = self.process()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected token {value!r}")

    def _at_scope(self) -> bool:
        # '(' names ')' followed by something that can start a process.
        i = self.pos + 1
        saw_name = False
        while i < len(self.tokens):
            kind, value = self.tokens[i]
            if value == ")":
                break
            if value == ",":
                i += 1
                continue
            if kind != "lower" or value in _RESERVED:
                return False
            saw_name = True
            i += 1
        else:
            return False
        nxt = self.tokens[i + 1] if i + 1 < len(self.tokens) else None
        if nxt is None:
            return False
        return saw_name and nxt[1] not in (")", "|", "+", ".", ",", ">", "=")


def parse_process(text: str) -> Agent:
    """Parse the process grammar; raises ParseError on bad input."""
    parser = _Parser(text)
    out = parser.process()
    if parser.peek() is not None:
        raise ParseError(f"trailing input at {parser.peek()[1]!r}")
    return out


# ---------------------------------------------------------------------------
# Printing


def _print_cont(agent: Agent) -> str:
    if isinstance(agent, (Inaction, Constant, AgentVar)):
        return pretty(agent)
    if isinstance(agent, Sum) and len(agent.branches) == 1:
        return pretty(agent)
    return f"({pretty(agent)})"


def pretty(agent: Agent) -> str:
    """Canonical text; `parse_process(pretty(a)) == a` for printable agents.

    Agents containing generated names are not directly printable; rename
    them first (see `fusion.normal.displayable`).
    """
    if isinstance(agent, Inaction):
        return "0"
    if isinstance(agent, Constant):
        return f"{agent.label}({','.join(str(a) for a in agent.args)})"
    if isinstance(agent, AgentVar):
        return agent.var
    if isinstance(agent, Sum):
        return " + ".join(f"{br.prefix}.{_print_cont(br.cont)}" for br in agent.branches)
    if isinstance(agent, Par):
        return " | ".join(
            f"({pretty(p)})" if isinstance(p, Par) else pretty(p) for p in agent.parts
        )
    if isinstance(agent, Scope):
        body = pretty(agent.body)
        if isinstance(agent.body, Par):
            body = f"({body})"
        return f"({' '.join(str(n) for n in agent.names)}) {body}"
    if isinstance(agent, Rec):
        body = pretty(agent.body)
        if isinstance(agent.body, Par):
            body = f"({body})"
        return f"rec {agent.var}. {body}"
    raise TypeError(f"not an agent: {agent!r}")


def iter_sequentials(agent: Agent) -> Iterator[Agent]:
    """Yield the sequential agents (sums and constants) at unguarded
    positions, left to right. Scopes and recursion are not entered."""
    if isinstance(agent, (Sum, Constant)):
        yield agent
    elif isinstance(agent, Par):
        for p in agent.parts:
            yield from iter_sequentials(p)
