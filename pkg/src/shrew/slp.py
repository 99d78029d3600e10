"""Logic programming with transactions.

Goals double as graphs: a function-free goal is a multiset of atoms
over variables, and clause heads carry structured terms only to encode
synchronization constraints. A big-step rewrites several atoms of a
goal at once, each at most once, and commits only if the combined
unifier leaves no function symbol in the result; the intermediate
states where half a handshake is visible are never observable.

The closed form (`selection_bigstep`) builds a big-step directly from
the choice of which clause rewrites which atom: the unifier is assembled
from variable-variable equations only, and the transaction commits
exactly when positions sharing a goal variable agree on their head
function symbol. Every closed-form result is replayed as a plain SLD
run to keep the two semantics honest against each other.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .terms import (
    App,
    Equation,
    Name,
    NameGen,
    Subst,
    Term,
    Var,
    fresh_renaming,
    mgu,
    term_names,
)


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(term_str(a) for a in self.args)})"


Goal = tuple[Atom, ...]


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: Goal = ()

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {goal_str(self.body)}."


def term_str(t: Term) -> str:
    if isinstance(t, Var):
        return str(t.name)
    assert isinstance(t, App)
    return f"{t.fun}({', '.join(term_str(a) for a in t.args)})"


def goal_str(g: Goal) -> str:
    if not g:
        return "true"
    return ", ".join(str(a) for a in g)


def atom_names(a: Atom) -> set[Name]:
    out: set[Name] = set()
    for t in a.args:
        out |= term_names(t)
    return out


def goal_names(g: Iterable[Atom]) -> set[Name]:
    out: set[Name] = set()
    for a in g:
        out |= atom_names(a)
    return out


def clause_names(c: Clause) -> set[Name]:
    return atom_names(c.head) | goal_names(c.body)


def apply_atom(theta: Subst, a: Atom) -> Atom:
    return Atom(a.pred, tuple(theta.apply(t) for t in a.args))


def apply_goal(theta: Subst, g: Goal) -> Goal:
    return tuple(apply_atom(theta, a) for a in g)


def is_goal_graph(g: Iterable[Atom]) -> bool:
    """No function symbols anywhere, constants included.

    >>> x = Var(Name("x"))
    >>> is_goal_graph((Atom("p", (x, x)),))
    True
    >>> is_goal_graph((Atom("p", (App("f", (x,)),)),))
    False
    """
    return all(isinstance(t, Var) for a in g for t in a.args)


def validate_clause(c: Clause) -> list[str]:
    """Violations of the synchronized-clause conditions, empty when fine.

    >>> x, y = Var(Name("x")), Var(Name("y"))
    >>> validate_clause(Clause(Atom("q", (App("f", (x,)), y)), (Atom("p", (x, y)),)))
    []
    >>> validate_clause(Clause(Atom("q", (App("g", (App("f", (x,)),)), y)), (Atom("p", (x, y)),)))
    ['head argument 1 nests function symbols']
    >>> validate_clause(Clause(Atom("q", (App("f", (x,)), y)), (Atom("p", (x,)),)))
    ['head variable y does not appear in the body']
    """
    out = []
    body_vars = goal_names(c.body)
    if not is_goal_graph(c.body):
        out.append("body is not a goal-graph")
    for i, t in enumerate(c.head.args, start=1):
        if isinstance(t, Var):
            if t.name not in body_vars:
                out.append(f"head variable {t.name} does not appear in the body")
        else:
            assert isinstance(t, App)
            if not t.args:
                out.append(f"head argument {i} is a constant")
            elif not all(isinstance(s, Var) for s in t.args):
                out.append(f"head argument {i} nests function symbols")
    return out


# ---------------------------------------------------------------------------
# Small steps


def sld_step(
    goal: Goal, atom_index: int, clause: Clause, gen: NameGen | None = None
) -> tuple[Subst, Goal] | None:
    """Resolve one atom against a fresh variant of `clause`.

    Returns (theta, next goal) with the atom replaced in place by the
    variant's instantiated body and theta applied to the rest, or None
    when the atom and head do not unify.
    """
    a = goal[atom_index]
    if gen is None:
        gen = NameGen(avoid=goal_names(goal) | clause_names(clause))
    rho = fresh_renaming(clause_names(clause), gen)
    head = apply_atom(rho, clause.head)
    body = apply_goal(rho, clause.body)
    if head.pred != a.pred or len(head.args) != len(a.args):
        return None
    eqs: list[Equation] = list(zip(a.args, head.args))
    theta = mgu(eqs, preferred=sorted(goal_names(goal), key=lambda n: n.sort_key))
    if theta is None:
        return None
    next_goal = (
        apply_goal(theta, goal[:atom_index])
        + apply_goal(theta, body)
        + apply_goal(theta, goal[atom_index + 1 :])
    )
    return theta, next_goal


# ---------------------------------------------------------------------------
# Big steps


@dataclass(frozen=True)
class SmallStep:
    atom_index: int
    clause: Clause
    theta: Subst


@dataclass(frozen=True)
class BigStep:
    start: Goal
    end: Goal
    theta: Subst
    trace: tuple[SmallStep, ...] = field(compare=False)
    rewritten: frozenset[int] = frozenset()

    def __str__(self) -> str:
        return f"{goal_str(self.start)} ={self.theta}=> {goal_str(self.end)}"


Selection = Mapping[int, Clause]


def selection_bigstep(start: Goal, selection: Selection) -> BigStep | None:
    """The big-step rewriting atom i of `start` with selection[i], all
    other atoms untouched, or None when the transaction cannot commit.

    The commit test and the result are computed in closed form; the
    small-step replay that justifies them lives in `replay_bigstep`.
    """
    if not is_goal_graph(start):
        raise ValueError("big-steps start from function-free goals")
    for i in selection:
        if not 0 <= i < len(start):
            raise IndexError(f"selected atom {i} out of range")

    gen = NameGen(avoid=goal_names(start) | {n for c in selection.values() for n in clause_names(c)})
    heads: dict[int, Atom] = {}
    bodies: dict[int, Goal] = {}
    for i in sorted(selection):
        c = selection[i]
        rho = fresh_renaming(clause_names(c), gen)
        heads[i] = apply_atom(rho, c.head)
        bodies[i] = apply_goal(rho, c.body)
        if heads[i].pred != start[i].pred or len(heads[i].args) != len(start[i].args):
            return None

    # Positions of each goal variable, with the head symbol it must carry.
    by_var: dict[Name, list[tuple[int, int]]] = {}
    for i, atom in enumerate(start):
        for j, t in enumerate(atom.args):
            assert isinstance(t, Var)
            by_var.setdefault(t.name, []).append((i, j))

    def symbol(i: int, j: int) -> tuple[str, int] | None:
        h = heads.get(i)
        if h is None:
            return None
        t = h.args[j]
        if isinstance(t, Var):
            return None
        assert isinstance(t, App)
        return (t.fun, len(t.args))

    eqs: list[Equation] = []
    for x, positions in by_var.items():
        syms = {symbol(i, j) for i, j in positions}
        if len(syms) > 1:
            return None  # Hoare condition: same symbol at every occurrence
        replaced = [(i, j) for i, j in positions if i in heads]
        for (i, j), (p, q) in zip(replaced, replaced[1:]):
            ti, tp = heads[i].args[j], heads[p].args[q]
            if isinstance(ti, Var):
                assert isinstance(tp, Var)
                eqs.append((ti, tp))
            else:
                assert isinstance(ti, App) and isinstance(tp, App)
                eqs.append((ti.args[0], tp.args[0]))
                eqs.extend(zip(ti.args[1:], tp.args[1:]))
        for i, j in replaced:
            t = heads[i].args[j]
            if isinstance(t, Var):
                eqs.append((Var(x), t))

    theta_r = mgu(eqs, preferred=sorted(by_var, key=lambda n: n.sort_key))
    assert theta_r is not None  # variable-variable equations always unify

    bindings: dict[Name, Term] = {x: t for x, t in theta_r.items()}
    for x, positions in by_var.items():
        for i, j in positions:
            if symbol(i, j) is not None:
                bindings[x] = theta_r.apply(heads[i].args[j])
                break
    theta_full = Subst(bindings)

    end: list[Atom] = []
    for i, atom in enumerate(start):
        if i in heads:
            end.extend(apply_goal(theta_r, bodies[i]))
        else:
            end.append(apply_atom(theta_r, atom))
    if not is_goal_graph(end):
        return None

    replay = replay_bigstep(start, selection)
    if replay is None:
        raise RuntimeError("closed-form big-step exists but replay failed")
    observable = theta_full.restrict(goal_names(start))
    closed = BigStep(
        start=start,
        end=tuple(end),
        theta=observable,
        trace=replay[1],
        rewritten=frozenset(selection),
    )
    if not bigsteps_agree(closed, BigStep(start, replay[0], replay[2], replay[1], frozenset(selection))):
        raise RuntimeError("closed-form big-step disagrees with its replay")
    return closed


def replay_bigstep(
    start: Goal, selection: Selection
) -> tuple[Goal, tuple[SmallStep, ...], Subst] | None:
    """Run the selection as plain SLD steps in ascending atom order.

    Atom positions shift as bodies are spliced in; the bookkeeping here
    tracks where each original atom currently lives.
    """
    gen = NameGen(avoid=goal_names(start) | {n for c in selection.values() for n in clause_names(c)})
    goal = start
    offsets = list(range(len(start)))  # current position of each original atom
    acc = Subst({})
    trace: list[SmallStep] = []
    for i in sorted(selection):
        step = sld_step(goal, offsets[i], selection[i], gen)
        if step is None:
            return None
        theta, goal = step
        grow = len(selection[i].body) - 1
        for p in range(len(offsets)):
            if offsets[p] > offsets[i]:
                offsets[p] += grow
        trace.append(SmallStep(i, selection[i], theta))
        acc = acc.compose(theta)
    if not is_goal_graph(goal):
        return None
    return goal, tuple(trace), acc.restrict(goal_names(start))


def bigsteps_agree(a: BigStep, b: BigStep) -> bool:
    """Equality up to one injective renaming applied across start,
    observable substitution and end at once."""
    if a.rewritten != b.rewritten or len(a.start) != len(b.start):
        return False
    return match_atoms(_as_atoms(a), _as_atoms(b)) is not None


def _as_atoms(b: BigStep) -> list[Atom]:
    out = list(b.start)
    for x, t in b.theta.items():
        out.append(Atom("$bind", (Var(x), t)))
    out.extend(b.end)
    return out


def match_atoms(
    a: Sequence[Atom],
    b: Sequence[Atom],
    fixed: Iterable[Name] = (),
    onto_fixed: bool = False,
) -> dict[Name, Name] | None:
    """An injective variable bijection sending the multiset `a` onto
    `b`, identity on `fixed`.

    With `onto_fixed`, non-fixed variables may land on fixed ones: the
    map is only required to be injective among the non-fixed variables,
    which is composition with a renaming of the fresh names rather than
    a bijection over everything.
    """
    fixed = set(fixed)
    if len(a) != len(b):
        return None

    remaining = list(range(len(b)))

    def match_terms(
        m: dict[Name, Name], s: Term, t: Term
    ) -> dict[Name, Name] | None:
        if isinstance(s, Var):
            if not isinstance(t, Var):
                return None
            img = m.get(s.name)
            if img is not None:
                return m if img == t.name else None
            if s.name in fixed and s.name != t.name:
                return None
            if onto_fixed:
                taken = {v for k, v in m.items() if k not in fixed}
                if t.name in taken:
                    return None
            elif t.name in m.values():
                return None
            out = dict(m)
            out[s.name] = t.name
            return out
        if not isinstance(t, App) or not isinstance(s, App):
            return None
        if s.fun != t.fun or len(s.args) != len(t.args):
            return None
        for sa, ta in zip(s.args, t.args):
            m2 = match_terms(m, sa, ta)
            if m2 is None:
                return None
            m = m2
        return m

    def search(pos: int, m: dict[Name, Name]) -> dict[Name, Name] | None:
        if pos == len(a):
            return m
        atom = a[pos]
        for k in list(remaining):
            cand = b[k]
            if cand.pred != atom.pred or len(cand.args) != len(atom.args):
                continue
            m2: dict[Name, Name] | None = m
            for sa, ta in zip(atom.args, cand.args):
                m2 = match_terms(m2, sa, ta)
                if m2 is None:
                    break
            if m2 is None:
                continue
            remaining.remove(k)
            found = search(pos + 1, m2)
            remaining.append(k)
            if found is not None:
                return found
        return None

    return search(0, {x: x for x in fixed if any(x in atom_names(at) for at in a)})


def _head_symbols(c: Clause | None, atom: Atom) -> tuple[tuple[str, int] | None, ...]:
    if c is None:
        return (None,) * len(atom.args)
    return tuple(
        (t.fun, len(t.args)) if isinstance(t, App) else None for t in c.head.args
    )


def big_steps(
    start: Goal,
    program: Sequence[Clause],
    selection: Selection | None = None,
    nonempty: bool = False,
) -> tuple[BigStep, ...]:
    """All committed big-steps from `start`, or just the one for a given
    selection. The empty big-step (no atom rewritten) is included unless
    `nonempty` filters it out.

    The enumeration walks atoms left to right, committing each goal
    variable to the head symbol it would have to carry and pruning any
    branch where two occurrences disagree — the same check the closed
    form applies, run early.
    """
    if selection is not None:
        b = selection_bigstep(start, selection)
        out = () if b is None else (b,)
        return tuple(x for x in out if x.trace or not nonempty)

    rows: list[list[Clause | None]] = []
    for atom in start:
        row: list[Clause | None] = [None]
        row.extend(
            c for c in program if c.head.pred == atom.pred and len(c.head.args) == len(atom.args)
        )
        rows.append(row)

    found: list[BigStep] = []
    committed: dict[Name, tuple[str, int] | None] = {}
    chosen: dict[int, Clause] = {}

    def walk(i: int) -> None:
        if i == len(start):
            if nonempty and not chosen:
                return
            b = selection_bigstep(start, dict(chosen))
            if b is not None and not any(bigsteps_agree(b, prev) for prev in found):
                found.append(b)
            return
        atom = start[i]
        for cand in rows[i]:
            syms = _head_symbols(cand, atom)
            staged: list[Name] = []
            ok = True
            for t, sym in zip(atom.args, syms):
                assert isinstance(t, Var)
                x = t.name
                if x in committed:
                    if committed[x] != sym:
                        ok = False
                        break
                else:
                    committed[x] = sym
                    staged.append(x)
            if ok:
                if cand is not None:
                    chosen[i] = cand
                walk(i + 1)
                chosen.pop(i, None)
            for x in staged:
                del committed[x]
        return

    walk(0)
    return tuple(found)


# ---------------------------------------------------------------------------
# Text form

_TOKEN = re.compile(
    r"""[ \t]+
      | \#[^\n]*
      | (?P<word>[A-Za-z_][A-Za-z0-9_~']*(\{(?:[^{}]|\{[^{}]*\})*\})?)
      | (?P<punct>\?-|:-|[(),.])
    """,
    re.VERBOSE,
)


class SlpParseError(ValueError):
    pass


def _tokenize(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        pos = 0
        while pos < len(line):
            m = _TOKEN.match(line, pos)
            if m is None:
                raise SlpParseError(f"bad character {line[pos]!r}")
            pos = m.end()
            tok = m.group("word") or m.group("punct")
            if tok:
                out.append(tok)
    return out


class _Cursor:
    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise SlpParseError("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.next()
        if got != tok:
            raise SlpParseError(f"expected {tok!r}, got {got!r}")


def _parse_name(tok: str) -> Name:
    if "~" in tok:
        base, _, idx = tok.rpartition("~")
        if idx.isdigit():
            return Name(base, int(idx))
    return Name(tok)


def _parse_term(cur: _Cursor, goal_position: bool) -> Term:
    tok = cur.next()
    if not re.match(r"[A-Za-z_]", tok):
        raise SlpParseError(f"expected a term, got {tok!r}")
    if cur.peek() == "(":
        cur.next()
        args: list[Term] = []
        if cur.peek() != ")":
            while True:
                args.append(_parse_term(cur, goal_position))
                if cur.peek() != ",":
                    break
                cur.next()
        cur.expect(")")
        if goal_position and not args:
            raise SlpParseError(f"constant {tok}() not allowed in a goal position")
        return App(tok, tuple(args))
    return Var(_parse_name(tok))


def _parse_atom(cur: _Cursor, goal_position: bool) -> Atom:
    pred = cur.next()
    if not re.match(r"[A-Za-z_]", pred):
        raise SlpParseError(f"expected a predicate, got {pred!r}")
    args: list[Term] = []
    if cur.peek() == "(":
        cur.next()
        if cur.peek() != ")":
            while True:
                args.append(_parse_term(cur, goal_position))
                if cur.peek() != ",":
                    break
                cur.next()
        cur.expect(")")
    return Atom(pred, tuple(args))


def _parse_atoms(cur: _Cursor, goal_position: bool) -> Goal:
    if cur.peek() == "true":
        cur.next()
        return ()
    atoms = [_parse_atom(cur, goal_position)]
    while cur.peek() == ",":
        cur.next()
        atoms.append(_parse_atom(cur, goal_position))
    return tuple(atoms)


@dataclass(frozen=True)
class SlpFile:
    clauses: tuple[Clause, ...]
    goals: tuple[Goal, ...]


def parse_program(text: str) -> SlpFile:
    """Parse clauses `h :- b1, b2.` (facts `h.`) and goals `?- g.`.

    >>> f = parse_program("q(f(X), Y) :- p(X, Y).\\n?- p(X, Y).")
    >>> str(f.clauses[0])
    'q(f(X), Y) :- p(X, Y).'
    >>> goal_str(f.goals[0])
    'p(X, Y)'
    """
    cur = _Cursor(_tokenize(text))
    clauses: list[Clause] = []
    goals: list[Goal] = []
    while cur.peek() is not None:
        if cur.peek() == "?-":
            cur.next()
            g = _parse_atoms(cur, goal_position=True)
            cur.expect(".")
            if not is_goal_graph(g):
                raise SlpParseError("goals must be function-free")
            goals.append(g)
            continue
        head = _parse_atom(cur, goal_position=False)
        body: Goal = ()
        if cur.peek() == ":-":
            cur.next()
            body = _parse_atoms(cur, goal_position=True)
        cur.expect(".")
        clauses.append(Clause(head, body))
    return SlpFile(tuple(clauses), tuple(goals))


def print_program(f: SlpFile) -> str:
    lines = [str(c) for c in f.clauses]
    lines.extend(f"?- {goal_str(g)}." for g in f.goals)
    return "\n".join(lines) + ("\n" if lines else "")


def goal_of_vars(pred_args: Iterable[tuple[str, Sequence[Name]]]) -> Goal:
    """Build a goal-graph from (predicate, variable names) pairs."""
    return tuple(Atom(p, tuple(Var(x) for x in xs)) for p, xs in pred_args)
