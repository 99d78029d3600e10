"""Hypergraphs as logic programs.

Nodes become variables, edge labels become predicates, and a graph
becomes the conjunction of its edges — the context of a judgement is
dropped, since a goal determines its variables. A production becomes a
clause whose head records, position by position, the action each
attachment node takes part in: a functor application `a(x, y1..yn)`
for a real action, a bare variable for silence. Unification then plays
the role of Hoare synchronization, and a transition corresponds to a
transactional big-step of the translated program.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .hshr.graph import Edge, Graph, graph
from .hshr.production import Production, Transition, action_map
from .slp import (
    Atom,
    BigStep,
    Clause,
    Goal,
    apply_goal,
    big_steps,
    goal_names,
    match_atoms,
)
from .terms import App, Name, Subst, Term, Var


def translate_judgement(g: Graph) -> Goal:
    """Edges to atoms, in order; `nil` to the empty goal.

    >>> from .hshr.graph import parse_graph
    >>> from .slp import goal_str
    >>> goal_str(translate_judgement(parse_graph("nodes x, y; C(x,y) | C(y,x)")))
    'C(x, y), C(y, x)'
    >>> translate_judgement(parse_graph("nodes ; nil"))
    ()
    """
    return tuple(Atom(e.label, tuple(Var(x) for x in e.nodes)) for e in g.edges)


def judgement_of_goal(goal: Goal) -> Graph:
    """The inverse, up to forgotten isolated context nodes."""
    edges = []
    for a in goal:
        nodes = []
        for t in a.args:
            if not isinstance(t, Var):
                raise ValueError(f"not a goal-graph atom: {a}")
            nodes.append(t.name)
        edges.append(Edge(a.pred, tuple(nodes)))
    return graph(edges)


FOO = "foo"


def translate_production(p: Production, foo_convention: bool = False) -> Clause:
    """The clause for a production: head argument i carries the action
    at the i-th attachment node (bare `xπ` for silence), body is the
    right-hand-side graph.

    With `foo_convention`, silent head variables that the body forgets
    are wrapped in a `foo` action so the clause satisfies the
    synchronized conditions; the literal translation leaves them bare.
    """
    acts = action_map(p.actions)
    args: list[Term] = []
    for x in p.lhs.nodes:
        image = Var(p.fusion.apply_name(x))
        entry = acts.get(x)
        if entry is None:
            args.append(image)
        else:
            a, payload = entry
            args.append(App(a, (image, *(Var(y) for y in payload))))
    body = translate_judgement(p.target)
    if foo_convention:
        body_vars = goal_names(body)
        args = [
            App(FOO, (t,)) if isinstance(t, Var) and t.name not in body_vars else t
            for t in args
        ]
    return Clause(Atom(p.lhs.label, tuple(args)), body)


def translate_productions(
    prods: Iterable[Production], foo_convention: bool = False
) -> tuple[Clause, ...]:
    out = []
    seen = set()
    for p in prods:
        c = translate_production(p, foo_convention)
        if c not in seen:
            seen.add(c)
            out.append(c)
    return tuple(out)


# ---------------------------------------------------------------------------
# Observable substitutions


@dataclass(frozen=True)
class AssociatedSubstitution:
    theta: Subst
    rho: Subst


def canonical_rho(t: Transition) -> Subst:
    """Primed copies for every name the theorem requires fresh: nodes
    that act, and names outside the source graph. Silent source nodes
    keep their identity."""
    acting = set(action_map(t.actions))
    names = t.names()
    need_fresh = sorted(
        (x for x in names if x in acting or x not in t.source.nodes),
        key=lambda n: n.sort_key,
    )
    taken = set(names)
    images: dict[Name, Name] = {}
    for x in need_fresh:
        candidate = Name(x.base + "'", x.index)
        while candidate in taken:
            candidate = Name(candidate.base + "'", candidate.index)
        taken.add(candidate)
        images[x] = candidate
    return Subst.of_names(images)


def associated_substitution(
    t: Transition, rho: Subst | None = None
) -> AssociatedSubstitution:
    """The substitution a big-step must exhibit to mirror `t`: action
    nodes map to their functor application, silent merged nodes to their
    representative, all through the injective renaming `rho`."""
    if rho is None:
        rho = canonical_rho(t)
    if not rho.is_renaming():
        raise ValueError("rho must be an injective renaming")
    acts = action_map(t.actions)
    bindings: dict[Name, Term] = {}
    for x in sorted(t.source.nodes, key=lambda n: n.sort_key):
        image = rho.apply_name(t.fusion.apply_name(x))
        entry = acts.get(x)
        if entry is None:
            bindings[x] = Var(image)
        else:
            a, payload = entry
            bindings[x] = App(a, (Var(image), *(Var(rho.apply_name(y)) for y in payload)))
    return AssociatedSubstitution(theta=Subst(bindings), rho=rho)


def expected_end(t: Transition, rho: Subst) -> Goal:
    return apply_goal(rho, translate_judgement(t.target))


# ---------------------------------------------------------------------------
# Theorem instances


@dataclass(frozen=True)
class CorrespondenceReport:
    ok: bool
    detail: str
    bigsteps: int = 0
    transitions: int = 0

    def __bool__(self) -> bool:
        return self.ok


def mirrors(b: BigStep, t: Transition) -> bool:
    """Whether the big-step exhibits the associated substitution of `t`
    and ends in the renamed target goal, up to injective renaming."""
    assoc = associated_substitution(t)
    # bind every goal name on both sides, identities included: which
    # member of a merged class survives as the representative differs
    # between the two routes, and a one-sided identity must still pair
    # up with its image under the renaming
    domain = sorted(goal_names(b.start), key=lambda n: n.sort_key)
    want = [Atom("$bind", (Var(x), assoc.theta.apply(Var(x)))) for x in domain]
    want += list(expected_end(t, assoc.rho))
    have = [Atom("$bind", (Var(x), b.theta.apply(Var(x)))) for x in domain]
    have += list(b.end)
    # onto_fixed: the derivation may keep a goal name as the surviving
    # representative of a merged class where the transition picked a
    # fresh one, so a fresh name is allowed to land on a goal name
    return match_atoms(want, have, fixed=goal_names(b.start), onto_fixed=True) is not None


def check_correspondence(
    t: Transition,
    prods: Sequence[Production],
    foo_convention: bool = False,
) -> CorrespondenceReport:
    """Run both halves of the translation theorem on one instance.

    Forward: the big-step picked out by the transition's own used
    productions must exist and mirror it. Backward: every big-step of
    the translated program lifts to a derivable transition with the
    matching associated substitution.
    """
    from .hshr.derive import Blocked, derive_transition

    program = translate_productions(prods, foo_convention)
    clause_of = {p: translate_production(p, foo_convention) for p in prods}
    goal = translate_judgement(t.source)

    if t.used is None:
        return CorrespondenceReport(False, "transition carries no production provenance")
    selection = {
        i: clause_of[p] for i, p in enumerate(t.used) if p is not None
    }
    forward = big_steps(goal, program, selection=selection)
    if not forward:
        return CorrespondenceReport(False, "no big-step for the transition's own selection")
    if not mirrors(forward[0], t):
        return CorrespondenceReport(False, "big-step does not mirror the transition")

    all_steps = big_steps(goal, program)
    lifted = 0
    for b in all_steps:
        candidates: list[dict[int, Production]] = [{}]
        for i in sorted(b.rewritten):
            options = [p for p in prods if clause_of[p] == _selected_clause(b, i)]
            candidates = [{**m, i: p} for m in candidates for p in options]
        ok = False
        for choice_map in candidates:
            derived = derive_transition(t.source, choice_map)
            if isinstance(derived, Blocked):
                continue
            if mirrors(b, derived):
                ok = True
                lifted += 1
                break
        if not ok:
            return CorrespondenceReport(
                False,
                f"big-step rewriting atoms {sorted(b.rewritten)} does not lift to a transition",
                bigsteps=len(all_steps),
            )
    return CorrespondenceReport(
        True,
        "both directions hold",
        bigsteps=len(all_steps),
        transitions=lifted,
    )


def _selected_clause(b: BigStep, i: int) -> Clause:
    for step in b.trace:
        if step.atom_index == i:
            return step.clause
    raise KeyError(i)
