"""Normal forms, linear decomposition, standard forms and congruence.

A normal form is `(z1 .. zk)(S1 | ... | Sn)` where every Si is a sum or a
process constant: top-level scopes are pulled out (renaming on clashes),
vacuous binders are dropped, and top-level recursion is unfolded until
guarded. Restricted names are ordered by first free occurrence, reading
the body left to right.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

from ..terms import Name, NameGen, Subst
from .syntax import (
    Agent,
    AgentVar,
    Branch,
    Constant,
    FusionPrefix,
    Inaction,
    InputPrefix,
    OutputPrefix,
    Par,
    Prefix,
    Rec,
    Scope,
    Sum,
    all_names,
    check_guarded,
    free_agent_vars,
    free_names,
    par,
    prefix_names,
    pretty,
)

# ---------------------------------------------------------------------------
# Renaming and unfolding


def _map_prefix(p: Prefix, fn: Callable[[Name], Name]) -> Prefix:
    if isinstance(p, InputPrefix):
        return InputPrefix(fn(p.channel), tuple(fn(a) for a in p.args))
    if isinstance(p, OutputPrefix):
        return OutputPrefix(fn(p.channel), tuple(fn(a) for a in p.args))
    return FusionPrefix(tuple((fn(a), fn(b)) for a, b in p.pairs))


def rename_agent(agent: Agent, mapping: dict[Name, Name], gen: NameGen | None = None) -> Agent:
    """Apply a name-for-name substitution to free occurrences.

    Capture-avoiding: binders that collide with an image of the active
    mapping are freshened first.
    """
    mapping = {k: v for k, v in mapping.items() if k != v}
    if not mapping:
        return agent
    if gen is None:
        gen = NameGen(avoid=all_names(agent) | set(mapping) | set(mapping.values()))

    def walk(a: Agent, m: dict[Name, Name]) -> Agent:
        if not m:
            return a
        if isinstance(a, (Inaction, AgentVar)):
            return a
        if isinstance(a, Constant):
            return Constant(a.label, tuple(m.get(n, n) for n in a.args))
        if isinstance(a, Sum):
            return Sum(
                tuple(
                    Branch(_map_prefix(br.prefix, lambda n: m.get(n, n)), walk(br.cont, m))
                    for br in a.branches
                )
            )
        if isinstance(a, Par):
            return Par(tuple(walk(p, m) for p in a.parts))
        if isinstance(a, Scope):
            sub = {k: v for k, v in m.items() if k not in a.names}
            images = set(sub.values())
            names = list(a.names)
            body = a.body
            for i, n in enumerate(names):
                if n in images:
                    f = gen.fresh_like(n)
                    body = walk(body, {n: f})
                    names[i] = f
            return Scope(tuple(names), walk(body, sub))
        if isinstance(a, Rec):
            return Rec(a.var, walk(a.body, m))
        raise TypeError(f"not an agent: {a!r}")

    return walk(agent, mapping)


def rename_all(agent: Agent, mapping: dict[Name, Name]) -> Agent:
    """Rename every occurrence, binders included. Only safe when the
    images are fresh for the agent."""

    def fn(n: Name) -> Name:
        return mapping.get(n, n)

    def walk(a: Agent) -> Agent:
        if isinstance(a, (Inaction, AgentVar)):
            return a
        if isinstance(a, Constant):
            return Constant(a.label, tuple(fn(n) for n in a.args))
        if isinstance(a, Sum):
            return Sum(tuple(Branch(_map_prefix(br.prefix, fn), walk(br.cont)) for br in a.branches))
        if isinstance(a, Par):
            return Par(tuple(walk(p) for p in a.parts))
        if isinstance(a, Scope):
            return Scope(tuple(fn(n) for n in a.names), walk(a.body))
        if isinstance(a, Rec):
            return Rec(a.var, walk(a.body))
        raise TypeError(f"not an agent: {a!r}")

    return walk(agent)


def subst_agent_var(agent: Agent, var: str, replacement: Agent, gen: NameGen) -> Agent:
    """Replace free occurrences of a recursion variable, avoiding capture
    of the replacement's free names and recursion variables."""
    repl_names = free_names(replacement)
    repl_vars = free_agent_vars(replacement)
    used_vars = {var} | repl_vars | _agent_vars(agent)

    def fresh_var(base: str) -> str:
        k = 1
        while f"{base}{k}" in used_vars:
            k += 1
        used_vars.add(f"{base}{k}")
        return f"{base}{k}"

    def walk(a: Agent) -> Agent:
        if isinstance(a, AgentVar):
            return replacement if a.var == var else a
        if isinstance(a, (Inaction, Constant)):
            return a
        if isinstance(a, Sum):
            return Sum(tuple(Branch(br.prefix, walk(br.cont)) for br in a.branches))
        if isinstance(a, Par):
            return Par(tuple(walk(p) for p in a.parts))
        if isinstance(a, Scope):
            if var not in free_agent_vars(a.body):
                return a
            clash = [n for n in a.names if n in repl_names]
            names, body = a.names, a.body
            if clash:
                ren = {n: gen.fresh_like(n) for n in clash}
                names = tuple(ren.get(n, n) for n in names)
                body = rename_agent(body, ren, gen)
            return Scope(names, walk(body))
        if isinstance(a, Rec):
            if a.var == var:
                return a
            v, body = a.var, a.body
            if v in repl_vars and var in free_agent_vars(body):
                v2 = fresh_var(v)
                body = _subst_var_name(body, v, v2)
                v = v2
            return Rec(v, walk(body))
        raise TypeError(f"not an agent: {a!r}")

    return walk(agent)


def _agent_vars(agent: Agent) -> set[str]:
    out: set[str] = set()

    def walk(a: Agent) -> None:
        if isinstance(a, AgentVar):
            out.add(a.var)
        elif isinstance(a, Sum):
            for br in a.branches:
                walk(br.cont)
        elif isinstance(a, Par):
            for p in a.parts:
                walk(p)
        elif isinstance(a, Scope):
            walk(a.body)
        elif isinstance(a, Rec):
            out.add(a.var)
            walk(a.body)

    walk(agent)
    return out


def _subst_var_name(agent: Agent, old: str, new: str) -> Agent:
    """Rename a free recursion variable (to a fresh one)."""
    if isinstance(agent, AgentVar):
        return AgentVar(new) if agent.var == old else agent
    if isinstance(agent, (Inaction, Constant)):
        return agent
    if isinstance(agent, Sum):
        return Sum(
            tuple(Branch(br.prefix, _subst_var_name(br.cont, old, new)) for br in agent.branches)
        )
    if isinstance(agent, Par):
        return Par(tuple(_subst_var_name(p, old, new) for p in agent.parts))
    if isinstance(agent, Scope):
        return Scope(agent.names, _subst_var_name(agent.body, old, new))
    if isinstance(agent, Rec):
        if agent.var == old:
            return agent
        return Rec(agent.var, _subst_var_name(agent.body, old, new))
    raise TypeError(f"not an agent: {agent!r}")


def free_name_occurrences(agent: Agent) -> Iterator[Name]:
    """Free name occurrences in pre-order (prefix before continuation,
    with repeats)."""

    def walk(a: Agent, bound: frozenset[Name]) -> Iterator[Name]:
        if isinstance(a, Constant):
            for n in a.args:
                if n not in bound:
                    yield n
        elif isinstance(a, Sum):
            for br in a.branches:
                for n in prefix_names(br.prefix):
                    if n not in bound:
                        yield n
                yield from walk(br.cont, bound)
        elif isinstance(a, Par):
            for p in a.parts:
                yield from walk(p, bound)
        elif isinstance(a, Scope):
            yield from walk(a.body, bound | set(a.names))
        elif isinstance(a, Rec):
            yield from walk(a.body, bound)

    return walk(agent, frozenset())


def map_free_occurrences(agent: Agent, fn: Callable[[Name], Name]) -> Agent:
    """Rebuild an agent calling `fn` once per free name occurrence, in the
    same pre-order as `free_name_occurrences`."""

    def walk(a: Agent, bound: frozenset[Name]) -> Agent:
        if isinstance(a, (Inaction, AgentVar)):
            return a
        if isinstance(a, Constant):
            return Constant(a.label, tuple(n if n in bound else fn(n) for n in a.args))
        if isinstance(a, Sum):
            branches = []
            for br in a.branches:
                pfx = _map_prefix(br.prefix, lambda n: n if n in bound else fn(n))
                branches.append(Branch(pfx, walk(br.cont, bound)))
            return Sum(tuple(branches))
        if isinstance(a, Par):
            return Par(tuple(walk(p, bound) for p in a.parts))
        if isinstance(a, Scope):
            return Scope(a.names, walk(a.body, bound | set(a.names)))
        if isinstance(a, Rec):
            return Rec(a.var, walk(a.body, bound))
        raise TypeError(f"not an agent: {a!r}")

    return walk(agent, frozenset())


# ---------------------------------------------------------------------------
# Normal forms


@dataclass(frozen=True)
class NormalForm:
    restricted: tuple[Name, ...]
    parts: tuple[Agent, ...]  # sums and constants only

    def __str__(self) -> str:
        return pretty(as_agent(self))


def normalize(process: Agent, gen: NameGen | None = None) -> NormalForm:
    """Flatten to `(z...)(S1 | ... | Sn)`, unfolding top-level recursion.

    Raises ValueError on free recursion variables or unguarded recursion.

    >>> from .syntax import parse_process
    >>> nf = normalize(parse_process("(x)(u<x>.0 | (y)'u<y>.0)"))
    >>> [str(n) for n in nf.restricted], len(nf.parts)
    (['x', 'y'], 2)
    """
    open_vars = free_agent_vars(process)
    if open_vars:
        raise ValueError(f"free recursion variables: {sorted(open_vars)}")
    check_guarded(process)
    if gen is None:
        gen = NameGen(avoid=all_names(process))
    taken = set(free_names(process))
    binders: list[Name] = []
    parts: list[Agent] = []

    def walk(a: Agent, ren: dict[Name, Name]) -> None:
        if isinstance(a, Inaction):
            return
        if isinstance(a, Par):
            for p in a.parts:
                walk(p, ren)
        elif isinstance(a, Scope):
            sub = dict(ren)
            for n in a.names:
                chosen = gen.fresh_like(n) if n in taken else n
                taken.add(chosen)
                binders.append(chosen)
                sub[n] = chosen
            walk(a.body, sub)
        elif isinstance(a, Rec):
            walk(subst_agent_var(a.body, a.var, a, gen), ren)
        elif isinstance(a, (Sum, Constant)):
            parts.append(rename_agent(a, ren, gen))
        else:
            raise TypeError(f"not an agent: {a!r}")

    walk(process, {})

    binder_set = set(binders)
    order: list[Name] = []
    seen: set[Name] = set()
    for part in parts:
        for n in free_name_occurrences(part):
            if n in binder_set and n not in seen:
                seen.add(n)
                order.append(n)
    return NormalForm(tuple(order), tuple(parts))


def as_agent(nf: NormalForm) -> Agent:
    body = par(list(nf.parts))
    if nf.restricted:
        return Scope(nf.restricted, body)
    return body


# ---------------------------------------------------------------------------
# Linear decomposition


@dataclass(frozen=True)
class LinearDecomposition:
    """The body of a normal form with every free name occurrence replaced
    by a distinct indexed name, plus the map back.

    `groups` lists, for each original name in order of first occurrence,
    the occurrence names that map to it (in occurrence order). `sigma`
    is the same information as a substitution (occurrence -> original).
    """

    parts: tuple[Agent, ...]
    sigma: Subst
    fnarray: tuple[Name, ...]
    groups: tuple[tuple[Name, tuple[Name, ...]], ...]


def linearize(nf: NormalForm) -> LinearDecomposition:
    avoid = set()
    for part in nf.parts:
        avoid |= all_names(part)
    avoid |= set(nf.restricted)

    counters: dict[Name, int] = {}
    fnarray: list[Name] = []
    mapping: dict[Name, Name] = {}
    groups: dict[Name, list[Name]] = {}

    def next_occurrence(original: Name) -> Name:
        k = counters.get(original, 0)
        while True:
            k += 1
            cand = Name(f"{original.base}{k}" if original.index is None
                        else f"{original.base}~{original.index}_{k}")
            if cand not in avoid:
                break
        counters[original] = k
        avoid.add(cand)
        fnarray.append(cand)
        mapping[cand] = original
        groups.setdefault(original, []).append(cand)
        return cand

    new_parts = tuple(map_free_occurrences(p, next_occurrence) for p in nf.parts)
    return LinearDecomposition(
        parts=new_parts,
        sigma=Subst.of_names(mapping),
        fnarray=tuple(fnarray),
        groups=tuple((orig, tuple(occ)) for orig, occ in groups.items()),
    )


# ---------------------------------------------------------------------------
# Standard forms for sequential agents


@dataclass(frozen=True)
class StandardForm:
    """A sequential agent written over the interface `x1 .. xn`.

    `label` is the canonical text (used as an edge label), `args` the
    actual names, in occurrence order, that `x1 .. xn` stand for.
    """

    label: str
    canonical: Agent
    args: tuple[Name, ...]

    @property
    def arity(self) -> int:
        return len(self.args)


def standardize(seq: Agent) -> StandardForm:
    """Canonically rename a sum or constant: free occurrences become
    `x1, x2, ...` in pre-order, bound names `b1, b2, ...` in binder
    order, recursion variables `X1, X2, ...`."""
    if not isinstance(seq, (Sum, Constant)):
        raise TypeError("standard forms are defined for sequential agents")
    if free_agent_vars(seq):
        raise ValueError("sequential agent has free recursion variables")

    args: list[Name] = []
    bound_count = 0
    var_count = 0

    def next_free(n: Name) -> Name:
        args.append(n)
        return Name(f"x{len(args)}")

    def walk(a: Agent, bound: dict[Name, Name], avars: dict[str, str]) -> Agent:
        nonlocal bound_count, var_count

        def name(n: Name) -> Name:
            return bound[n] if n in bound else next_free(n)

        if isinstance(a, Inaction):
            return a
        if isinstance(a, AgentVar):
            return AgentVar(avars[a.var])
        if isinstance(a, Constant):
            return Constant(a.label, tuple(name(n) for n in a.args))
        if isinstance(a, Sum):
            branches = []
            for br in a.branches:
                pfx = _map_prefix(br.prefix, name)
                branches.append(Branch(pfx, walk(br.cont, bound, avars)))
            return Sum(tuple(branches))
        if isinstance(a, Par):
            return Par(tuple(walk(p, bound, avars) for p in a.parts))
        if isinstance(a, Scope):
            inner = dict(bound)
            fresh = []
            for n in a.names:
                bound_count += 1
                b = Name(f"b{bound_count}")
                inner[n] = b
                fresh.append(b)
            return Scope(tuple(fresh), walk(a.body, inner, avars))
        if isinstance(a, Rec):
            var_count += 1
            v = f"X{var_count}"
            return Rec(v, walk(a.body, bound, {**avars, a.var: v}))
        raise TypeError(f"not an agent: {a!r}")

    canonical = walk(seq, {}, {})
    return StandardForm(label="L{" + pretty(canonical) + "}", canonical=canonical, args=tuple(args))


# ---------------------------------------------------------------------------
# Congruence


def canon_agent(agent: Agent, gen: NameGen | None = None) -> Agent:
    """Structurally canonical form: parallel compositions flattened with
    inactions dropped, scopes hoisted out of compositions and merged,
    vacuous binders dropped. Recursion is left in place."""
    if gen is None:
        gen = NameGen(avoid=all_names(agent))

    def walk(a: Agent) -> Agent:
        if isinstance(a, (Inaction, Constant, AgentVar)):
            return a
        if isinstance(a, Sum):
            return Sum(tuple(Branch(br.prefix, walk(br.cont)) for br in a.branches))
        if isinstance(a, Rec):
            return Rec(a.var, walk(a.body))
        if isinstance(a, Scope):
            body = walk(a.body)
            names = list(a.names)
            if isinstance(body, Scope):
                names.extend(body.names)
                body = body.body
            fns = free_names(body)
            kept = tuple(n for n in names if n in fns)
            return Scope(kept, body) if kept else body
        if isinstance(a, Par):
            flat: list[Agent] = []
            for p in a.parts:
                cp = walk(p)
                if isinstance(cp, Par):
                    flat.extend(cp.parts)
                else:
                    flat.append(cp)
            hoisted: list[Name] = []
            pieces: list[Agent] = []
            for idx, cp in enumerate(flat):
                if not isinstance(cp, Scope):
                    if not isinstance(cp, Inaction):
                        pieces.append(cp)
                    continue
                outside = set(hoisted)
                for other_idx, other in enumerate(flat):
                    if other_idx != idx:
                        outside |= free_names(other)
                ns, body = list(cp.names), cp.body
                for i, n in enumerate(ns):
                    if n in outside or n in ns[:i]:
                        f = gen.fresh_like(n)
                        body = rename_agent(body, {n: f}, gen)
                        ns[i] = f
                hoisted.extend(ns)
                if isinstance(body, Par):
                    pieces.extend(body.parts)
                elif not isinstance(body, Inaction):
                    pieces.append(body)
            out = par(pieces)
            if hoisted:
                fns = free_names(out)
                kept = tuple(n for n in hoisted if n in fns)
                if kept:
                    return Scope(kept, out)
            return out
        raise TypeError(f"not an agent: {a!r}")

    out = walk(agent)
    # A second pass settles forms like (x)((y)P | Q) whose inner scope
    # only becomes hoistable after the first rewrite.
    prev = None
    while prev != out:
        prev = out
        out = walk(out)
    return out


@dataclass(frozen=True)
class _Env:
    names: tuple[tuple[Name, Name], ...]
    avars: tuple[tuple[str, str], ...]

    def name_image(self, n: Name) -> Name | None:
        for k, v in reversed(self.names):
            if k == n:
                return v
        return None

    def name_images(self) -> set[Name]:
        out = {}
        for k, v in self.names:
            out[k] = v
        return set(out.values())

    def avar_image(self, v: str) -> str | None:
        for k, w in reversed(self.avars):
            if k == v:
                return w
        return None

    def bind_names(self, pairs: list[tuple[Name, Name]]) -> "_Env":
        return _Env(self.names + tuple(pairs), self.avars)

    def bind_avar(self, a: str, b: str) -> "_Env":
        return _Env(self.names, self.avars + ((a, b),))


def alpha_equal(a: Agent, b: Agent, unfold_budget: int = 6) -> bool:
    """Congruence check: associativity/commutativity of composition,
    scope reordering and extrusion, vacuous binders, alpha-renaming of
    bound names, and up to `unfold_budget` recursion unfoldings."""
    gen = NameGen(avoid=all_names(a) | all_names(b))
    ca = canon_agent(a, gen)
    cb = canon_agent(b, gen)
    budget = [unfold_budget]

    def match_name(n1: Name, n2: Name, env: _Env) -> bool:
        img = env.name_image(n1)
        if img is not None:
            return img == n2
        return n1 == n2 and n2 not in env.name_images()

    def match(x: Agent, y: Agent, env: _Env) -> Iterator[_Env]:
        if isinstance(x, Inaction) and isinstance(y, Inaction):
            yield env
            return
        if isinstance(x, Constant) and isinstance(y, Constant):
            if (
                x.label == y.label
                and len(x.args) == len(y.args)
                and all(match_name(p, q, env) for p, q in zip(x.args, y.args))
            ):
                yield env
            return
        if isinstance(x, AgentVar) and isinstance(y, AgentVar):
            img = env.avar_image(x.var)
            if img is not None:
                if img == y.var:
                    yield env
            elif x.var == y.var:
                yield env
            return
        if isinstance(x, Sum) and isinstance(y, Sum):
            if len(x.branches) == len(y.branches):
                yield from match_multiset(list(x.branches), list(y.branches), env, match_branch)
            return
        if isinstance(x, Par) and isinstance(y, Par):
            if len(x.parts) == len(y.parts):
                yield from match_multiset(list(x.parts), list(y.parts), env, match)
            return
        if isinstance(x, Scope) and isinstance(y, Scope):
            if len(x.names) == len(y.names):
                for perm in _permutations(list(y.names)):
                    env2 = env.bind_names(list(zip(x.names, perm)))
                    yield from match(x.body, y.body, env2)
            return
        if isinstance(x, Rec) and isinstance(y, Rec):
            yield from match(x.body, y.body, env.bind_avar(x.var, y.var))
            # fall through to unfolding as well: rec X.P may also equal
            # rec Y.Q after unfolding either side
        if budget[0] > 0 and isinstance(x, Rec):
            budget[0] -= 1
            unfolded = canon_agent(subst_agent_var(x.body, x.var, x, gen), gen)
            yield from match(unfolded, y, env)
            budget[0] += 1
        if budget[0] > 0 and isinstance(y, Rec) and not isinstance(x, Rec):
            budget[0] -= 1
            unfolded = canon_agent(subst_agent_var(y.body, y.var, y, gen), gen)
            yield from match(x, unfolded, env)
            budget[0] += 1

    def match_branch(b1: Branch, b2: Branch, env: _Env) -> Iterator[_Env]:
        p1, p2 = b1.prefix, b2.prefix
        if isinstance(p1, InputPrefix) and isinstance(p2, InputPrefix):
            ok = (
                len(p1.args) == len(p2.args)
                and match_name(p1.channel, p2.channel, env)
                and all(match_name(a1, a2, env) for a1, a2 in zip(p1.args, p2.args))
            )
        elif isinstance(p1, OutputPrefix) and isinstance(p2, OutputPrefix):
            ok = (
                len(p1.args) == len(p2.args)
                and match_name(p1.channel, p2.channel, env)
                and all(match_name(a1, a2, env) for a1, a2 in zip(p1.args, p2.args))
            )
        elif isinstance(p1, FusionPrefix) and isinstance(p2, FusionPrefix):
            if len(p1.pairs) != len(p2.pairs):
                return
            yield from _match_pairsets(list(p1.pairs), list(p2.pairs), env, b1.cont, b2.cont)
            return
        else:
            ok = False
        if ok:
            yield from match(b1.cont, b2.cont, env)

    def _match_pairsets(ps1, ps2, env, c1, c2):
        if not ps1:
            yield from match(c1, c2, env)
            return
        (a1, b1) = ps1[0]
        for j, (a2, b2) in enumerate(ps2):
            rest = ps2[:j] + ps2[j + 1 :]
            if match_name(a1, a2, env) and match_name(b1, b2, env):
                yield from _match_pairsets(ps1[1:], rest, env, c1, c2)
            if match_name(a1, b2, env) and match_name(b1, a2, env):
                yield from _match_pairsets(ps1[1:], rest, env, c1, c2)

    def match_multiset(xs, ys, env, item_match):
        if not xs:
            yield env
            return
        x0 = xs[0]
        for j, y0 in enumerate(ys):
            for env2 in item_match(x0, y0, env):
                yield from match_multiset(xs[1:], ys[:j] + ys[j + 1 :], env2, item_match)

    for _ in match(ca, cb, _Env((), ())):
        return True
    return False


def _permutations(items: list) -> Iterator[tuple]:
    from itertools import permutations

    yield from permutations(items)


def nf_alpha_equal(a: NormalForm, b: NormalForm, unfold_budget: int = 6) -> bool:
    return alpha_equal(as_agent(a), as_agent(b), unfold_budget)


# ---------------------------------------------------------------------------
# Display renaming


def displayable(agent: Agent) -> Agent:
    """Alpha-rename generated (`~`-indexed) names to plain unused ones so
    the result survives a print/parse round trip."""
    names = all_names(agent)
    generated = sorted((n for n in names if n.index is not None))
    if not generated:
        return agent
    taken = {n for n in names if n.index is None}
    mapping: dict[Name, Name] = {}
    for n in generated:
        k = 0
        while True:
            k += 1
            cand = Name(f"{n.base}{k}")
            if cand not in taken:
                break
        taken.add(cand)
        mapping[n] = cand
    return rename_all(agent, mapping)
