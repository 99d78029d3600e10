"""Names, first-order terms, substitutions and unification.

Everything above this module (process calculus, hypergraphs, logic
programs) shares one vocabulary: nodes, channel names and logic variables
are all `Name`s, and the single term language below is used wherever
structured payloads appear (action arguments become functor applications
on the logic-programming side).

The unifier is the one piece with a non-obvious contract: it must be
deterministic, idempotent, and let the caller steer which member of a
variable equivalence class survives as the representative (`preferred`).
That policy is what makes fusion effects, merge steps and big-step
substitutions reproducible across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping


@dataclass(frozen=True)
class Name:
    """An identifier, optionally carrying a generation index.

    User-written names have ``index=None``. Freshly generated names carry
    an index and print as ``base~k``; the process grammar rejects ``~`` in
    identifiers, so generated names can never collide with user input.
    """

    base: str
    index: int | None = None

    def __str__(self) -> str:
        if self.index is None:
            return self.base
        return f"{self.base}~{self.index}"

    def __repr__(self) -> str:
        return f"Name({str(self)!r})"

    @property
    def sort_key(self) -> tuple[str, int]:
        return (self.base, -1 if self.index is None else self.index)

    def __lt__(self, other: "Name") -> bool:
        return self.sort_key < other.sort_key

    def __le__(self, other: "Name") -> bool:
        return self.sort_key <= other.sort_key


class NameGen:
    """Deterministic fresh-name source.

    Avoids a caller-supplied set of names and everything it has produced
    itself, so replaying the same operation on the same input yields the
    same names.
    """

    def __init__(self, avoid: Iterable[Name] = ()):
        self._avoid: set[Name] = set(avoid)
        self._counters: dict[str, int] = {}

    def avoid(self, names: Iterable[Name]) -> None:
        self._avoid.update(names)

    def fresh(self, base: str = "n") -> Name:
        k = self._counters.get(base, 0)
        while True:
            k += 1
            candidate = Name(base, k)
            if candidate not in self._avoid:
                break
        self._counters[base] = k
        self._avoid.add(candidate)
        return candidate

    def fresh_like(self, name: Name) -> Name:
        return self.fresh(name.base)


class Term:
    """Base class for first-order terms (`Var` and `App`)."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: Name

    def __str__(self) -> str:
        return str(self.name)

    def __repr__(self) -> str:
        return f"Var({str(self.name)!r})"


@dataclass(frozen=True)
class App(Term):
    fun: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return f"{self.fun}()"
        return f"{self.fun}({', '.join(str(a) for a in self.args)})"

    def __repr__(self) -> str:
        return f"App({self.fun!r}, {self.args!r})"


def iter_names(term: Term) -> Iterator[Name]:
    """Yield every name in `term`, in pre-order, with repeats."""
    if isinstance(term, Var):
        yield term.name
    else:
        assert isinstance(term, App)
        for arg in term.args:
            yield from iter_names(arg)


def term_names(term: Term) -> set[Name]:
    return set(iter_names(term))


# An equation set is any iterable of term pairs; lists and sets both work.
Equation = tuple[Term, Term]


class Subst:
    """An immutable substitution: a finite map from names to terms.

    Identity bindings are dropped at construction, so two substitutions
    are equal exactly when they act identically on every term.
    """

    __slots__ = ("_map", "_hash")

    def __init__(self, mapping: Mapping[Name, Term] | Iterable[tuple[Name, Term]] = ()):
        items = dict(mapping)
        self._map: dict[Name, Term] = {
            x: t for x, t in items.items() if t != Var(x)
        }
        self._hash: int | None = None

    @staticmethod
    def of_names(mapping: Mapping[Name, Name]) -> "Subst":
        return Subst({x: Var(y) for x, y in mapping.items()})

    def __bool__(self) -> bool:
        return bool(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __contains__(self, x: Name) -> bool:
        return x in self._map

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Subst) and self._map == other._map

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(sorted(self._map.items(), key=lambda kv: kv[0].sort_key)))
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(
            f"{x} := {t}" for x, t in sorted(self._map.items(), key=lambda kv: kv[0].sort_key)
        )
        return "{" + inner + "}"

    def items(self) -> Iterator[tuple[Name, Term]]:
        return iter(sorted(self._map.items(), key=lambda kv: kv[0].sort_key))

    @property
    def domain(self) -> set[Name]:
        return set(self._map)

    def range_names(self) -> set[Name]:
        out: set[Name] = set()
        for t in self._map.values():
            out |= term_names(t)
        return out

    def names(self) -> set[Name]:
        return self.domain | self.range_names()

    def apply(self, term: Term) -> Term:
        if isinstance(term, Var):
            return self._map.get(term.name, term)
        assert isinstance(term, App)
        return App(term.fun, tuple(self.apply(a) for a in term.args))

    def apply_name(self, x: Name) -> Name:
        """Apply to a name; only valid for name-to-name substitutions."""
        t = self._map.get(x)
        if t is None:
            return x
        if not isinstance(t, Var):
            raise ValueError(f"substitution maps {x} to the non-name term {t}")
        return t.name

    def apply_names(self, xs: Iterable[Name]) -> tuple[Name, ...]:
        return tuple(self.apply_name(x) for x in xs)

    def compose(self, other: "Subst") -> "Subst":
        """Return the substitution "apply self, then other"."""
        out: dict[Name, Term] = {}
        for x, t in self._map.items():
            out[x] = other.apply(t)
        for x, t in other._map.items():
            out.setdefault(x, t)
        return Subst(out)

    def restrict(self, names: Iterable[Name]) -> "Subst":
        keep = set(names)
        return Subst({x: t for x, t in self._map.items() if x in keep})

    def without(self, names: Iterable[Name]) -> "Subst":
        drop = set(names)
        return Subst({x: t for x, t in self._map.items() if x not in drop})

    def is_name_map(self) -> bool:
        return all(isinstance(t, Var) for t in self._map.values())

    def is_renaming(self) -> bool:
        """True for injective name-to-name substitutions."""
        if not self.is_name_map():
            return False
        images = [t.name for t in self._map.values()]
        return len(images) == len(set(images))

    def is_idempotent(self) -> bool:
        dom = self.domain
        return all(not (term_names(t) & dom) for t in self._map.values())

    def classes(self) -> dict[Name, tuple[Name, ...]]:
        """For an idempotent name map: image name -> its preimages, sorted."""
        out: dict[Name, list[Name]] = {}
        for x, t in self._map.items():
            if not isinstance(t, Var):
                raise ValueError("classes() requires a name-to-name substitution")
            out.setdefault(t.name, []).append(x)
        return {y: tuple(sorted(xs, key=lambda n: n.sort_key)) for y, xs in out.items()}


def eqn(theta: Subst) -> list[Equation]:
    """Turn a name-to-name substitution into the equation set it solves."""
    out: list[Equation] = []
    for x, t in theta.items():
        if not isinstance(t, Var):
            raise ValueError("eqn() requires a name-to-name substitution")
        out.append((t, Var(x)))
    return out


class _Occurs(Exception):
    pass


def mgu(equations: Iterable[Equation], preferred: Iterable[Name] = ()) -> Subst | None:
    """Most general unifier of an equation set, or None if there is none.

    The result is idempotent. Within each variable equivalence class the
    surviving representative is the least `preferred` member under the
    Name order when the class meets `preferred`, otherwise the least
    member outright — so the output is a function of the inputs alone.

    >>> x, y, z = Name("x"), Name("y"), Name("z")
    >>> f = lambda *a: App("f", a)
    >>> mgu([(f(Var(x), Var(y)), f(Var(y), Var(z)))])
    {y := x, z := x}
    >>> mgu([(Var(x), f(Var(x)))]) is None
    True
    >>> mgu([(f(Var(x)), App("g", (Var(x),)))]) is None
    True
    """
    parent: dict[Name, Name] = {}
    bound: dict[Name, Term] = {}
    names: set[Name] = set()

    def find(x: Name) -> Name:
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(x, x) != x:
            parent[x], x = root, parent[x]
        return root

    def shallow(t: Term) -> Term:
        # canonicalize a variable to its class root without chasing
        # bindings, so two bound classes still get unioned below
        if isinstance(t, Var):
            return Var(find(t.name))
        return t

    todo: list[Equation] = []
    for s, t in equations:
        todo.append((s, t))
        names |= term_names(s) | term_names(t)

    while todo:
        s, t = todo.pop()
        s, t = shallow(s), shallow(t)
        if s == t:
            continue
        if isinstance(s, Var) and isinstance(t, Var):
            parent[s.name] = t.name
            dragged = bound.pop(s.name, None)
            if dragged is not None:
                kept = bound.get(t.name)
                if kept is None:
                    bound[t.name] = dragged
                else:
                    todo.append((dragged, kept))
        elif isinstance(s, Var) or isinstance(t, Var):
            v, other = (s, t) if isinstance(s, Var) else (t, s)
            kept = bound.get(v.name)
            if kept is None:
                bound[v.name] = other
            else:
                todo.append((kept, other))
        else:
            assert isinstance(s, App) and isinstance(t, App)
            if s.fun != t.fun or len(s.args) != len(t.args):
                return None
            todo.extend(zip(s.args, t.args))

    classes: dict[Name, list[Name]] = {}
    for x in names:
        classes.setdefault(find(x), []).append(x)
    pref = set(preferred)
    rep: dict[Name, Name] = {}
    for root, members in classes.items():
        candidates = [m for m in members if m in pref] or members
        rep[root] = min(candidates, key=lambda n: n.sort_key)

    resolved: dict[Name, Term] = {}
    resolving: set[Name] = set()

    def resolve_root(root: Name) -> Term:
        if root in resolved:
            return resolved[root]
        b = bound.get(root)
        if b is None:
            out: Term = Var(rep[root])
        else:
            if root in resolving:
                raise _Occurs()
            resolving.add(root)
            out = resolve_term(b)
            resolving.discard(root)
        resolved[root] = out
        return out

    def resolve_term(t: Term) -> Term:
        if isinstance(t, Var):
            return resolve_root(find(t.name))
        assert isinstance(t, App)
        return App(t.fun, tuple(resolve_term(a) for a in t.args))

    try:
        out: dict[Name, Term] = {}
        for x in names:
            t = resolve_root(find(x))
            if t != Var(x):
                out[x] = t
        return Subst(out)
    except _Occurs:
        return None


def fresh_renaming(names: Iterable[Name], gen: NameGen) -> Subst:
    """An injective substitution sending each name to a brand-new one."""
    return Subst.of_names({x: gen.fresh_like(x) for x in sorted(set(names), key=lambda n: n.sort_key)})
