"""Reduction semantics.

A communication step picks an input branch and an output branch on the
same channel in two different parallel components, applies the
substitutive effect of equating their argument lists, and re-normalizes.
A fusion step fires a single fusion prefix the same way. Only restricted
names may be substituted away; a step whose effect would rewrite a free
name is not enabled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..terms import Name, NameGen, Subst, Var, mgu
from .normal import NormalForm, normalize, rename_agent
from .syntax import (
    Agent,
    FusionPrefix,
    InputPrefix,
    OutputPrefix,
    Scope,
    Sum,
    all_names,
    par,
)


def substitutive_effect(
    pairs: Iterable[tuple[Name, Name]], replaceable: set[Name] | None = None
) -> Subst | None:
    """The idempotent name substitution whose kernel is the equivalence
    generated by `pairs`, choosing representatives outside `replaceable`
    whenever possible. Returns None if some name outside `replaceable`
    would have to be rewritten.

    >>> x, y, z = Name("x"), Name("y"), Name("z")
    >>> substitutive_effect([(x, y), (y, z)], {x, y, z})
    {x := z, y := z}
    >>> substitutive_effect([(x, y)], {x})
    {x := y}
    >>> substitutive_effect([(x, y)], set()) is None
    True
    """
    pairs = list(pairs)
    names = {n for pair in pairs for n in pair}
    if replaceable is None:
        preferred: tuple[Name, ...] = ()
    else:
        preferred = tuple(sorted(names - replaceable))
    sigma = mgu([(Var(a), Var(b)) for a, b in pairs], preferred=preferred)
    if sigma is None:
        return None
    if replaceable is not None and not sigma.domain <= replaceable:
        return None
    return sigma


@dataclass(frozen=True)
class CommEvent:
    input_part: int
    input_branch: int
    output_part: int
    output_branch: int
    channel: Name

    def __str__(self) -> str:
        return (
            f"comm {self.channel}: part {self.input_part} branch {self.input_branch}"
            f" with part {self.output_part} branch {self.output_branch}"
        )


@dataclass(frozen=True)
class FuseEvent:
    part: int
    branch: int

    def __str__(self) -> str:
        return f"fuse: part {self.part} branch {self.branch}"


@dataclass(frozen=True)
class Reduction:
    event: CommEvent | FuseEvent
    effect: Subst
    result: NormalForm


def reductions(process: Agent | NormalForm, gen: NameGen | None = None) -> tuple[Reduction, ...]:
    """All enabled reduction steps, in a deterministic order."""
    if isinstance(process, NormalForm):
        nf = process
    else:
        nf = normalize(process, gen)
    if gen is None:
        avoid = set(nf.restricted)
        for p in nf.parts:
            avoid |= all_names(p)
        gen = NameGen(avoid=avoid)
    replaceable = set(nf.restricted)
    out: list[Reduction] = []

    def finish(event: CommEvent | FuseEvent, sigma: Subst, removed: set[int], conts: list[Agent]) -> None:
        kept = [p for k, p in enumerate(nf.parts) if k not in removed]
        body = par(kept + conts)
        body = rename_agent(body, {n: sigma.apply_name(n) for n in sigma.domain}, gen)
        scoped: Agent = Scope(nf.restricted, body) if nf.restricted else body
        out.append(Reduction(event, sigma, normalize(scoped, gen)))

    for i, pi in enumerate(nf.parts):
        if not isinstance(pi, Sum):
            continue
        for bi, br in enumerate(pi.branches):
            if isinstance(br.prefix, FusionPrefix):
                sigma = substitutive_effect(br.prefix.pairs, replaceable)
                if sigma is None:
                    continue
                finish(FuseEvent(i, bi), sigma, {i}, [br.cont])
        for j in range(len(nf.parts)):
            if j == i:
                continue
            pj = nf.parts[j]
            if not isinstance(pj, Sum):
                continue
            for bi, bri in enumerate(pi.branches):
                if not isinstance(bri.prefix, InputPrefix):
                    continue
                for bj, brj in enumerate(pj.branches):
                    if not isinstance(brj.prefix, OutputPrefix):
                        continue
                    if bri.prefix.channel != brj.prefix.channel:
                        continue
                    if len(bri.prefix.args) != len(brj.prefix.args):
                        continue
                    sigma = substitutive_effect(
                        list(zip(bri.prefix.args, brj.prefix.args)), replaceable
                    )
                    if sigma is None:
                        continue
                    finish(
                        CommEvent(i, bi, j, bj, bri.prefix.channel),
                        sigma,
                        {i, j},
                        [bri.cont, brj.cont],
                    )
    return tuple(out)
