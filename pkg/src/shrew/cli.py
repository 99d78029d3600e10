"""Command-line front end: parse, translate, step, check, export.

One subcommand per stage of the pipeline:

    fusion-reduce   enumerate the reductions of a process (.fu)
    fusion2hshr     translate a process to a judgement + productions
    hshr-step       enumerate synchronized transitions of a graph (.hg)
    hshr2slp        translate productions to a logic program (.slp)
    slp-bigstep     enumerate transactional big-steps of a program
    pipeline        run the whole chain on a process, with cross-checks
    sweep           run the randomized property sweeps
    dot             export a graph in DOT (bipartite edge-box style)

Output is plain text by default, `--format json` emits a versioned
document (`"schema": 1`), and identical inputs with identical options
produce byte-identical output.  Exit status: 0 on success, 1 when a
check fails, 2 on unusable input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .fusion import (
    ParseError,
    displayable,
    normalize,
    parse_process,
    pretty,
    reductions,
)
from .fusion import as_agent
from .fusion2hshr import (
    interleaving_filter,
    needed_auxiliaries,
    prefix_arities,
    process_productions,
    same_modulo_amoeboids,
    translate_process,
)
from .hshr import GraphParseError, parse_graph, parse_hg, print_graph, print_production, to_dot
from .hshr.derive import enumerate_transitions
from .hshr.production import Production, Transition, sort_entries
from .hshr2slp import mirrors, translate_judgement, translate_productions
from .oracles import (
    SweepConfig,
    SweepReport,
    amoeboid_sweep,
    determinism_sweep,
    equivariance_sweep,
    mgusubst_sweep,
    production_sweep,
    theorem_sweep,
    unification_sweep,
)
from .slp import SlpFile, SlpParseError, big_steps, goal_str, print_program, validate_clause
from .slp import parse_program as parse_slp
from .terms import Var

SCHEMA = 1

SWEEP_KINDS = (
    "theorem",
    "production",
    "determinism",
    "equivariance",
    "unification",
    "mgusubst",
    "amoeboid",
)


class InputError(Exception):
    """Unusable input: missing file, parse error, wrong extension."""


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs, flattened out of argparse."""

    command: str
    inputs: tuple[str, ...] = ()
    seed: int = 0
    steps: int = 64
    fmt: str = "text"
    nonempty: bool = False
    no_chain_collapse: bool = False
    literal_translation: bool = False
    kind: str = "all"
    count: int = 50
    title: str = "G"


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _parse_fu(path: str):
    try:
        return parse_process(_read(path))
    except ParseError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _parse_hg(path: str):
    try:
        return parse_hg(_read(path))
    except GraphParseError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _parse_slp(path: str):
    try:
        return parse_slp(_read(path))
    except SlpParseError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _emit(text: str) -> None:
    sys.stdout.write(text)
    if text and not text.endswith("\n"):
        sys.stdout.write("\n")


def _emit_json(command: str, payload: dict) -> None:
    doc = {"schema": SCHEMA, "command": command}
    doc.update(payload)
    _emit(json.dumps(doc, indent=2, sort_keys=True))


def subst_str(s) -> str:
    """Deterministic rendering of a substitution, sorted by name.

    >>> from .terms import Subst, Var, Name
    >>> subst_str(Subst({Name("y"): Var(Name("x"))}))
    '{y := x}'
    """
    from .slp import term_str

    entries = sorted(s.domain, key=lambda n: n.sort_key)
    inner = ", ".join(f"{x} := {term_str(s.apply(Var(x)))}" for x in entries)
    return "{" + inner + "}"


def transition_str(t: Transition) -> str:
    inner = ", ".join(
        f"{node}: {act}<{' '.join(str(v) for v in payload)}>"
        for node, act, payload in sort_entries(t.actions)
    )
    if t.fusion.domain:
        ker = ", ".join(f"{x}={t.fusion.apply_name(x)}" for x in sorted(t.fusion.domain))
        inner = f"{inner} / {ker}" if inner else f"/ {ker}"
    return f"[{inner}] => {print_graph(t.target)}"


def _transition_json(t: Transition) -> dict:
    return {
        "actions": [
            {"node": str(node), "symbol": act, "payload": [str(v) for v in payload]}
            for node, act, payload in sort_entries(t.actions)
        ],
        "fusion": {str(x): str(t.fusion.apply_name(x)) for x in sorted(t.fusion.domain)},
        "target": print_graph(t.target),
    }


def _bigstep_json(b) -> dict:
    return {
        "theta": subst_str(b.theta),
        "end": goal_str(b.end),
        "rewritten": sorted(b.rewritten),
    }


def _clause_str(c) -> str:
    return print_program(SlpFile(clauses=(c,), goals=())).strip()


# ---------------------------------------------------------------------------
# Subcommands


def cmd_fusion_reduce(cfg: RunConfig) -> int:
    process = _parse_fu(cfg.inputs[0])
    steps = reductions(process)
    if cfg.fmt == "json":
        _emit_json(
            "fusion-reduce",
            {
                "process": pretty(process),
                "reductions": [
                    {
                        "event": str(r.event),
                        "effect": subst_str(r.effect),
                        "result": pretty(displayable(as_agent(r.result))),
                    }
                    for r in steps
                ],
            },
        )
        return 0
    for i, r in enumerate(steps):
        result = pretty(displayable(as_agent(r.result)))
        _emit(f"[{i}] {r.event}  effect {subst_str(r.effect)}  ->  {result}")
    return 0


def _translation(cfg: RunConfig):
    process = _parse_fu(cfg.inputs[0])
    nf = normalize(process)
    jud = translate_process(nf)
    prods: list[Production] = []
    for part in nf.parts:
        for p in process_productions(part, collapse=not cfg.no_chain_collapse):
            if p not in prods:
                prods.append(p)
    aux = needed_auxiliaries(jud, prefix_arities(prods))
    return process, nf, jud, prods, aux


def cmd_fusion2hshr(cfg: RunConfig) -> int:
    _, _, jud, prods, aux = _translation(cfg)
    if cfg.fmt == "json":
        _emit_json(
            "fusion2hshr",
            {
                "judgement": print_graph(jud),
                "productions": [print_production(p) for p in prods],
                "auxiliaries": [print_production(p) for p in aux],
            },
        )
        return 0
    lines = [print_graph(jud)]
    lines += [print_production(p) for p in prods]
    lines += [print_production(p) for p in aux]
    _emit("\n".join(lines))
    return 0


def cmd_hshr_step(cfg: RunConfig) -> int:
    hg = _parse_hg(cfg.inputs[0])
    if hg.graph is None:
        raise InputError(f"{cfg.inputs[0]}: no graph declaration to step")
    enum = enumerate_transitions(hg.graph, hg.productions, max_fresh=cfg.steps)
    if cfg.fmt == "json":
        _emit_json(
            "hshr-step",
            {
                "graph": print_graph(hg.graph),
                "transitions": [_transition_json(t) for t in enum.transitions],
                "complete": enum.complete,
            },
        )
        return 0
    for i, t in enumerate(enum.transitions):
        _emit(f"[{i}] {transition_str(t)}")
    if not enum.complete:
        print("incomplete: fresh-name budget exhausted", file=sys.stderr)
    return 0


def cmd_hshr2slp(cfg: RunConfig) -> int:
    hg = _parse_hg(cfg.inputs[0])
    clauses = translate_productions(hg.productions, foo_convention=not cfg.literal_translation)
    if cfg.literal_translation:
        for i, c in enumerate(clauses):
            for problem in validate_clause(c):
                print(f"note: clause {i}: {problem}", file=sys.stderr)
    goals = () if hg.graph is None else (translate_judgement(hg.graph),)
    f = SlpFile(clauses=clauses, goals=goals)
    if cfg.fmt == "json":
        _emit_json(
            "hshr2slp",
            {
                "clauses": [_clause_str(c) for c in clauses],
                "goals": [goal_str(g) for g in goals],
            },
        )
        return 0
    _emit(print_program(f))
    return 0


def cmd_slp_bigstep(cfg: RunConfig) -> int:
    f = _parse_slp(cfg.inputs[0])
    results = [
        (g, big_steps(g, f.clauses, nonempty=cfg.nonempty)) for g in f.goals
    ]
    if cfg.fmt == "json":
        _emit_json(
            "slp-bigstep",
            {
                "goals": [
                    {"goal": goal_str(g), "bigsteps": [_bigstep_json(b) for b in bs]}
                    for g, bs in results
                ],
            },
        )
        return 0
    for g, bs in results:
        _emit(f"?- {goal_str(g)}")
        for i, b in enumerate(bs):
            _emit(f"  [{i}] theta {subst_str(b.theta)}  end {goal_str(b.end) or 'empty'}")
    return 0


def cmd_pipeline(cfg: RunConfig) -> int:
    process, nf, jud, prods, aux = _translation(cfg)
    steps = reductions(nf)
    everything = prods + aux
    enum = enumerate_transitions(jud, everything, max_fresh=10_000)
    filtered = [t for t in enum.transitions if interleaving_filter(t)]
    # the cross-checks compare against derivations of the plain
    # productions, so the program must be their plain translation: the
    # foo repair would demand foo moves the graph side never makes
    program = translate_productions(everything)
    allbs = big_steps(translate_judgement(jud), program)
    bsteps = [b for b in allbs if b.rewritten] if cfg.nonempty else list(allbs)

    problems: list[str] = []
    if not enum.complete:
        problems.append("transition enumeration hit its budget")
    reduct_graphs = [translate_process(r.result) for r in steps]
    for r, h in zip(steps, reduct_graphs):
        if not any(same_modulo_amoeboids(t.target, h) for t in filtered):
            problems.append(f"reduction has no matching transition ({r.event})")
    for t in filtered:
        if not any(same_modulo_amoeboids(t.target, h) for h in reduct_graphs):
            problems.append("interleaving transition has no matching reduction")
    for t in enum.transitions:
        if not any(mirrors(b, t) for b in allbs):
            problems.append("transition has no mirroring big-step")
            break
    for b in allbs:
        if not any(mirrors(b, t) for t in enum.transitions):
            problems.append("big-step has no mirroring transition")
            break

    if cfg.fmt == "json":
        _emit_json(
            "pipeline",
            {
                "process": pretty(displayable(as_agent(nf))),
                "reductions": [
                    {
                        "event": str(r.event),
                        "effect": subst_str(r.effect),
                        "result": pretty(displayable(as_agent(r.result))),
                    }
                    for r in steps
                ],
                "judgement": print_graph(jud),
                "productions": [print_production(p) for p in prods],
                "auxiliaries": [print_production(p) for p in aux],
                "transitions": len(enum.transitions),
                "filtered": [_transition_json(t) for t in filtered],
                "clauses": [_clause_str(c) for c in program],
                "bigsteps": [_bigstep_json(b) for b in bsteps],
                "problems": problems,
                "ok": not problems,
            },
        )
        return 0 if not problems else 1

    _emit(f"process: {pretty(displayable(as_agent(nf)))}")
    _emit("")
    _emit("reductions:")
    for i, r in enumerate(steps):
        result = pretty(displayable(as_agent(r.result)))
        _emit(f"  [{i}] {r.event}  effect {subst_str(r.effect)}  ->  {result}")
    _emit("")
    _emit(f"judgement: {print_graph(jud)}")
    _emit("productions:")
    for p in prods:
        _emit(f"  {print_production(p)}")
    for p in aux:
        _emit(f"  {print_production(p)}")
    _emit("")
    _emit(f"transitions: {len(enum.transitions)} total, {len(filtered)} interleaving")
    for i, t in enumerate(filtered):
        _emit(f"  [{i}] {transition_str(t)}")
    _emit("")
    _emit("program:")
    for c in program:
        _emit(f"  {_clause_str(c)}")
    _emit(f"big-steps: {len(bsteps)}")
    for i, b in enumerate(bsteps):
        _emit(f"  [{i}] theta {subst_str(b.theta)}  end {goal_str(b.end) or 'empty'}")
    _emit("")
    if problems:
        for p in problems:
            _emit(f"CHECK FAILED: {p}")
        return 1
    _emit("checks: reductions ~ transitions ~ big-steps all agree")
    return 0


def _run_sweep(kind: str, cfg: RunConfig) -> SweepReport:
    sc = SweepConfig(seed=cfg.seed)
    if kind == "theorem":
        return theorem_sweep(sc, count=cfg.count)
    if kind == "production":
        return production_sweep(sc, count=cfg.count)
    if kind == "determinism":
        return determinism_sweep(sc, count=cfg.count)
    if kind == "equivariance":
        return equivariance_sweep(sc, count=cfg.count)
    if kind == "unification":
        return unification_sweep(sc, count=cfg.count)
    if kind == "mgusubst":
        return mgusubst_sweep(sc, count=cfg.count)
    if kind == "amoeboid":
        return amoeboid_sweep(max_edges=4, max_payload=2)
    raise InputError(f"unknown sweep kind: {kind}")


def cmd_sweep(cfg: RunConfig) -> int:
    kinds = SWEEP_KINDS if cfg.kind == "all" else (cfg.kind,)
    reports = [_run_sweep(k, cfg) for k in kinds]
    if cfg.fmt == "json":
        _emit_json("sweep", {"reports": [r.to_json() for r in reports]})
    else:
        for r in reports:
            _emit(r.summary())
            for v in r.failures:
                _emit(f"  FAIL [{v.index}] {v.source}: {v.detail}")
    return 0 if all(r.ok for r in reports) else 1


def cmd_dot(cfg: RunConfig) -> int:
    path = cfg.inputs[0]
    if path.endswith(".fu"):
        g = translate_process(normalize(_parse_fu(path)))
    else:
        hg = _parse_hg(path)
        if hg.graph is None:
            raise InputError(f"{path}: no graph declaration to export")
        g = hg.graph
    _emit(to_dot(g, title=cfg.title))
    return 0


# ---------------------------------------------------------------------------
# Argument plumbing

HANDLERS = {
    "fusion-reduce": cmd_fusion_reduce,
    "fusion2hshr": cmd_fusion2hshr,
    "hshr-step": cmd_hshr_step,
    "hshr2slp": cmd_hshr2slp,
    "slp-bigstep": cmd_slp_bigstep,
    "pipeline": cmd_pipeline,
    "sweep": cmd_sweep,
    "dot": cmd_dot,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="shrew",
        description="Process-calculus / graph-rewriting / logic-programming workbench.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, fmt: tuple[str, ...] = ("text", "json")) -> None:
        p.add_argument("--format", choices=fmt, default=fmt[0], dest="fmt")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("fusion-reduce", help="enumerate reductions of a process")
    p.add_argument("input", help=".fu process file")
    common(p)

    p = sub.add_parser("fusion2hshr", help="translate a process to graph + productions")
    p.add_argument("input", help=".fu process file")
    p.add_argument(
        "--no-chain-collapse",
        action="store_true",
        help="keep even connector chains instead of folding them away",
    )
    common(p)

    p = sub.add_parser("hshr-step", help="enumerate synchronized transitions")
    p.add_argument("input", help=".hg graph + productions file")
    p.add_argument("--steps", type=int, default=64, help="fresh-name budget")
    common(p)

    p = sub.add_parser("hshr2slp", help="translate productions to a logic program")
    p.add_argument("input", help=".hg graph + productions file")
    p.add_argument(
        "--literal-translation",
        action="store_true",
        help="keep silent unused head variables bare instead of foo-wrapping them",
    )
    common(p)

    p = sub.add_parser("slp-bigstep", help="enumerate big-steps of a program")
    p.add_argument("input", help=".slp program file")
    p.add_argument("--nonempty", action="store_true", help="drop the empty big-step")
    common(p)

    p = sub.add_parser("pipeline", help="full chain with cross-checks")
    p.add_argument("input", help=".fu process file")
    p.add_argument("--no-chain-collapse", action="store_true")
    p.add_argument("--nonempty", action="store_true")
    common(p)

    p = sub.add_parser("sweep", help="randomized property sweeps")
    p.add_argument("--kind", choices=SWEEP_KINDS + ("all",), default="all")
    p.add_argument("--count", type=int, default=50, help="instances per counted sweep")
    common(p, fmt=("json", "text"))

    p = sub.add_parser("dot", help="export a graph in DOT")
    p.add_argument("input", help=".hg file, or .fu to export its translation")
    p.add_argument("--title", default="G")
    common(p, fmt=("dot",))

    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        inputs=(ns.input,) if hasattr(ns, "input") else (),
        seed=getattr(ns, "seed", 0),
        steps=getattr(ns, "steps", 64),
        fmt=getattr(ns, "fmt", "text"),
        nonempty=getattr(ns, "nonempty", False),
        no_chain_collapse=getattr(ns, "no_chain_collapse", False),
        literal_translation=getattr(ns, "literal_translation", False),
        kind=getattr(ns, "kind", "all"),
        count=getattr(ns, "count", 50),
        title=getattr(ns, "title", "G"),
    )


def run(cfg: RunConfig) -> int:
    try:
        return HANDLERS[cfg.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    raise SystemExit(main())
