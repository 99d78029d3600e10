"""Process calculus with fusion prefixes: syntax, normal forms,
reduction."""

from .normal import (
    LinearDecomposition,
    NormalForm,
    StandardForm,
    alpha_equal,
    as_agent,
    canon_agent,
    displayable,
    free_name_occurrences,
    linearize,
    nf_alpha_equal,
    normalize,
    rename_agent,
    rename_all,
    standardize,
    subst_agent_var,
)
from .reduce import CommEvent, FuseEvent, Reduction, reductions, substitutive_effect
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
    ParseError,
    Prefix,
    Rec,
    Scope,
    Sum,
    all_names,
    check_guarded,
    free_agent_vars,
    free_names,
    par,
    parse_process,
    prefix_names,
    pretty,
)

__all__ = [
    "Agent",
    "AgentVar",
    "Branch",
    "CommEvent",
    "Constant",
    "FuseEvent",
    "FusionPrefix",
    "Inaction",
    "InputPrefix",
    "LinearDecomposition",
    "NormalForm",
    "OutputPrefix",
    "Par",
    "ParseError",
    "Prefix",
    "Rec",
    "Reduction",
    "Scope",
    "StandardForm",
    "Sum",
    "all_names",
    "alpha_equal",
    "as_agent",
    "canon_agent",
    "check_guarded",
    "displayable",
    "free_agent_vars",
    "free_name_occurrences",
    "free_names",
    "linearize",
    "nf_alpha_equal",
    "normalize",
    "par",
    "parse_process",
    "prefix_names",
    "pretty",
    "reductions",
    "rename_agent",
    "rename_all",
    "standardize",
    "subst_agent_var",
    "substitutive_effect",
]
