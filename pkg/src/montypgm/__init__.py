"""Exact inference for small discrete decision networks, built around Monty Hall."""

from .inference import (
    Distribution,
    WeightedOutcome,
    enumerate_outcomes,
    joint_probability,
    marginal,
    odds_ratio,
    win_probability,
)
from .model import (
    Cpt,
    InconsistentEvidenceError,
    MontyError,
    Network,
    Rational,
    StructureError,
    UsageError,
    Variable,
    VariableKind,
    row_lookup,
    topological_order,
    validate_network,
)
from .modelfmt import ModelParseError, parse_model, serialize
from .monty import MontyConfig, Policy, build_monty, closed_form_win

__version__ = "0.1.0"
