"""Proof-tree engine."""

from .measure import Measure, Weigher, measure, multiset_compare, weight
from .prover import (
    DEFAULT_MAX_NODES,
    BackendUnsupported,
    ProofNode,
    ProofResult,
    ProofTree,
    ResourceLimit,
    Sat,
    Unsat,
    find_loop,
    is_layer,
    prove,
    start,
)
from .rules import Context, History, Options, RuleInstance, applicable_rule, apply_rule
from .subsumption import find_renaming, subsumes

__all__ = [
    "DEFAULT_MAX_NODES",
    "BackendUnsupported",
    "Context",
    "History",
    "Measure",
    "Options",
    "ProofNode",
    "ProofResult",
    "ProofTree",
    "ResourceLimit",
    "RuleInstance",
    "Sat",
    "Unsat",
    "Weigher",
    "applicable_rule",
    "apply_rule",
    "find_loop",
    "find_renaming",
    "is_layer",
    "measure",
    "multiset_compare",
    "prove",
    "start",
    "subsumes",
    "weight",
]
