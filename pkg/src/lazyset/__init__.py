"""Lazy Set: simulators, axiom checker, reduct, threaded set and oracle."""

from .axiom_checker import (ArrowRelation, CycleError, Event, ExecutionStructure, Linearization, MissingGamma,
                            build_arrow, check_a0, check_a1, check_a2, check_axioms, detect_cycle, linearize)
from .core import F, Kind, Verdict
from .linear_spec import (EventRecord, check_functional_mode, check_state_mode, derive_gamma, derive_states,
                          step_state)
from .oracle import OracleVerdict, TooLarge, brute_force

__all__ = [
    "ArrowRelation", "CycleError", "Event", "EventRecord", "ExecutionStructure", "F", "Kind", "Linearization",
    "MissingGamma", "OracleVerdict", "TooLarge", "Verdict", "brute_force", "build_arrow", "check_a0", "check_a1",
    "check_a2", "check_axioms", "check_functional_mode", "check_state_mode", "derive_gamma", "derive_states",
    "detect_cycle", "linearize", "step_state",
]
