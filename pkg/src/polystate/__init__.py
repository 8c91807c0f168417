"""Selective measurement updates for qubits on relativistic worldlines.

A scenario fixes worldlines, an initial joint state, and a list of
interventions pinned to proper times. The engine answers "what is the state
of subsystems I, given the proper times of everyone in I" by applying
exactly the interventions inside the union of their causal pasts, then
tracing out the rest. Auditing tools compare that prescription against
lightcone- and foliation-based rivals, and the ensemble module checks it
against post-selected Monte Carlo statistics.
"""

from .engine import (Polystate, all_subsets, expect_individual, expect_joint,
                     foliation_state, observer_state, polystate_at, recollection, sector)
from .errors import (BranchExplosionError, DimensionMismatchError, EmptyEnsembleError,
                     ImpossibleOutcomeError, ParseError, PolystateError,
                     ScenarioValidationError, StateValidationError)
from .scenario import (Intervention, Scenario, SelectiveOp, UnitaryOp, parse_scenario,
                       serialize_scenario, validate)
from .spacetime import Foliation, Segment, Worldline, lightcone_crossings, position

__version__ = "0.1.0"

__all__ = [
    "BranchExplosionError",
    "DimensionMismatchError",
    "EmptyEnsembleError",
    "Foliation",
    "ImpossibleOutcomeError",
    "Intervention",
    "ParseError",
    "Polystate",
    "PolystateError",
    "Scenario",
    "ScenarioValidationError",
    "Segment",
    "SelectiveOp",
    "StateValidationError",
    "UnitaryOp",
    "Worldline",
    "all_subsets",
    "expect_individual",
    "expect_joint",
    "foliation_state",
    "lightcone_crossings",
    "observer_state",
    "parse_scenario",
    "polystate_at",
    "position",
    "recollection",
    "sector",
    "serialize_scenario",
    "validate",
]
