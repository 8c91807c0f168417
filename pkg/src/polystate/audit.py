"""Rival single-density-operator update prescriptions and the audits that
separate them from the sector-based description.

Each prescription answers one question: standing at an evaluation event x,
which interventions have already been folded into "the state"? The future
lightcone rule folds an intervention only once x is in its causal future.
The past lightcone rule (the Hellwig-Kraus reading) folds it everywhere
except strictly inside the intervention's own causal past, boundary
included. A fixed foliation folds it once the intervention's leaf lies at
or below the leaf through x. The sector rule delegates to the engine.

When the two parties' evaluation events disagree about what has been folded
in, no single joint operator exists; `single_state` then returns the
patchwork product of the per-event reduced states, which is exactly the
object a single-state bookkeeper would be forced to write down.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import engine, linalg
from .scenario import Intervention, Scenario, SelectiveOp, apply_interventions, intervention_event
from .spacetime import (Foliation, Worldline, causally_precedes,
                        chronologically_precedes, position, proper_time_at_leaf)

MATCH_TOL = 1e-9


@dataclass
class PastLightcone:
    """Retrodictive rule: an event is updated by every intervention not
    strictly in its future, so spacelike separated readouts update each
    other. Those mutual updates are folded in per-subsystem proper-time
    order; no frame-independent order exists, so that is a modeling choice
    for this rule."""
    name = "past_lightcone"


@dataclass
class FutureLightcone:
    """An event is updated only by interventions in its causal past."""
    name = "future_lightcone"


@dataclass
class FixedFoliation:
    """Updates happen at the leaf containing the intervention, for every
    observer at once, regardless of their location."""
    foliation: Foliation
    name = "foliation"


@dataclass
class PolystateRule:
    """The subset-dependent sector rule implemented by the engine."""
    name = "polystate"


def _applied(p, event_of_intervention, x_eval) -> bool:
    if isinstance(p, FutureLightcone):
        return causally_precedes(event_of_intervention, x_eval)
    if isinstance(p, PastLightcone):
        # updated everywhere outside the strict causal past; the boundary
        # counts as updated
        return not chronologically_precedes(x_eval, event_of_intervention)
    if isinstance(p, FixedFoliation):
        f = p.foliation
        return f.time(event_of_intervention) <= f.time(x_eval)
    raise TypeError(f"no event rule for {type(p).__name__}")


def _applied_ids(p, s: Scenario, x_eval):
    return tuple(k for k in range(len(s.interventions))
                 if _applied(p, intervention_event(s, k), x_eval))


def _state_at_event(p, s: Scenario, x_eval) -> np.ndarray:
    ids = _applied_ids(p, s, x_eval)
    return linalg.normalize(apply_interventions(s, ids, s.initial_state))


def single_state(p, s: Scenario, taus) -> np.ndarray:
    """The prescription's one density operator for the whole system at the
    given proper times. If every evaluation event agrees on the applied
    interventions this is one well-defined state; otherwise it degrades to
    the tensor product of the per-event reduced states."""
    if isinstance(p, PolystateRule):
        return engine.sector(s, taus, range(s.n))
    events = [position(s.worldlines[i], taus[i]) for i in range(s.n)]
    id_sets = [_applied_ids(p, s, x) for x in events]
    if all(ids == id_sets[0] for ids in id_sets):
        return linalg.normalize(apply_interventions(s, id_sets[0], s.initial_state))
    parts = [linalg.ptrace(_state_at_event(p, s, events[i]), s.dims, (i,))
             for i in range(s.n)]
    return linalg.check_density(linalg.kron_all(*parts))


def reduced_states(p, s: Scenario, taus) -> list:
    """Per-subsystem local descriptions under the prescription."""
    if isinstance(p, PolystateRule):
        return [engine.sector(s, taus, (i,)) for i in range(s.n)]
    return [linalg.ptrace(_state_at_event(p, s, position(s.worldlines[i], taus[i])), s.dims, (i,))
            for i in range(s.n)]


def _flip_outcomes(s: Scenario, subsystem: int) -> Scenario:
    """Variant scenario with every recorded outcome on one subsystem moved
    to the next branch; used for the outcome-independence check."""
    flipped = []
    for iv in s.interventions:
        if iv.subsystem == subsystem and isinstance(iv.op, SelectiveOp):
            op = replace(iv.op, chosen=(iv.op.chosen + 1) % len(iv.op.kraus))
            flipped.append(Intervention(iv.subsystem, iv.tau, op))
        else:
            flipped.append(iv)
    return replace(s, interventions=tuple(flipped))


@dataclass
class PrescriptionRow:
    name: str
    marginal_a: float
    marginal_b: float
    correlation: float
    marginal_a_ok: bool
    marginal_b_ok: bool
    correlation_ok: bool
    ignorance_distance: float
    ignorance_ok: bool

    @property
    def all_ok(self) -> bool:
        return (self.marginal_a_ok and self.marginal_b_ok
                and self.correlation_ok and self.ignorance_ok)


@dataclass
class CriteriaReport:
    taus: tuple
    target_marginal_a: float
    target_marginal_b: float
    target_correlation: float
    rows: list


def default_prescriptions(foliation: Foliation | None = None):
    f = foliation if foliation is not None else Foliation(np.zeros(1))
    return [PolystateRule(), FutureLightcone(), PastLightcone(), FixedFoliation(f)]


def criteria_report(s: Scenario, taus, foliation: Foliation | None = None) -> CriteriaReport:
    """Score every prescription on a bipartite qubit scenario.

    Targets are the sector values: subsystem marginals of sigma_z from the
    singleton sectors and the joint sigma_z correlation from the pair
    sector. A prescription passes a cell when it reproduces the target
    within 1e-9; the ignorance cell asks that the second subsystem's local
    description not change when the first subsystem's recorded outcomes are
    flipped.
    """
    if s.n != 2 or any(d != 2 for d in s.dims):
        raise ValueError("criteria report is defined for two-qubit scenarios")
    if foliation is None:
        foliation = Foliation(np.zeros(s.spatial_dim))
    sz = linalg.SIGMA_Z
    szz = linalg.kron(sz, sz)
    target_a = linalg.expect(engine.sector(s, taus, (0,)), sz)
    target_b = linalg.expect(engine.sector(s, taus, (1,)), sz)
    target_c = linalg.expect(engine.sector(s, taus, (0, 1)), szz)

    flipped = _flip_outcomes(s, 0)
    rows = []
    for p in default_prescriptions(foliation):
        locals_ = reduced_states(p, s, taus)
        joint = single_state(p, s, taus)
        ma = linalg.expect(locals_[0], sz)
        mb = linalg.expect(locals_[1], sz)
        corr = linalg.expect(joint, szz)
        ign = linalg.trace_distance(locals_[1], reduced_states(p, flipped, taus)[1])
        rows.append(PrescriptionRow(
            name=p.name,
            marginal_a=ma, marginal_b=mb, correlation=corr,
            marginal_a_ok=abs(ma - target_a) <= MATCH_TOL,
            marginal_b_ok=abs(mb - target_b) <= MATCH_TOL,
            correlation_ok=abs(corr - target_c) <= MATCH_TOL,
            ignorance_distance=ign,
            ignorance_ok=ign <= MATCH_TOL,
        ))
    return CriteriaReport(
        taus=tuple(taus),
        target_marginal_a=target_a,
        target_marginal_b=target_b,
        target_correlation=target_c,
        rows=rows,
    )


@dataclass
class ChargeLedger:
    t_grid: list
    q_joint: list
    q_sum: list
    initial: float


def charge_ledger(s: Scenario, f: Foliation, t_grid, source) -> ChargeLedger:
    """Total-charge bookkeeping along a foliation under one prescription:
    the joint expectation versus the sum of per-subsystem local charges."""
    if any(d != 2 for d in s.dims):
        raise ValueError("charge ledger is defined for qubit scenarios")
    q_total = linalg.total_charge(s.n)
    q_local = linalg.CHARGE
    initial = linalg.expect(s.initial_state, q_total)
    q_joint, q_sum = [], []
    for t in t_grid:
        taus = [proper_time_at_leaf(s.worldlines[i], f, t) for i in range(s.n)]
        q_joint.append(linalg.expect(single_state(source, s, taus), q_total))
        q_sum.append(sum(linalg.expect(r, q_local) for r in reduced_states(source, s, taus)))
    return ChargeLedger(t_grid=list(t_grid), q_joint=q_joint, q_sum=q_sum, initial=initial)


@dataclass
class ConservationReport:
    initial: float
    values: list
    max_deviation: float


def recollection_conservation(s: Scenario, z: Worldline, t_grid, f: Foliation) -> ConservationReport:
    """Total charge in the recollection along a worldline, sampled where the
    worldline crosses each leaf; reports the largest deviation from the
    initial value. Deviations are findings, not errors."""
    if any(d != 2 for d in s.dims):
        raise ValueError("charge audits are defined for qubit scenarios")
    q_total = linalg.total_charge(s.n)
    initial = linalg.expect(s.initial_state, q_total)
    values = []
    for t in t_grid:
        tau = proper_time_at_leaf(z, f, t)
        values.append(linalg.expect(engine.recollection(s, z, tau), q_total))
    max_dev = max((abs(v - initial) for v in values), default=0.0)
    return ConservationReport(initial=initial, values=values, max_deviation=max_dev)
