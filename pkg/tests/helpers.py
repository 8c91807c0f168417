"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import numpy as np

import polystate
from polystate.scenario import Intervention, Scenario, SelectiveOp, UnitaryOp, parse_scenario
from polystate.spacetime import Segment, Worldline, causally_precedes, position

FIXTURES = Path(polystate.__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def load_fixture(name: str) -> Scenario:
    return parse_scenario(fixture_text(name))


def random_ket(rng, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(rng, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_projective_kraus(rng, dim: int) -> tuple:
    u = random_unitary(rng, dim)
    return tuple(np.outer(u[:, k], u[:, k].conj()) for k in range(dim))


def random_velocity(rng, d: int, v_max: float = 0.85) -> np.ndarray:
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)
    return direction * rng.uniform(0.0, v_max)


def random_worldline(rng, d: int, max_segments: int = 2) -> Worldline:
    anchor = np.concatenate([[rng.uniform(-2, 2)], rng.uniform(-3, 3, size=d)])
    segments = tuple(
        Segment(float(rng.uniform(0.3, 2.0)), random_velocity(rng, d))
        for _ in range(rng.integers(0, max_segments + 1))
    )
    return Worldline(anchor, segments, random_velocity(rng, d))


def random_two_qubit_scenario(rng, d: int = 1, n_interventions: int | None = None) -> Scenario:
    """Random bipartite qubit scenario with projective measurements and the
    occasional unitary; recorded outcomes are uniform placeholders."""
    if n_interventions is None:
        n_interventions = int(rng.integers(1, 4))
    worldlines = (random_worldline(rng, d), random_worldline(rng, d))
    ket = random_ket(rng, 4)
    interventions = []
    for _ in range(n_interventions):
        subsystem = int(rng.integers(0, 2))
        tau = float(rng.uniform(-2.0, 3.0))
        while any(iv.subsystem == subsystem and abs(iv.tau - tau) < 1e-6 for iv in interventions):
            tau = float(rng.uniform(-2.0, 3.0))
        if rng.uniform() < 0.25:
            op = UnitaryOp(matrix=random_unitary(rng, 2))
        else:
            op = SelectiveOp(kraus=random_projective_kraus(rng, 2),
                             chosen=int(rng.integers(0, 2)), labels=("+1", "-1"))
        interventions.append(Intervention(subsystem=subsystem, tau=tau, op=op))
    return Scenario(
        spatial_dim=d,
        names=("A", "B"),
        dims=(2, 2),
        worldlines=worldlines,
        initial_state=np.outer(ket, ket.conj()),
        interventions=tuple(interventions),
    )


def with_outcomes(s: Scenario, assignment) -> Scenario:
    """Scenario with the selective outcomes replaced, in (tau, subsystem)
    order of the selective interventions."""
    order = sorted((k for k, iv in enumerate(s.interventions)
                    if isinstance(iv.op, SelectiveOp)),
                   key=lambda k: (s.interventions[k].tau, s.interventions[k].subsystem))
    new = list(s.interventions)
    for j, k in enumerate(order):
        iv = new[k]
        new[k] = Intervention(iv.subsystem, iv.tau, replace(iv.op, chosen=int(assignment[j])))
    return replace(s, interventions=tuple(new))


def crossing_oracle(w: Worldline, apex, past: bool, lo=-300.0, hi=300.0) -> float:
    """Boundary of {tau : the worldline point is causally related to apex},
    found by plain bisection on the membership predicate. Independent of the
    quadratic solver under test."""
    apex = np.asarray(apex, dtype=float)

    def inside(tau: float) -> bool:
        x = position(w, tau)
        return causally_precedes(x, apex) if past else causally_precedes(apex, x)

    if past:
        in_tau, out_tau = lo, hi
    else:
        in_tau, out_tau = hi, lo
    assert inside(in_tau) and not inside(out_tau)
    for _ in range(200):
        mid = 0.5 * (in_tau + out_tau)
        if inside(mid):
            in_tau = mid
        else:
            out_tau = mid
    return 0.5 * (in_tau + out_tau)
