"""Causal geometry of flat (1+d)-dimensional spacetime.

Conventions: c = 1, coords[0] is coordinate time, 1 <= d <= 3. Events are
plain float arrays of length 1+d. Causal pasts are closed sets: they include
their null boundary and the apex event itself, so a measurement event belongs
to its own causal past.

Worldlines are piecewise inertial and inextendible. Proper time is zero at
the anchor; the curve is extended before the anchor with the first segment's
velocity (or the final velocity if there are no segments).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError


def event(*coords) -> np.ndarray:
    return np.asarray(coords, dtype=float)


def gamma(velocity) -> float:
    v2 = float(np.dot(velocity, velocity))
    if v2 >= 1.0:
        raise ValueError(f"velocity norm {math.sqrt(v2)} is not subluminal")
    return 1.0 / math.sqrt(1.0 - v2)


def four_velocity(velocity) -> np.ndarray:
    """gamma * (1, v); the tangent per unit proper time."""
    v = np.asarray(velocity, dtype=float)
    return gamma(v) * np.concatenate(([1.0], v))


@dataclass
class Segment:
    dtau: float
    velocity: np.ndarray

    def __post_init__(self):
        self.velocity = np.asarray(self.velocity, dtype=float)
        if not self.dtau > 0:
            raise ValueError(f"segment duration must be positive, got {self.dtau}")
        gamma(self.velocity)  # raises if not subluminal


@dataclass
class Worldline:
    anchor: np.ndarray
    segments: tuple[Segment, ...] = ()
    final_velocity: np.ndarray | None = None

    def __post_init__(self):
        self.anchor = np.asarray(self.anchor, dtype=float)
        self.segments = tuple(self.segments)
        if self.final_velocity is None:
            self.final_velocity = np.zeros(self.anchor.shape[0] - 1)
        self.final_velocity = np.asarray(self.final_velocity, dtype=float)
        gamma(self.final_velocity)

    def spatial_dim(self) -> int:
        return self.anchor.shape[0] - 1


def _pieces(w: Worldline):
    """Inertial pieces as (tau_lo, tau_hi, tau_ref, x_ref, velocity)."""
    first_v = w.segments[0].velocity if w.segments else w.final_velocity
    pieces = [(-math.inf, 0.0, 0.0, w.anchor, first_v)]
    x = w.anchor
    tau = 0.0
    for seg in w.segments:
        pieces.append((tau, tau + seg.dtau, tau, x, seg.velocity))
        x = x + seg.dtau * four_velocity(seg.velocity)
        tau += seg.dtau
    pieces.append((tau, math.inf, tau, x, w.final_velocity))
    return pieces


def position(w: Worldline, tau: float) -> np.ndarray:
    """Event on the worldline at proper time tau."""
    for tau_lo, tau_hi, tau_ref, x_ref, v in _pieces(w):
        if tau_lo <= tau <= tau_hi:
            return x_ref + (tau - tau_ref) * four_velocity(v)
    raise ValueError(f"proper time {tau} not covered; worldline pieces are broken")


def causally_precedes(x, y) -> bool:
    """True iff y is in the closed causal future of x (x itself included)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionMismatchError(f"event dims {x.shape} vs {y.shape}")
    dt = y[0] - x[0]
    return dt >= 0 and dt >= float(np.linalg.norm(y[1:] - x[1:]))


def chronologically_precedes(x, y) -> bool:
    """Strict timelike order: y is in the open interior of x's future cone."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dt = y[0] - x[0]
    return dt > 0 and dt > float(np.linalg.norm(y[1:] - x[1:]))


def _null_gap(w: Worldline, apex, tau: float, past: bool) -> float:
    """Signed distance from the cone: positive while strictly inside the
    past (resp. future) open region, zero on the boundary."""
    p = position(w, tau)
    dt = apex[0] - p[0] if past else p[0] - apex[0]
    return dt - float(np.linalg.norm(apex[1:] - p[1:]))


def _bisect_crossing(w: Worldline, apex, past: bool) -> float:
    # _null_gap is strictly decreasing in tau for the past cone and strictly
    # increasing for the future cone, so one sign change brackets the root.
    sign = 1.0 if past else -1.0
    lo, hi = -1.0, 1.0
    span = 1.0
    while sign * _null_gap(w, apex, lo, past) < 0:
        span *= 2
        lo -= span
    span = 1.0
    while sign * _null_gap(w, apex, hi, past) > 0:
        span *= 2
        hi += span
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sign * _null_gap(w, apex, mid, past) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _quadratic_crossing(w: Worldline, apex, past: bool) -> float | None:
    apex = np.asarray(apex, dtype=float)
    for tau_lo, tau_hi, tau_ref, x_ref, v in _pieces(w):
        g = gamma(v)
        # re-reference the piece to tau = 0 so the root is an absolute tau
        b = apex - x_ref + tau_ref * four_velocity(v)
        m = g * (b[0] - float(np.dot(b[1:], v)))
        c = b[0] * b[0] - float(np.dot(b[1:], b[1:]))
        disc = m * m - c
        if disc < 1e-12:
            # apex on or numerically at this piece's line; try the other
            # pieces, else the caller falls back to bisection
            continue
        root = m - math.sqrt(disc) if past else m + math.sqrt(disc)
        pad = 1e-9 * max(1.0, abs(root))
        if tau_lo - pad <= root <= tau_hi + pad:
            return root
    return None


def lightcone_crossings(w: Worldline, apex) -> tuple[float, float]:
    """Proper times where the worldline meets the past and future lightcones
    of the apex event. Unique for timelike inextendible curves in flat
    spacetime; tau_minus <= tau_plus, equal only when the apex lies on the
    worldline.
    """
    apex = np.asarray(apex, dtype=float)
    tau_minus = _quadratic_crossing(w, apex, past=True)
    if tau_minus is None:
        tau_minus = _bisect_crossing(w, apex, past=True)
    tau_plus = _quadratic_crossing(w, apex, past=False)
    if tau_plus is None:
        tau_plus = _bisect_crossing(w, apex, past=False)
    return tau_minus, tau_plus


@dataclass
class Foliation:
    """Family of spacelike hyperplanes: the leaves of constant time in the
    inertial frame moving at frame_velocity."""

    frame_velocity: np.ndarray

    def __post_init__(self):
        self.frame_velocity = np.asarray(self.frame_velocity, dtype=float)
        gamma(self.frame_velocity)

    def time(self, x) -> float:
        """Leaf parameter of the event: its boosted time coordinate."""
        x = np.asarray(x, dtype=float)
        v = self.frame_velocity
        return gamma(v) * (x[0] - float(np.dot(v, x[1:])))


@dataclass
class PastOfEvent:
    apex: np.ndarray

    def __post_init__(self):
        self.apex = np.asarray(self.apex, dtype=float)

    def contains(self, x) -> bool:
        return causally_precedes(x, self.apex)


@dataclass
class PastOfLeaf:
    foliation: Foliation
    t: float

    def contains(self, x) -> bool:
        return self.foliation.time(x) <= self.t


@dataclass
class Region:
    """Union of causal-past atoms, with explicit everything/nothing markers."""

    atoms: tuple = ()
    all_events: bool = False

    @classmethod
    def everything(cls) -> "Region":
        return cls(atoms=(), all_events=True)

    @classmethod
    def nothing(cls) -> "Region":
        return cls(atoms=())

    @classmethod
    def union_of_pasts(cls, events) -> "Region":
        return cls(atoms=tuple(PastOfEvent(e) for e in events))


def region_contains(r: Region, x) -> bool:
    if r.all_events:
        return True
    return any(atom.contains(x) for atom in r.atoms)


def proper_time_at_leaf(w: Worldline, f: Foliation, t: float) -> float:
    """The unique proper time where the worldline crosses leaf t.

    The leaf parameter along the worldline is piecewise linear in tau with
    strictly positive slope gamma_f * gamma_v * (1 - v_f . v), so the
    crossing is solved in closed form on the piece that brackets it.
    """
    vf = f.frame_velocity
    gf = gamma(vf)
    for tau_lo, tau_hi, tau_ref, x_ref, v in _pieces(w):
        slope = gf * gamma(v) * (1.0 - float(np.dot(vf, v)))
        t_ref = f.time(x_ref)
        tau = tau_ref + (t - t_ref) / slope
        pad = 1e-9 * max(1.0, abs(tau))
        if tau_lo - pad <= tau <= tau_hi + pad:
            return tau
    raise ValueError("leaf crossing not found; worldline pieces are broken")


def boost_event(x, rapidity: float, axis=None) -> np.ndarray:
    """Lorentz boost of an event (or any 4-vector) along a spatial unit axis."""
    x = np.asarray(x, dtype=float)
    d = x.shape[0] - 1
    n = _unit_axis(axis, d)
    ch, sh = math.cosh(rapidity), math.sinh(rapidity)
    xn = float(np.dot(x[1:], n))
    out = x.copy()
    out[0] = ch * x[0] - sh * xn
    out[1:] = x[1:] + ((ch - 1.0) * xn - sh * x[0]) * n
    return out


def _unit_axis(axis, d: int) -> np.ndarray:
    if axis is None:
        n = np.zeros(d)
        n[0] = 1.0
        return n
    n = np.asarray(axis, dtype=float)
    norm = float(np.linalg.norm(n))
    if norm == 0:
        raise ValueError("boost axis must be nonzero")
    return n / norm


def boost_velocity(v, rapidity: float, axis=None) -> np.ndarray:
    u = boost_event(four_velocity(v), rapidity, axis)
    return u[1:] / u[0]


def boost_worldline(w: Worldline, rapidity: float, axis=None) -> Worldline:
    # proper-time durations are invariant, velocities compose relativistically
    return Worldline(
        anchor=boost_event(w.anchor, rapidity, axis),
        segments=tuple(Segment(s.dtau, boost_velocity(s.velocity, rapidity, axis))
                       for s in w.segments),
        final_velocity=boost_velocity(w.final_velocity, rapidity, axis),
    )


def boost_foliation(f: Foliation, rapidity: float, axis=None) -> Foliation:
    return Foliation(boost_velocity(f.frame_velocity, rapidity, axis))


def boost_leaf(f: Foliation, t: float, rapidity: float, axis=None) -> tuple[Foliation, float]:
    """Transform a leaf: new foliation plus the new parameter of the same
    hyperplane, read off a boosted sample point of the old leaf."""
    d = f.frame_velocity.shape[0]
    sample = np.concatenate(([t / gamma(f.frame_velocity)], np.zeros(d)))
    fb = boost_foliation(f, rapidity, axis)
    return fb, fb.time(boost_event(sample, rapidity, axis))


def boost_all(obj, rapidity: float, axis=None):
    """Apply one boost to a geometric value or a container of them."""
    if isinstance(obj, Worldline):
        return boost_worldline(obj, rapidity, axis)
    if isinstance(obj, Foliation):
        return boost_foliation(obj, rapidity, axis)
    if isinstance(obj, np.ndarray):
        return boost_event(obj, rapidity, axis)
    if isinstance(obj, (list, tuple)):
        return type(obj)(boost_all(o, rapidity, axis) for o in obj)
    raise TypeError(f"cannot boost {type(obj).__name__}")
