"""Independent brute-force verifiers for the closed forms.

Three cross-checks, deliberately avoiding the formulas they test: panel
trapezoidal quadrature over the queuing diagram (with panels aligned to
the curve's breakpoints so kinks never sit inside a panel), Monte Carlo
capacity estimation from sampled vehicle sequences, and central finite
differences for derivatives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .capacity import VehicleParams, cav_time_gap
from .delay import (
    ApproachDemand,
    HdvStartupParams,
    SignalTiming,
    cumulative_departures_cav,
    cumulative_departures_hdv,
    delay_cav,
    delay_hdv,
    queue_clear_time_cav,
    queue_clear_time_hdv,
)
from .errors import EarlyClearanceError, OverCapacityError
from .markov import MarkovSpec, sample_sequence

__all__ = [
    "KIND_CAV",
    "KIND_HDV",
    "DepartureCurveSpec",
    "IntegrationReport",
    "numeric_delay",
    "monte_carlo_capacity",
    "finite_difference",
]

KIND_CAV = "cav-led"
KIND_HDV = "hdv-led"

_REL_ERR_FLOOR = 1e-12

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class DepartureCurveSpec:
    """One departure curve: leader kind plus the geometry that shapes it."""

    kind: str
    red: float
    capacity: float
    reaction_time: float = 0.0
    accel_time: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in (KIND_CAV, KIND_HDV):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.capacity <= 0.0:
            raise ValueError("capacity must be positive")
        if self.red < 0.0 or self.reaction_time < 0.0 or self.accel_time < 0.0:
            raise ValueError("times cannot be negative")

    @property
    def service_start(self) -> float:
        if self.kind == KIND_CAV:
            return self.red
        return self.red + self.reaction_time

    def breakpoints(self) -> list[float]:
        """Interior kink locations of the piecewise curve."""
        if self.kind == KIND_CAV:
            return [self.red]
        return [
            self.red,
            self.red + self.reaction_time,
            self.red + self.reaction_time + self.accel_time,
        ]

    def cumulative(self, t):
        if self.kind == KIND_CAV:
            return cumulative_departures_cav(t, self.red, self.capacity)
        startup = HdvStartupParams(self.reaction_time, self.accel_time)
        return cumulative_departures_hdv(t, self.red, startup, self.capacity)


@dataclass(frozen=True)
class IntegrationReport:
    """Numeric delay next to its closed-form counterpart (NaN outside regime)."""

    numeric_delay: float
    step: float
    closed_form_delay: float
    relative_error: float


def _crossing_time(q: ApproachDemand, curve: DepartureCurveSpec) -> float:
    """First time the departure curve overtakes the arrival line.

    Found by doubling then bisection; the gap q*t - N(t) is concave past
    the service start, so the downward crossing is unique.
    """
    qr = q.arrival_rate
    lo = curve.service_start

    def gap(t: float) -> float:
        return qr * t - float(curve.cumulative(t))

    hi = lo + max(1.0, lo)
    for _ in range(200):
        if gap(hi) <= 0.0:
            break
        hi *= 2.0
    else:
        raise OverCapacityError("departure curve never overtakes arrivals")
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _closed_form_total(q: ApproachDemand, curve: DepartureCurveSpec) -> float:
    """Closed-form total delay for the same geometry, NaN outside its regime.

    A synthetic green long enough to clear the queue is used so that the
    comparison isolates the delay formula from the saturation check.
    """
    try:
        if curve.kind == KIND_CAV:
            green = 1.0
            if q.arrival_rate > 0.0:
                green += queue_clear_time_cav(q, curve.red, curve.capacity)
            timing = SignalTiming.from_green(curve.red + green, green)
            return delay_cav(q, timing, curve.capacity).total_delay
        startup = HdvStartupParams(curve.reaction_time, curve.accel_time)
        green = (
            curve.reaction_time
            + curve.accel_time
            + queue_clear_time_hdv(q, curve.red, startup, curve.capacity)
            + 1.0
        )
        timing = SignalTiming.from_green(curve.red + green, green)
        return delay_hdv(q, timing, startup, curve.capacity).total_delay
    except (EarlyClearanceError, OverCapacityError):
        return math.nan


def numeric_delay(
    q: ApproachDemand, curve: DepartureCurveSpec, step: float
) -> IntegrationReport:
    """Trapezoidal area between arrivals and departures up to queue clearance.

    Panels are split at the curve's breakpoints, so only the quadratic ramp
    carries discretization error and halving the step divides it by about
    four.  The positive part of the gap is integrated, which also yields a
    well-defined value for early-clearance inputs the closed form refuses.
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    qr = q.arrival_rate
    if curve.capacity <= qr:
        raise OverCapacityError(
            f"arrival rate {qr:g} veh/s meets or exceeds capacity "
            f"{curve.capacity:g} veh/s"
        )

    if qr == 0.0:
        numeric = 0.0
    else:
        t_end = _crossing_time(q, curve)
        edges = [0.0]
        edges += [b for b in curve.breakpoints() if 0.0 < b < t_end]
        edges.append(t_end)
        numeric = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            panels = max(1, math.ceil((b - a) / step))
            ts = np.linspace(a, b, panels + 1)
            values = np.maximum(0.0, qr * ts - curve.cumulative(ts))
            numeric += float(_trapezoid(values, ts))

    closed = _closed_form_total(q, curve)
    if math.isnan(closed):
        rel = math.nan
    else:
        rel = abs(numeric - closed) / max(abs(closed), _REL_ERR_FLOOR)
    return IntegrationReport(
        numeric_delay=numeric,
        step=step,
        closed_form_delay=closed,
        relative_error=rel,
    )


def monte_carlo_capacity(
    spec: MarkovSpec, params: VehicleParams, count: int, seed: int
) -> float:
    """Empirical capacity from a sampled vehicle sequence.

    Each sampled state contributes its desired gap (tau_hdv at state 0,
    the CAV bound otherwise); the estimate is
    count / (sum of gaps + count * L / v_free).  Reproducible per seed.
    """
    seq = sample_sequence(spec, count, seed)
    gaps = np.empty(spec.n + 1)
    gaps[0] = params.tau_hdv
    for i in range(1, spec.n + 1):
        gaps[i] = cav_time_gap(i, params)
    total_gap = float(gaps[seq.states].sum())
    return count / (total_gap + count * params.length_headway)


def finite_difference(f: Callable[[float], float], x: float, h: float) -> float:
    """Central difference (f(x + h) - f(x - h)) / (2 h); exact on quadratics."""
    if h <= 0.0:
        raise ValueError("h must be positive")
    return (f(x + h) - f(x - h)) / (2.0 * h)
