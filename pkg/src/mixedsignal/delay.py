"""Closed-form per-approach delay under constant arrivals.

Deterministic queuing geometry: cumulative arrivals follow the line
``q * t`` while the departure curve depends on who leads the standing
platoon.  A CAV leader discharges at the saturation rate the moment the
red ends.  An HDV leader first sits through a reaction time, then ramps up
quadratically over an acceleration interval before reaching the saturation
rate.  Total delay per cycle is the area between the two curves, which
integrates in closed form; dividing by the arrivals over one cycle gives
the per-vehicle figure, and leader-type outcomes mix by total probability.

Only under-saturated cycles are covered: the queue must clear within the
green and, for HDV leaders, must survive the acceleration ramp.  Inputs
outside that regime raise typed errors rather than extrapolating a formula
beyond its geometry.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .capacity import Capacity
from .errors import EarlyClearanceError, OverCapacityError, SaturationError

__all__ = [
    "SignalTiming",
    "ApproachDemand",
    "HdvStartupParams",
    "DelayResult",
    "DelayBreakdown",
    "ExpectedDelay",
    "queue_clear_time_cav",
    "queue_clear_time_hdv",
    "cumulative_departures_cav",
    "cumulative_departures_hdv",
    "delay_cav",
    "delay_hdv",
    "expected_delay",
    "cav_delay_breakdown",
    "hdv_delay_breakdown",
]


@dataclass(frozen=True)
class SignalTiming:
    """Effective red/green split of one cycle: R + G = C, lambda = G / C."""

    cycle: float
    green: float
    red: float
    green_ratio: float

    def __post_init__(self) -> None:
        if self.cycle <= 0.0:
            raise ValueError("cycle length must be positive")
        if self.green <= 0.0:
            raise ValueError("effective green must be positive")
        if self.red < 0.0:
            raise ValueError("effective red cannot be negative")
        if abs(self.red + self.green - self.cycle) > 1e-9:
            raise ValueError("red + green must equal the cycle length")
        if abs(self.green_ratio - self.green / self.cycle) > 1e-12:
            raise ValueError("green_ratio must equal green / cycle")

    @classmethod
    def from_green(cls, cycle: float, green: float) -> "SignalTiming":
        return cls(cycle=cycle, green=green, red=cycle - green, green_ratio=green / cycle)

    @classmethod
    def from_ratio(cls, cycle: float, green_ratio: float) -> "SignalTiming":
        green = green_ratio * cycle
        return cls(cycle=cycle, green=green, red=cycle - green, green_ratio=green_ratio)


@dataclass(frozen=True)
class ApproachDemand:
    """Constant arrival rate (veh/s) on one approach."""

    arrival_rate: float

    def __post_init__(self) -> None:
        if self.arrival_rate < 0.0:
            raise ValueError("arrival rate cannot be negative")


@dataclass(frozen=True)
class HdvStartupParams:
    """HDV leader start-up behavior: reaction time and acceleration duration.

    ``accel_time = 0`` is the analytic limit in which the ramp collapses and
    the HDV curve reduces to the CAV one shifted by the reaction time; the
    piecewise departure curve handles it explicitly.
    """

    reaction_time: float = 2.0
    accel_time: float = 3.0

    def __post_init__(self) -> None:
        if self.reaction_time < 0.0:
            raise ValueError("reaction time cannot be negative")
        if self.accel_time < 0.0:
            raise ValueError("acceleration time cannot be negative")


@dataclass(frozen=True)
class DelayResult:
    """Per-cycle delay for one leader type.

    total_delay is veh*s per cycle; avg_delay divides by the cycle's
    arrivals n_total = q * (R + G).  queue_clear_time is measured from the
    start of saturation-rate discharge.  n1/n2 are the HDV bookkeeping
    counts (vehicles served during the ramp, cumulative vehicles at
    clearance); they stay None for CAV leaders.
    """

    total_delay: float
    avg_delay: float
    queue_clear_time: float
    n_total: float
    n1: float | None = None
    n2: float | None = None
    saturated: bool = False


@dataclass(frozen=True)
class DelayBreakdown:
    """Areas making up one leader type's delay: D = arrival - departures."""

    arrival_area: float
    departure_area_accel: float = 0.0
    departure_area_free: float = 0.0
    cav_departure_area: float = 0.0


@dataclass(frozen=True)
class ExpectedDelay:
    """Leader-type mixture of per-cycle totals and per-vehicle averages."""

    total: float
    avg: float


def _rate(c: Capacity | float) -> float:
    return c.value if isinstance(c, Capacity) else float(c)


def queue_clear_time_cav(q: ApproachDemand, red: float, c: Capacity | float) -> float:
    """Time after the green starts until a CAV-led queue dissipates.

    t_d = q * R / (c - q); requires under-saturation c > q.
    """
    rate = _rate(c)
    if rate <= q.arrival_rate:
        raise OverCapacityError(
            f"arrival rate {q.arrival_rate:g} veh/s meets or exceeds "
            f"capacity {rate:g} veh/s"
        )
    return q.arrival_rate * red / (rate - q.arrival_rate)


def queue_clear_time_hdv(
    q: ApproachDemand, red: float, startup: HdvStartupParams, c: Capacity | float
) -> float:
    """Time after the acceleration ramp until an HDV-led queue dissipates.

    t_d' = (q * (R + T_r + T_a) - c * T_a / 2) / (c - q).  The formula only
    describes queues that survive the ramp; if the ramp alone would serve
    the backlog the closed form is invalid and EarlyClearanceError is
    raised instead of returning a negative time.
    """
    rate = _rate(c)
    if rate <= q.arrival_rate:
        raise OverCapacityError(
            f"arrival rate {q.arrival_rate:g} veh/s meets or exceeds "
            f"capacity {rate:g} veh/s"
        )
    queued = q.arrival_rate * (red + startup.reaction_time + startup.accel_time)
    ramp_served = rate * startup.accel_time / 2.0
    if queued < ramp_served:
        raise EarlyClearanceError(
            f"queue dissolves during acceleration "
            f"({queued:g} veh queued vs {ramp_served:g} veh served by the ramp)"
        )
    return (queued - ramp_served) / (rate - q.arrival_rate)


def cumulative_departures_cav(t, red: float, c: Capacity | float):
    """Service line of a CAV-led platoon: rate ``c`` once the red ends.

    Accepts scalars or arrays.  This is the service capability, not clipped
    by arrivals; integrate it only up to queue clearance.
    """
    rate = _rate(c)
    t = np.asarray(t, dtype=float)
    out = np.maximum(0.0, rate * (t - red))
    return out if out.ndim else float(out)


def cumulative_departures_hdv(
    t, red: float, startup: HdvStartupParams, c: Capacity | float
):
    """Piecewise cumulative departures of an HDV-led platoon.

    Zero through red + reaction, the quadratic ramp
    (c / 2 T_a) * (t - R - T_r)^2 during acceleration, then the saturation
    line c * t - c * (T_a / 2 + R + T_r).  Continuous and non-decreasing;
    accepts scalars or arrays.
    """
    rate = _rate(c)
    t = np.asarray(t, dtype=float)
    start = red + startup.reaction_time
    ta = startup.accel_time
    line = rate * (t - start - ta / 2.0)
    if ta > 0.0:
        ramp = (rate / (2.0 * ta)) * np.square(np.clip(t - start, 0.0, ta))
        out = np.where(t <= start + ta, ramp, line)
    else:
        out = line
    out = np.where(t <= start, 0.0, out)
    return out if out.ndim else float(out)


def delay_cav(
    q: ApproachDemand, timing: SignalTiming, c: Capacity | float
) -> DelayResult:
    """Closed-form delay of a CAV-led cycle: D = c q R^2 / (2 (c - q)).

    Requires the queue to clear within the green (t_d <= G, boundary
    accepted); otherwise SaturationError is raised.
    """
    rate = _rate(c)
    n_total = q.arrival_rate * timing.cycle
    if q.arrival_rate == 0.0:
        return DelayResult(0.0, 0.0, 0.0, n_total)
    t_d = queue_clear_time_cav(q, timing.red, rate)
    if t_d > timing.green:
        raise SaturationError(
            f"CAV-led queue needs {t_d:.3f} s of green but only "
            f"{timing.green:.3f} s is available"
        )
    total = rate * q.arrival_rate * timing.red**2 / (2.0 * (rate - q.arrival_rate))
    return DelayResult(
        total_delay=total,
        avg_delay=total / n_total,
        queue_clear_time=t_d,
        n_total=n_total,
    )


def delay_hdv(
    q: ApproachDemand,
    timing: SignalTiming,
    startup: HdvStartupParams,
    c: Capacity | float,
) -> DelayResult:
    """Closed-form delay of an HDV-led cycle.

    With T_end = R + T_r + T_a + t_d', the arrival triangle minus the ramp
    and saturation-line areas gives
    D = q T_end^2 / 2 - (c / 2) t_d' (T_a + t_d') - c T_a^2 / 6.
    Requires T_r + T_a + t_d' <= G (boundary accepted) and a queue that
    survives the ramp.
    """
    rate = _rate(c)
    n_total = q.arrival_rate * timing.cycle
    t_dp = queue_clear_time_hdv(q, timing.red, startup, rate)
    used_green = startup.reaction_time + startup.accel_time + t_dp
    if used_green > timing.green:
        raise SaturationError(
            f"HDV-led queue needs {used_green:.3f} s of green but only "
            f"{timing.green:.3f} s is available"
        )
    ta = startup.accel_time
    t_end = timing.red + startup.reaction_time + ta + t_dp
    total = (
        0.5 * q.arrival_rate * t_end**2
        - 0.5 * rate * t_dp * (ta + t_dp)
        - rate * ta**2 / 6.0
    )
    return DelayResult(
        total_delay=total,
        avg_delay=total / n_total if n_total > 0.0 else 0.0,
        queue_clear_time=t_dp,
        n_total=n_total,
        n1=rate * ta / 2.0,
        n2=q.arrival_rate * t_end,
    )


def expected_delay(p: float, cav: DelayResult, hdv: DelayResult) -> ExpectedDelay:
    """Mix whole-cycle outcomes by the leader-type probability ``p``.

    Both results must come from the same demand, timing, and capacity.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"penetration rate must lie in [0, 1], got {p}")
    return ExpectedDelay(
        total=(1.0 - p) * hdv.total_delay + p * cav.total_delay,
        avg=(1.0 - p) * hdv.avg_delay + p * cav.avg_delay,
    )


def cav_delay_breakdown(
    q: ApproachDemand, timing: SignalTiming, c: Capacity | float
) -> DelayBreakdown:
    """Arrival triangle and service triangle behind the CAV delay."""
    rate = _rate(c)
    if q.arrival_rate == 0.0:
        return DelayBreakdown(arrival_area=0.0)
    t_d = queue_clear_time_cav(q, timing.red, rate)
    return DelayBreakdown(
        arrival_area=0.5 * q.arrival_rate * (timing.red + t_d) ** 2,
        cav_departure_area=0.5 * rate * t_d**2,
    )


def hdv_delay_breakdown(
    q: ApproachDemand,
    timing: SignalTiming,
    startup: HdvStartupParams,
    c: Capacity | float,
) -> DelayBreakdown:
    """Arrival triangle, ramp parabola (c T_a^2 / 6), and saturation-line area."""
    rate = _rate(c)
    t_dp = queue_clear_time_hdv(q, timing.red, startup, rate)
    ta = startup.accel_time
    t_end = timing.red + startup.reaction_time + ta + t_dp
    return DelayBreakdown(
        arrival_area=0.5 * q.arrival_rate * t_end**2,
        departure_area_accel=rate * ta**2 / 6.0,
        departure_area_free=0.5 * rate * t_dp * (ta + t_dp),
    )
