"""Composition-dependent time gaps and long-run mixed-traffic capacity.

A vehicle's desired time gap depends on who it follows: an HDV keeps the
fixed gap ``tau_hdv``, while a CAV in a run of ``i`` communicating
predecessors may shrink its gap down to the string-stability bound
``4 * omega_v / (omega_e * (1 + i))``, floored at ``tau_safe``.  Weighting
the gaps by the stationary composition law gives the expected gap, and
capacity is its reciprocal once the vehicle body's travel time is added.
All rates are veh/sec throughout; callers may convert to veh/h for display.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .markov import MarkovSpec, steady_state_closed_form

__all__ = [
    "VehicleParams",
    "Capacity",
    "cav_time_gap",
    "expected_time_gap",
    "mixed_capacity",
]


@dataclass(frozen=True)
class VehicleParams:
    """Car-following and geometry constants.

    Defaults are the reference setup used across this package:
    omega_e = 1.2 1/s^2, omega_v = 0.5 1/s, tau_safe = 0.3 s,
    tau_hdv = 1.5 s, vehicle_length = 5 m, v_free = 15 m/s.
    """

    omega_e: float = 1.2
    omega_v: float = 0.5
    tau_safe: float = 0.3
    tau_hdv: float = 1.5
    vehicle_length: float = 5.0
    v_free: float = 15.0

    def __post_init__(self) -> None:
        for name in ("omega_e", "tau_safe", "tau_hdv", "vehicle_length", "v_free"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        # omega_v = 0 is allowed: the stability bound vanishes and tau_safe binds.
        if self.omega_v < 0.0:
            raise ValueError("omega_v must be non-negative")

    @property
    def length_headway(self) -> float:
        """Travel-time share of the vehicle body, L / v_free (seconds)."""
        return self.vehicle_length / self.v_free


@dataclass(frozen=True)
class Capacity:
    """Saturation flow (veh/s) together with the expected time gap behind it."""

    value: float
    expected_gap: float


def cav_time_gap(i: int, params: VehicleParams) -> float:
    """Desired gap (s) behind a run of ``i`` consecutive CAVs.

    Non-increasing in ``i``: longer runs allow tighter spacing until the
    safety floor binds.  State 0 is HDV-led and uses ``tau_hdv`` instead,
    so ``i`` must be at least 1 here.
    """
    if i < 1:
        raise ValueError("state 0 is HDV-led; use tau_hdv, not the CAV bound")
    return max(params.tau_safe, 4.0 * params.omega_v / (params.omega_e * (1 + i)))


def expected_time_gap(pi: np.ndarray, params: VehicleParams) -> float:
    """Stationary-composition average of the per-state desired gaps (s)."""
    pi = np.asarray(pi, dtype=float)
    gaps = np.empty(pi.size)
    gaps[0] = params.tau_hdv
    for i in range(1, pi.size):
        gaps[i] = cav_time_gap(i, params)
    return float(pi @ gaps)


def mixed_capacity(spec: MarkovSpec, params: VehicleParams) -> Capacity:
    """Long-run capacity 1 / (E[gap] + L / v_free) under the stationary law."""
    gap = expected_time_gap(steady_state_closed_form(spec), params)
    return Capacity(value=1.0 / (gap + params.length_headway), expected_gap=gap)
