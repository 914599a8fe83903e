"""Intersection-level delay aggregation and cycle-length selection.

Per-approach expected delays (leader-type mixtures at red R_i = (1 - lambda_i) C)
are summed over the intersection.  In cycle length the total is an exact
quadratic A C^2 + B C + K per approach, so its derivative 2 A C + B is
available symbolically and is validated against central differences.

Two published closed forms are carried alongside as comparison artifacts
because they disagree with that exact derivative: a derivative expression
that is constant in C, and an optimal-cycle formula whose value is
non-positive for any approach with green ratio below one and penetration
below one.  The production path therefore never recommends the published
optimum; it runs a constrained numeric minimization with the minimum-cycle
bound (expected lost time scaled by the degree of saturation) as the floor.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

from .capacity import Capacity, VehicleParams, mixed_capacity
from .delay import (
    ApproachDemand,
    DelayResult,
    ExpectedDelay,
    HdvStartupParams,
    SignalTiming,
    delay_cav,
    delay_hdv,
    expected_delay,
)
from .errors import (
    EarlyClearanceError,
    InfeasibleError,
    OverCapacityError,
    SaturationError,
)
from .markov import MarkovSpec

__all__ = [
    "OBJECTIVE_TOTAL",
    "OBJECTIVE_AVERAGE",
    "LS_MODE_DERIVED",
    "LS_MODE_PAPER",
    "Approach",
    "IntersectionConfig",
    "CycleOptimum",
    "CycleCurveRow",
    "red_time",
    "approach_expected_delay",
    "total_delay",
    "average_delay_per_vehicle",
    "total_delay_derivative_exact",
    "total_delay_derivative_paper",
    "optimal_cycle_paper",
    "startup_lost_time",
    "expected_lost_time",
    "min_cycle_length",
    "optimize_cycle",
    "optimal_cycle_curve",
]

OBJECTIVE_TOTAL = "total-per-cycle"
OBJECTIVE_AVERAGE = "average-per-vehicle"
_OBJECTIVE_ALIASES = {
    "total": OBJECTIVE_TOTAL,
    OBJECTIVE_TOTAL: OBJECTIVE_TOTAL,
    "average": OBJECTIVE_AVERAGE,
    OBJECTIVE_AVERAGE: OBJECTIVE_AVERAGE,
}

LS_MODE_DERIVED = "derived"
LS_MODE_PAPER = "paper"

DEFAULT_MAX_CYCLE = 300.0

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Approach:
    """One signalized approach: demand, green share, and leader start-up.

    green_ratio = 1 is accepted as the zero-red boundary so degenerate
    configurations remain expressible; normal designs keep it below one.
    """

    demand: ApproachDemand
    green_ratio: float
    startup: HdvStartupParams = field(default_factory=HdvStartupParams)
    capacity_override: Capacity | float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.green_ratio <= 1.0:
            raise ValueError(
                f"green ratio must lie in (0, 1], got {self.green_ratio}"
            )


@dataclass(frozen=True)
class IntersectionConfig:
    """Approaches plus the shared composition and geometry parameters.

    The capacity shared by all approaches follows from (markov, vehicle);
    individual approaches may override it.  critical_flow_ratios and
    saturation_degree feed the minimum-cycle bound; phase_startups defaults
    to one phase per approach when not given.
    """

    approaches: tuple[Approach, ...]
    penetration: float
    markov: MarkovSpec
    vehicle: VehicleParams
    saturation_degree: float = 0.95
    clearance_lost: float = 4.0
    critical_flow_ratios: tuple[float, ...] = ()
    phase_startups: tuple[HdvStartupParams, ...] | None = None
    ls_mode: str = LS_MODE_DERIVED

    def __post_init__(self) -> None:
        object.__setattr__(self, "approaches", tuple(self.approaches))
        object.__setattr__(
            self, "critical_flow_ratios", tuple(self.critical_flow_ratios)
        )
        if self.phase_startups is not None:
            object.__setattr__(self, "phase_startups", tuple(self.phase_startups))
        if not self.approaches:
            raise ValueError("at least one approach is required")
        if not 0.0 <= self.penetration <= 1.0:
            raise ValueError("penetration rate must lie in [0, 1]")
        if abs(self.markov.p - self.penetration) > 1e-12:
            raise ValueError(
                "markov.p and penetration disagree; build the chain spec "
                "from the same penetration rate"
            )
        if not 0.0 < self.saturation_degree <= 1.0:
            raise ValueError("degree of saturation must lie in (0, 1]")
        if self.clearance_lost < 0.0:
            raise ValueError("clearance lost time cannot be negative")
        if any(r < 0.0 for r in self.critical_flow_ratios):
            raise ValueError("critical flow ratios cannot be negative")
        if self.ls_mode not in (LS_MODE_DERIVED, LS_MODE_PAPER):
            raise ValueError(f"unknown ls_mode {self.ls_mode!r}")

    def shared_capacity(self) -> Capacity:
        return _shared_capacity(self.markov, self.vehicle)

    def startups(self) -> tuple[HdvStartupParams, ...]:
        if self.phase_startups is not None:
            return self.phase_startups
        return tuple(a.startup for a in self.approaches)

    def with_penetration(self, p: float) -> "IntersectionConfig":
        return replace(
            self, penetration=p, markov=MarkovSpec(n=self.markov.n, p=p)
        )


@dataclass(frozen=True)
class CycleOptimum:
    """Outcome of constrained cycle selection, with consistency diagnostics.

    c_star_paper is the published formula's value (NaN when its denominator
    degenerates); it is reported, never recommended.  diagnostics carries
    the derivative comparison: the exact derivative at the optimum, the
    published constant, the exact stationary point -B / 2A, and bookkeeping
    about infeasible grid points.
    """

    c_min: float
    c_star_paper: float
    c_opt_numeric: float
    objective: str
    delay_at_opt: float
    diagnostics: dict


@dataclass(frozen=True)
class CycleCurveRow:
    """One penetration level of the optimal-cycle sweep."""

    penetration: float
    c_min: float
    c_opt_numeric: float
    avg_delay_at_opt: float


@lru_cache(maxsize=None)
def _shared_capacity(markov: MarkovSpec, vehicle: VehicleParams) -> Capacity:
    return mixed_capacity(markov, vehicle)


def red_time(green_ratio: float, cycle: float) -> float:
    """Effective red R = (1 - lambda) C; lambda = 1 is the zero-red limit."""
    if not 0.0 < green_ratio <= 1.0:
        raise ValueError(f"green ratio must lie in (0, 1], got {green_ratio}")
    if cycle <= 0.0:
        raise ValueError("cycle length must be positive")
    return (1.0 - green_ratio) * cycle


def _approach_capacity(config: IntersectionConfig, approach: Approach) -> float:
    override = approach.capacity_override
    if override is None:
        return config.shared_capacity().value
    return override.value if isinstance(override, Capacity) else float(override)


def approach_expected_delay(
    config: IntersectionConfig, approach: Approach, cycle: float
) -> ExpectedDelay:
    """Leader-type delay mixture for one approach at cycle length ``cycle``.

    At the penetration boundaries only the relevant leader type is
    evaluated, so a pure-CAV intersection is not blocked by an HDV-side
    regime check (and vice versa).
    """
    rate = _approach_capacity(config, approach)
    timing = SignalTiming.from_ratio(cycle, approach.green_ratio)
    p = config.penetration
    cav: DelayResult | None = None
    hdv: DelayResult | None = None
    if p > 0.0:
        cav = delay_cav(approach.demand, timing, rate)
    if p < 1.0:
        hdv = delay_hdv(approach.demand, timing, approach.startup, rate)
    if cav is None:
        assert hdv is not None
        return ExpectedDelay(total=hdv.total_delay, avg=hdv.avg_delay)
    if hdv is None:
        return ExpectedDelay(total=cav.total_delay, avg=cav.avg_delay)
    return expected_delay(p, cav, hdv)


def total_delay(config: IntersectionConfig, cycle: float) -> float:
    """Sum of expected per-approach delays (veh*s per cycle).

    Approaches that are saturated or over capacity at this cycle length are
    collected and raised together, naming their indices.
    """
    total = 0.0
    failures: list[str] = []
    for idx, approach in enumerate(config.approaches):
        try:
            total += approach_expected_delay(config, approach, cycle).total
        except (SaturationError, OverCapacityError, EarlyClearanceError) as exc:
            failures.append(f"approach {idx}: {exc}")
    if failures:
        raise SaturationError(
            f"cycle {cycle:g} s is out of regime for {len(failures)} "
            "approach(es): " + "; ".join(failures)
        )
    return total


def average_delay_per_vehicle(config: IntersectionConfig, cycle: float) -> float:
    """Flow-weighted intersection average: total delay over C * sum of flows."""
    flow = sum(a.demand.arrival_rate for a in config.approaches)
    if flow == 0.0:
        return 0.0
    return total_delay(config, cycle) / (cycle * flow)


def _quadratic_coefficients(
    config: IntersectionConfig, approach: Approach
) -> tuple[float, float]:
    """Coefficients (A, B) of the approach's expected delay A C^2 + B C + K.

    Both leader types share A = c q (1 - lambda)^2 / (2 (c - q)); only the
    HDV branch contributes the linear term, weighted by 1 - p:
    B = (1 - p) c q (1 - lambda) (2 T_r + T_a) / (2 (c - q)).
    """
    rate = _approach_capacity(config, approach)
    qr = approach.demand.arrival_rate
    if rate <= qr:
        raise OverCapacityError(
            f"arrival rate {qr:g} veh/s meets or exceeds capacity {rate:g} veh/s"
        )
    slack = 1.0 - approach.green_ratio
    scale = rate * qr / (rate - qr)
    a_coef = scale * slack**2 / 2.0
    b_coef = (
        (1.0 - config.penetration)
        * scale
        * slack
        * (2.0 * approach.startup.reaction_time + approach.startup.accel_time)
        / 2.0
    )
    return a_coef, b_coef


def total_delay_derivative_exact(config: IntersectionConfig, cycle: float) -> float:
    """d(total delay)/dC from the exact quadratic structure, sum of 2 A C + B.

    The cycle length must be feasible (same regime checks as total_delay).
    Non-negative for green ratios and penetrations at most one, so total
    delay is non-decreasing in the cycle length and its constrained minimum
    sits at the lower bound.
    """
    total_delay(config, cycle)
    return sum(
        2.0 * a * cycle + b
        for a, b in (
            _quadratic_coefficients(config, approach)
            for approach in config.approaches
        )
    )


def total_delay_derivative_paper(config: IntersectionConfig) -> float:
    """Published derivative expression, kept verbatim for comparison.

    Evaluates sum of (c q / (c - q)) * (c (lambda - 1)^2
    + T_a (1 - lambda)(1 - p) + 2 T_r (1 - lambda)(1 - p)).  Note it does
    not depend on the cycle length, unlike the exact derivative.
    """
    p = config.penetration
    value = 0.0
    for approach in config.approaches:
        rate = _approach_capacity(config, approach)
        qr = approach.demand.arrival_rate
        if rate <= qr:
            raise OverCapacityError(
                f"arrival rate {qr:g} veh/s meets or exceeds capacity {rate:g} veh/s"
            )
        lam = approach.green_ratio
        tr = approach.startup.reaction_time
        ta = approach.startup.accel_time
        value += (rate * qr / (rate - qr)) * (
            rate * (lam - 1.0) ** 2
            + ta * (1.0 - lam) * (1.0 - p)
            + 2.0 * tr * (1.0 - lam) * (1.0 - p)
        )
    return value


def optimal_cycle_paper(config: IntersectionConfig) -> float:
    """Published optimal-cycle formula, evaluated verbatim.

    The numerator factor (lambda - lambda p + p - 1) equals
    (lambda - 1)(1 - p) and is non-positive whenever lambda < 1 and p < 1,
    so the value is typically non-positive; a warning is emitted and the
    value is returned for reporting only.  All green ratios equal to one
    degenerate the denominator.
    """
    p = config.penetration
    numerator = 0.0
    denominator = 0.0
    for approach in config.approaches:
        rate = _approach_capacity(config, approach)
        qr = approach.demand.arrival_rate
        if rate <= qr:
            raise OverCapacityError(
                f"arrival rate {qr:g} veh/s meets or exceeds capacity {rate:g} veh/s"
            )
        lam = approach.green_ratio
        tr = approach.startup.reaction_time
        ta = approach.startup.accel_time
        scale = rate * qr / (rate - qr)
        sign_factor = lam - lam * p + p - 1.0
        numerator += scale * (ta * sign_factor + 2.0 * tr * sign_factor)
        denominator += scale * (lam - 1.0) ** 2
    if denominator == 0.0:
        raise ZeroDivisionError(
            "published optimal-cycle formula degenerates: every approach "
            "has green ratio 1 (or zero demand)"
        )
    value = numerator / denominator
    if value <= 0.0:
        warnings.warn(
            f"published optimal-cycle formula gives {value:g} s, which is "
            "not a usable cycle length; value kept for reporting only",
            RuntimeWarning,
            stacklevel=2,
        )
    return value


def startup_lost_time(
    startups: Sequence[HdvStartupParams], mode: str = LS_MODE_DERIVED
) -> float:
    """Start-up lost time summed over phases.

    derived mode charges T_r + T_a / 2 per phase, the intercept of the
    saturation line against the ramp geometry; paper mode reproduces the
    published T_r + 3 T_a / 2 per phase for comparison.
    """
    if not startups:
        raise ValueError("at least one phase is required")
    if mode == LS_MODE_DERIVED:
        return sum(s.reaction_time + s.accel_time / 2.0 for s in startups)
    if mode == LS_MODE_PAPER:
        return sum(s.reaction_time + 1.5 * s.accel_time for s in startups)
    raise ValueError(f"unknown start-up lost time mode {mode!r}")


def expected_lost_time(p: float, startup_total: float, clearance: float) -> float:
    """E[L] = (1 - p) L_s + L_c: only HDV-led departures pay the start-up."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("penetration rate must lie in [0, 1]")
    if startup_total < 0.0 or clearance < 0.0:
        raise ValueError("lost times cannot be negative")
    return (1.0 - p) * startup_total + clearance


def min_cycle_length(config: IntersectionConfig, p: float | None = None) -> float:
    """Shortest workable cycle: E[L] X_c / (X_c - sum of critical flow ratios).

    Raises InfeasibleError when the critical flow ratios consume the whole
    available degree of saturation.
    """
    if p is None:
        p = config.penetration
    ls = startup_lost_time(config.startups(), config.ls_mode)
    lost = expected_lost_time(p, ls, config.clearance_lost)
    ratio_sum = sum(config.critical_flow_ratios)
    xc = config.saturation_degree
    if ratio_sum >= xc:
        raise InfeasibleError(
            f"critical flow ratios sum to {ratio_sum:g} but the degree of "
            f"saturation is {xc:g}; no cycle length suffices"
        )
    return lost * xc / (xc - ratio_sum)


def _objective_function(config: IntersectionConfig, objective: str):
    if objective == OBJECTIVE_TOTAL:
        return lambda c: total_delay(config, c)
    return lambda c: average_delay_per_vehicle(config, c)


def _golden_section(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Minimize a unimodal f on [lo, hi]; returns (argmin, value).

    Endpoints are compared against the interior result so a boundary
    minimum is returned exactly.
    """
    f_lo, f_hi = f(lo), f(hi)
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    x_mid = x1 if f1 <= f2 else x2
    f_mid = min(f1, f2)
    best_x, best_f = x_mid, f_mid
    if f_lo <= best_f:
        best_x, best_f = lo, f_lo
    if f_hi < best_f:
        best_x, best_f = hi, f_hi
    return best_x, best_f


def optimize_cycle(
    config: IntersectionConfig,
    bounds: tuple[float, float] | None = None,
    objective: str = OBJECTIVE_AVERAGE,
    grid_points: int = 200,
) -> CycleOptimum:
    """Constrained numeric cycle selection on [C_lo, C_hi].

    A bracketing grid locates the feasible argmin, golden-section search
    refines it, and the published formula plus both derivative readings are
    attached as diagnostics.  For the total-per-cycle objective the result
    is the lower bound, since total delay increases with the cycle length.

    Args:
        config: intersection description.
        bounds: (C_lo, C_hi); defaults to (minimum cycle, 300 s).  C_lo may
            not undercut the minimum cycle.
        objective: "total-per-cycle" or "average-per-vehicle" (short forms
            "total" / "average" accepted).
        grid_points: size of the bracketing grid.

    Raises:
        InfeasibleError: empty feasible region or bounds below the minimum
            cycle.
    """
    if objective not in _OBJECTIVE_ALIASES:
        raise ValueError(f"unknown objective {objective!r}")
    objective = _OBJECTIVE_ALIASES[objective]
    c_min = min_cycle_length(config)
    if bounds is None:
        bounds = (c_min, max(DEFAULT_MAX_CYCLE, c_min + 1.0))
    lo, hi = bounds
    if lo < c_min - 1e-9:
        raise InfeasibleError(
            f"lower bound {lo:g} s undercuts the minimum cycle {c_min:g} s"
        )
    if hi <= lo:
        raise ValueError("upper bound must exceed lower bound")

    f = _objective_function(config, objective)
    step = (hi - lo) / (grid_points - 1)
    grid = [lo + k * step for k in range(grid_points)]
    grid[-1] = hi
    values: list[float] = []
    excluded = 0
    for c in grid:
        try:
            values.append(f(c))
        except (SaturationError, OverCapacityError, EarlyClearanceError):
            values.append(math.nan)
            excluded += 1
    feasible = [k for k, v in enumerate(values) if not math.isnan(v)]
    if not feasible:
        raise InfeasibleError(
            f"no feasible cycle length in [{lo:g}, {hi:g}] s; "
            f"all {grid_points} grid points are out of regime"
        )
    best = min(feasible, key=lambda k: values[k])
    bracket_lo = grid[best - 1] if best - 1 in feasible else grid[best]
    bracket_hi = grid[best + 1] if best + 1 in feasible else grid[best]
    if bracket_hi > bracket_lo:
        tol = 1e-9 * max(1.0, hi)
        c_opt, f_opt = _golden_section(f, bracket_lo, bracket_hi, tol)
    else:
        c_opt, f_opt = grid[best], values[best]

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            c_star = optimal_cycle_paper(config)
    except ZeroDivisionError:
        c_star = math.nan

    coeff_a = coeff_b = 0.0
    for approach in config.approaches:
        a, b = _quadratic_coefficients(config, approach)
        coeff_a += a
        coeff_b += b
    diagnostics = {
        "derivative_exact_at_opt": 2.0 * coeff_a * c_opt + coeff_b,
        "derivative_paper": total_delay_derivative_paper(config),
        "exact_stationary_point": (
            -coeff_b / (2.0 * coeff_a) if coeff_a > 0.0 else math.nan
        ),
        "c_star_nonpositive": bool(not math.isnan(c_star) and c_star <= 0.0),
        "grid_points_excluded": excluded,
    }
    return CycleOptimum(
        c_min=c_min,
        c_star_paper=c_star,
        c_opt_numeric=c_opt,
        objective=objective,
        delay_at_opt=f_opt,
        diagnostics=diagnostics,
    )


def optimal_cycle_curve(
    config: IntersectionConfig,
    p_values: Sequence[float],
    c_hi: float = DEFAULT_MAX_CYCLE,
    objective: str = OBJECTIVE_AVERAGE,
) -> list[CycleCurveRow]:
    """Optimal cycle and delay at the optimum across penetration levels.

    Each row re-derives the shared capacity and the minimum-cycle floor at
    its own penetration rate, then optimizes on [C_min, c_hi].  The
    reported delay column is always the per-vehicle average at the chosen
    cycle, whatever the optimization objective.
    """
    rows: list[CycleCurveRow] = []
    for p in p_values:
        cfg = config.with_penetration(p)
        c_min = min_cycle_length(cfg)
        opt = optimize_cycle(cfg, (c_min, c_hi), objective)
        rows.append(
            CycleCurveRow(
                penetration=p,
                c_min=c_min,
                c_opt_numeric=opt.c_opt_numeric,
                avg_delay_at_opt=average_delay_per_vehicle(cfg, opt.c_opt_numeric),
            )
        )
    return rows
