"""Platoon-composition chain over consecutive-CAV counts.

The vehicle sequence arriving at the stop line is modeled as a discrete-time
Markov chain whose state is the number of consecutive CAVs immediately
preceding (and including) the current vehicle, capped at the communication
capacity ``n``.  Each follower is a CAV with probability ``p``, which
advances the run (saturating at ``n``), and an HDV with probability
``1 - p``, which resets the run to zero.

The stationary distribution is available three ways: a closed form (the
truncated geometric law forced by the balance equations), power iteration
on the transition matrix, and seeded Monte Carlo sampling.  The latter two
act as independent checks on the first.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

__all__ = [
    "MarkovSpec",
    "VehicleTypeSequence",
    "build_transition_matrix",
    "steady_state_closed_form",
    "steady_state_power_iteration",
    "sample_sequence",
]


@dataclass(frozen=True)
class MarkovSpec:
    """Chain parameters: communication capacity ``n`` and CAV share ``p``."""

    n: int
    p: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"communication capacity must be >= 1, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"penetration rate must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class VehicleTypeSequence:
    """A sampled run-length state per vehicle, with the seed that produced it."""

    states: np.ndarray
    seed: int


def build_transition_matrix(spec: MarkovSpec) -> np.ndarray:
    """Dense (n+1) x (n+1) row-stochastic transition matrix.

    Row ``i`` sends probability ``p`` to state ``i + 1`` (state ``n`` keeps
    it) and ``1 - p`` back to state 0; everything else is zero.
    """
    n, p = spec.n, spec.p
    matrix = np.zeros((n + 1, n + 1))
    matrix[:, 0] = 1.0 - p
    for i in range(n):
        matrix[i, i + 1] = p
    matrix[n, n] += p
    return matrix


def steady_state_closed_form(spec: MarkovSpec) -> np.ndarray:
    """Stationary distribution of the run-length chain in closed form.

    pi_i = p**i / D for i < n with D = p**n / (1 - p) + sum(p**m for m < n);
    the balance equation at the capped state forces
    pi_n = p**n / ((1 - p) * D), which makes the entries sum to one exactly.
    p = 1 is the degenerate limit with all mass on state n.
    """
    n, p = spec.n, spec.p
    if p == 1.0:
        pi = np.zeros(n + 1)
        pi[n] = 1.0
        return pi
    denom = p**n / (1.0 - p) + sum(p**m for m in range(n))
    pi = np.empty(n + 1)
    for i in range(n):
        pi[i] = p**i / denom
    pi[n] = p**n / ((1.0 - p) * denom)
    return pi


def steady_state_power_iteration(
    matrix: np.ndarray, tol: float = 1e-12, max_iter: int = 100_000
) -> np.ndarray:
    """Left fixed point of a row-stochastic matrix by repeated multiplication.

    Args:
        matrix: square row-stochastic transition matrix.
        tol: bound on the max-norm residual ``|pi P - pi|``.
        max_iter: iteration budget.

    Returns:
        Probability vector with residual at most ``tol``.

    Raises:
        ConvergenceError: when ``max_iter`` is exhausted, naming the residual.
    """
    P = np.asarray(matrix, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError(f"transition matrix must be square, got shape {P.shape}")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if not np.allclose(P.sum(axis=1), 1.0, atol=1e-9):
        raise ValueError("matrix rows must sum to 1")

    pi = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(max_iter):
        pi = pi @ P
        pi /= pi.sum()
        residual = float(np.max(np.abs(pi @ P - pi)))
        if residual <= tol:
            return pi
    residual = float(np.max(np.abs(pi @ P - pi)))
    raise ConvergenceError(
        f"power iteration stalled at residual {residual:.3e} "
        f"after {max_iter} iterations (target {tol:g})"
    )


def sample_sequence(spec: MarkovSpec, count: int, seed: int) -> VehicleTypeSequence:
    """Sample ``count`` consecutive chain states, reproducibly per seed.

    The first state is drawn from the closed-form stationary law (no
    burn-in), so short sequences are already stationary.  Later states
    follow the transition rule: advance (capped at ``n``) with probability
    ``p``, reset to zero otherwise.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    pi = steady_state_closed_form(spec)
    first = int(rng.choice(spec.n + 1, p=pi))

    states = np.empty(count, dtype=np.int64)
    states[0] = first
    if count > 1:
        advance = rng.random(count - 1) < spec.p
        pos = np.arange(1, count)
        # Run length at step t is t minus the most recent reset position;
        # before the first reset the initial run is still alive.
        last_reset = np.maximum.accumulate(np.where(advance, 0, pos))
        run = pos - last_reset
        states[1:] = np.minimum(np.where(last_reset == 0, first + run, run), spec.n)
    return VehicleTypeSequence(states=states, seed=seed)
