"""Regret-minimization against a tracking best response (RM-BR).

The mixture side runs exponential weights with Exp3's exploration mixing;
the opponent side is an exact best response to the current mixture. The
estimate is the best-response value averaged over the tail of the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .game import Game, Population, best_response

READOUTS = ("average", "last")


@dataclass
class RmState:
    log_weights: np.ndarray
    gamma: float
    eta: float
    step_count: int = 0

    @property
    def mixture(self) -> np.ndarray:
        w = np.exp(self.log_weights - self.log_weights.max())
        n = w.size
        return (1.0 - self.gamma) * w / w.sum() + self.gamma / n

    def update(self, losses: np.ndarray) -> None:
        self.log_weights = self.log_weights - self.eta * losses
        self.step_count += 1


def exp3_schedule(n: int, rm_steps: int) -> tuple[float, float]:
    if n <= 1:
        return 0.0, 0.0
    gamma = min(1.0, math.sqrt(n * math.log(n) / rm_steps))
    return gamma, gamma / n


@dataclass
class PeEstimate:
    pe_est: float
    rho: np.ndarray
    beta: int

    def __iter__(self):
        return iter((self.pe_est, self.rho, self.beta))


def estimate_pe(game: Game, pop, rm_steps: int, samples_per_step: int = 0, seed: int = 0, *,
                noise: float = 0.0, readout: str = "average", tail_fraction: float = 0.1,
                gamma: Optional[float] = None, eta: Optional[float] = None) -> PeEstimate:
    """Estimate the population exploitability of ``pop`` with RM-BR.

    ``samples_per_step = 0`` uses exact payoffs. A positive value replaces each
    payoff with the mean of that many noisy observations: each observation is
    the payoff plus uniform noise on ``[-noise, noise]``.
    """
    if rm_steps < 1:
        raise DomainError("rm_steps must be >= 1")
    if readout not in READOUTS:
        raise DomainError(f"readout must be one of {READOUTS}")
    if not isinstance(pop, Population):
        pop = Population(tuple(pop))
    pop.check(game)
    members = list(pop.effective)
    n = len(members)
    if n == 1:
        beta, value, _ = best_response(game, np.ones(1), members)
        return PeEstimate(value, np.ones(1), beta)

    g0, e0 = exp3_schedule(n, rm_steps)
    state = RmState(np.zeros(n), g0 if gamma is None else gamma, e0 if eta is None else eta)
    rng = np.random.default_rng(seed)
    cross = game.payoff[:, members]
    tail_start = rm_steps - max(1, int(math.ceil(tail_fraction * rm_steps)))
    tail_sum, tail_count = 0.0, 0
    rho = state.mixture
    for t in range(rm_steps):
        rho = state.mixture
        vals = cross @ rho
        beta = int(np.argmax(vals))
        if t >= tail_start:
            tail_sum += vals[beta]
            tail_count += 1
        losses = cross[beta].copy()
        if samples_per_step > 0 and noise > 0:
            losses += rng.uniform(-noise, noise, size=(samples_per_step, n)).mean(axis=0)
        state.update(losses)
    rho = state.mixture
    beta, value, _ = best_response(game, rho, members)
    pe_est = tail_sum / tail_count if readout == "average" else value
    return PeEstimate(float(pe_est), rho, beta)
