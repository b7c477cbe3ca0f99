"""Exploration-selection PSRO over a pool of mixtures (Global PSRO) with exact oracles.

Each round samples a pool of mixtures over the effective population (the
base meta-strategy first), answers each with an exact best response, scores
every expanded population by how exploitable it still is, and expands by the
winner's response plus the evaluator's best response: two additions per
round.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .game import Game, Population, TAU_TIE, best_response
from .lp import TAU_LP, population_exploitability
from .meta import MssSpec, solve_meta
from .psro import TAU_CONVERGE, IterationRecord, RunRecord, derive_seed
from .rmbr import estimate_pe

MODES = ("exact-pe", "rmbr-pe", "rmbr-pe-unregularized", "random-select", "exploit-only")
POOLS = ("dirichlet", "neighbor")
EVALUATORS = ("exact", "rmbr")
GAMMA_NS = 0.3
# RM-BR steps per candidate evaluation
RM_STEPS = 100


@dataclass
class Candidate:
    mixture: np.ndarray
    response: int
    expanded_pe: float
    eval_br: int
    eval_mixture: np.ndarray
    score: float
    p_hat: float = 1.0

    def to_dict(self) -> dict:
        return {
            "mixture": [float(v) for v in self.mixture],
            "response": self.response,
            "expanded_pe": self.expanded_pe,
            "eval_br": self.eval_br,
            "p_hat": self.p_hat,
            "score": self.score,
        }


def build_pool(base: MssSpec, game: Game, pop, k: int, seed: int, *, iteration: int = 0,
               variant: str = "dirichlet", gamma_ns: float = GAMMA_NS) -> list:
    """``k`` mixtures over ``pop.effective``; element 0 is always the base meta-strategy.

    ``variant="neighbor"`` draws the rest as ``(1 - gamma_ns) * base + gamma_ns * Dirichlet(1)``.
    """
    if k < 1:
        raise DomainError("pool size k must be >= 1")
    if variant not in POOLS:
        raise DomainError(f"unknown pool variant {variant!r}")
    if not 0.0 <= gamma_ns <= 1.0:
        raise DomainError("gamma_ns must lie in [0, 1]")
    if not isinstance(pop, Population):
        pop = Population(tuple(pop))
    sigma = solve_meta(base, game, pop, iteration=iteration, seed=seed)
    d = len(pop.effective)
    rng = np.random.default_rng(seed)
    draws = rng.dirichlet(np.ones(d), size=k - 1) if d > 1 else np.ones((k - 1, 1))
    if variant == "neighbor":
        draws = (1.0 - gamma_ns) * sigma + gamma_ns * draws
    return [sigma] + list(draws)


def regularized_score(pe_est: float, p_hat: float, prior_pe: float, br_vs_prior: float) -> float:
    """Estimated PE plus a penalty for candidates the evaluator barely plays."""
    if not 0.0 <= p_hat <= 1.0:
        raise DomainError(f"p_hat must lie in [0, 1], got {p_hat}")
    return (1.0 - p_hat) * (prior_pe - br_vs_prior) + pe_est


def _select(scores: list) -> int:
    """Lowest score; within tie tolerance prefer the base candidate, then the lowest index."""
    scores = np.asarray(scores, dtype=float)
    ties = np.flatnonzero(scores <= scores.min() + TAU_TIE)
    return 0 if 0 in ties else int(ties[0])


def _fresh_response(game: Game, rho: np.ndarray, expanded: Population, beta: int) -> int:
    """Among the best responses to ``rho``, prefer the lowest index not already a member."""
    vals = game.payoff[:, list(expanded.effective)] @ rho
    tied = np.flatnonzero(vals >= vals.max() - TAU_TIE)
    outside = [int(i) for i in tied if i not in set(expanded.effective)]
    if beta in set(expanded.effective) and outside:
        return outside[0]
    return int(beta)


def _pad_to(rho: np.ndarray, old: tuple, new: tuple) -> np.ndarray:
    out = np.zeros(len(new))
    pos = {m: i for i, m in enumerate(new)}
    for m, w in zip(old, rho):
        out[pos[m]] += w
    return out


def run_global_psro(game: Game, base: MssSpec, init: int = 0, k: int = 16, mode: str = "exact-pe",
                    max_rounds: int = 50, seed: int = 0, *, evaluator: Optional[str] = None,
                    pool: str = "dirichlet", gamma_ns: float = GAMMA_NS, rm_steps: int = RM_STEPS,
                    samples_per_step: int = 0, noise: float = 0.0) -> RunRecord:
    """Run Global PSRO from ``{init}``.

    ``evaluator`` picks how expanded candidates are scored: ``exact`` uses the
    LP, ``rmbr`` the RM-BR estimator. It defaults to ``exact`` for
    ``exact-pe`` and to ``rmbr`` for the other modes.
    """
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}; expected one of {MODES}")
    if k < 1:
        raise DomainError("pool size k must be >= 1")
    if not 0 <= init < game.n:
        raise DomainError(f"init {init} outside [0, {game.n})")
    if max_rounds < 0:
        raise DomainError("max_rounds must be >= 0")
    if evaluator is None:
        evaluator = "exact" if mode == "exact-pe" else "rmbr"
    if evaluator not in EVALUATORS:
        raise DomainError(f"unknown evaluator {evaluator!r}")
    if mode == "exact-pe" and evaluator != "exact":
        raise DomainError("exact-pe mode scores with the exact evaluator")
    if mode in ("rmbr-pe", "rmbr-pe-unregularized") and evaluator != "rmbr":
        raise DomainError(f"{mode} scores with the rmbr evaluator")
    pool_size = 1 if mode == "exploit-only" else k

    pop = Population((init,))
    pe = population_exploitability(game, pop).pe
    record = RunRecord(config={
        "kind": "global-psro", "base": base.to_dict(), "init": init, "k": k, "mode": mode,
        "max_rounds": max_rounds, "seed": seed, "evaluator": evaluator, "pool": pool,
        "gamma_ns": gamma_ns, "rm_steps": rm_steps, "samples_per_step": samples_per_step, "noise": noise,
    })
    record.iterations.append(IterationRecord(0, None, 1, 1, pe))

    # retained estimate of the current population: its mixture, refreshed at selection
    if evaluator == "rmbr":
        prior_rho = estimate_pe(game, pop, rm_steps, samples_per_step, derive_seed(seed, 0, 0), noise=noise).rho
    else:
        prior_rho = population_exploitability(game, pop).least_exploitable
    select_rng = np.random.default_rng(derive_seed(seed, 0, 1))
    it = 0
    for rnd in range(1, max_rounds + 1):
        if pe <= TAU_CONVERGE:
            break
        t0 = time.perf_counter()
        eff = pop.effective
        mixtures = build_pool(base, game, pop, pool_size, derive_seed(seed, rnd, 0),
                              iteration=len(pop.members) - 1, variant=pool, gamma_ns=gamma_ns)
        prior_vals = game.payoff[:, list(eff)] @ prior_rho
        prior_pe = float(prior_vals.max())

        candidates = []
        for idx, sigma in enumerate(mixtures):
            response, _, _ = best_response(game, sigma, eff)
            expanded = pop.extend(response)
            if evaluator == "exact":
                cand_pe, rho, beta = population_exploitability(game, expanded)
            else:
                cand_pe, rho, beta = estimate_pe(game, expanded, rm_steps, samples_per_step,
                                                 derive_seed(seed, rnd, idx + 2), noise=noise)
            beta = _fresh_response(game, rho, expanded, int(beta))
            # a response already in the population brings no new strategy to put mass on
            p_hat = 0.0 if response in eff else float(rho[expanded.position(response)])
            if mode == "rmbr-pe":
                score = regularized_score(cand_pe, p_hat, prior_pe, float(prior_vals[beta]))
            else:
                score = float(cand_pe)
            candidates.append(Candidate(np.asarray(sigma), int(response), float(cand_pe), int(beta),
                                        np.asarray(rho), score, p_hat))

        if mode == "random-select":
            chosen = int(select_rng.integers(len(candidates)))
        else:
            chosen = _select([c.score for c in candidates])
        best = candidates[chosen]
        record.rounds.append({"round": rnd, "selected": chosen, "prior_pe": prior_pe,
                              "candidates": [c.to_dict() for c in candidates]})

        after_response = pop.extend(best.response)
        for added in (best.response, best.eval_br):
            it += 1
            grown = pop.extend(added)
            new_pe = population_exploitability(game, grown).pe
            if new_pe > pe + TAU_LP:
                raise AssertionError(f"PE increased from {pe} to {new_pe} after adding {added}")
            pop, pe = grown, new_pe
            record.iterations.append(IterationRecord(
                it, int(added), len(pop.members), len(pop.effective), pe,
                [float(v) for v in best.mixture], time.perf_counter() - t0,
            ))
            t0 = time.perf_counter()
        prior_rho = _pad_to(best.eval_mixture, after_response.effective, pop.effective)

    record.converged = bool(pe <= TAU_CONVERGE)
    record.members = pop.members
    return record
