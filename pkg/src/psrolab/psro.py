"""The PSRO loop with an exact best-response oracle, and its run record."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError
from .game import Game, Population, best_response
from .lp import TAU_LP, population_exploitability
from .meta import MssSpec, solve_meta

TAU_CONVERGE = 1e-8


def derive_seed(seed: int, *path: int) -> int:
    """Independent, reproducible child seed for sub-step ``path`` of a run."""
    return int(np.random.SeedSequence([int(seed), *map(int, path)]).generate_state(1)[0])


@dataclass
class IterationRecord:
    iter_index: int
    added: Optional[int]
    pop_size: int
    effective_size: int
    pe: float
    meta_strategy: Optional[list] = None
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {
            "iter": self.iter_index,
            "added": self.added,
            "pop_size": self.pop_size,
            "effective_size": self.effective_size,
            "pe": self.pe,
            "meta_strategy": self.meta_strategy,
            "wall_time": self.wall_time,
        }


@dataclass
class RunRecord:
    iterations: list = field(default_factory=list)
    converged: bool = False
    config: dict = field(default_factory=dict)
    members: tuple = ()
    rounds: list = field(default_factory=list)

    @property
    def pe(self) -> np.ndarray:
        return np.array([it.pe for it in self.iterations])

    @property
    def added(self) -> list:
        return [it.added for it in self.iterations[1:]]

    def iterations_to_converge(self) -> Optional[int]:
        """Index of the first iteration whose PE is within the convergence tolerance."""
        for it in self.iterations:
            if it.pe <= TAU_CONVERGE:
                return it.iter_index
        return None

    def to_dict(self, include_wall_time: bool = True) -> dict:
        iters = [it.to_dict() for it in self.iterations]
        if not include_wall_time:
            for it in iters:
                it.pop("wall_time")
        doc = {"converged": self.converged, "members": list(self.members), "config": self.config,
               "iterations": iters}
        if self.rounds:
            doc["rounds"] = self.rounds
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "RunRecord":
        iters = [
            IterationRecord(d["iter"], d["added"], d["pop_size"], d["effective_size"], d["pe"],
                            d.get("meta_strategy"), d.get("wall_time", 0.0))
            for d in doc["iterations"]
        ]
        return cls(iters, doc["converged"], doc.get("config", {}), tuple(doc.get("members", ())),
                   doc.get("rounds", []))


def run_psro(game: Game, spec: MssSpec, init: int = 0, max_iters: int = 100, seed: int = 0,
             record_meta: bool = True) -> RunRecord:
    """Grow a population from ``{init}`` by adding exact best responses to the meta-strategy.

    Iteration 0 records the starting population; iteration ``t`` adds one
    strategy (possibly a duplicate). The loop stops once PE is at most
    ``TAU_CONVERGE`` or after ``max_iters`` additions.
    """
    if not 0 <= init < game.n:
        raise DomainError(f"init {init} outside [0, {game.n})")
    if max_iters < 0:
        raise DomainError("max_iters must be >= 0")
    pop = Population((init,))
    t0 = time.perf_counter()
    pe = population_exploitability(game, pop).pe
    record = RunRecord(config={"kind": "psro", "meta_solver": spec.to_dict(), "init": init,
                               "max_iters": max_iters, "seed": seed})
    record.iterations.append(IterationRecord(0, None, 1, 1, pe, None, time.perf_counter() - t0))
    for t in range(1, max_iters + 1):
        if pe <= TAU_CONVERGE:
            break
        t0 = time.perf_counter()
        sigma = solve_meta(spec, game, pop, iteration=t - 1, seed=derive_seed(seed, t))
        response, _, _ = best_response(game, sigma, pop.effective)
        pop = pop.extend(response)
        new_pe = population_exploitability(game, pop).pe
        if new_pe > pe + TAU_LP:
            raise AssertionError(f"PE increased from {pe} to {new_pe} after adding {response}")
        pe = new_pe
        record.iterations.append(IterationRecord(
            t, response, len(pop.members), len(pop.effective), pe,
            [float(v) for v in sigma] if record_meta else None, time.perf_counter() - t0,
        ))
    record.converged = bool(pe <= TAU_CONVERGE)
    record.members = pop.members
    return record
