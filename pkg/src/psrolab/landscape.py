"""Post-expansion PE over the simplex of a three-member population, and BR stability radii."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .game import Game, Population, TAU_TIE, best_response, check_mixture
from .lp import population_exploitability


@dataclass
class Landscape:
    points: np.ndarray  # (m, 3) barycentric coordinates
    pe: np.ndarray
    br: np.ndarray
    members: tuple

    def __len__(self):
        return len(self.pe)

    def rows(self):
        for p, v, b in zip(self.points, self.pe, self.br):
            yield float(p[0]), float(p[1]), float(p[2]), float(v), int(b)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("p0,p1,p2,pe,br\n")
        for p0, p1, p2, v, b in self.rows():
            buf.write(f"{p0!r},{p1!r},{p2!r},{v!r},{b}\n")
        return buf.getvalue()


def simplex_grid(resolution: int) -> np.ndarray:
    """Barycentric lattice ``(i, j, k) / resolution`` with ``i + j + k = resolution``."""
    if resolution < 2:
        raise DomainError("resolution must be >= 2")
    pts = [(i, j, resolution - i - j) for i in range(resolution + 1) for j in range(resolution + 1 - i)]
    return np.array(pts, dtype=float) / resolution


def pe_landscape(game: Game, pop, resolution: int) -> Landscape:
    """Best response and post-expansion PE at every grid point of the population simplex."""
    if not isinstance(pop, Population):
        pop = Population(tuple(pop))
    pop.check(game)
    if len(pop.effective) != 3:
        raise DomainError(f"landscapes need exactly 3 distinct members, got {len(pop.effective)}")
    grid = simplex_grid(resolution)
    vals = grid @ game.payoff[:, list(pop.effective)].T  # (m, n)
    top = vals.max(axis=1, keepdims=True)
    # lowest index within the tie tolerance, matching best_response
    br = np.argmax(vals >= top - TAU_TIE, axis=1)
    # the post-expansion PE depends on the point only through its best response
    by_br = {int(b): population_exploitability(game, pop.extend(int(b))).pe for b in np.unique(br)}
    pe = np.array([by_br[int(b)] for b in br])
    return Landscape(grid, pe, br.astype(int), pop.effective)


def unique_br_radius(game: Game, pop, sigma) -> tuple[Optional[float], int]:
    """Radius around ``sigma`` (Euclidean, on the population simplex) inside which the BR cannot change.

    Returns ``(None, br)`` when the best response is tied.
    """
    if not isinstance(pop, Population):
        pop = Population(tuple(pop))
    pop.check(game)
    members = list(pop.effective)
    sigma = check_mixture(sigma, len(members))
    br, _, br_set = best_response(game, sigma, members)
    if len(br_set) > 1:
        return None, br
    u = game.payoff[:, members]
    diff = np.delete(u[br] - u, br, axis=0)
    if diff.shape[0] == 0:
        return math.inf, br
    gamma = float((diff @ sigma).min())
    lipschitz = float(np.linalg.norm(diff, axis=1).max())
    if gamma <= TAU_TIE or lipschitz <= TAU_TIE:
        return None, br
    return gamma / (2.0 * lipschitz), br
