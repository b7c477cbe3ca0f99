import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from psrolab.errors import DomainError
from psrolab.game import Population, best_response, generate_game
from psrolab.landscape import pe_landscape, simplex_grid, unique_br_radius
from psrolab.lp import TAU_LP, population_exploitability
from conftest import random_skew


def test_grid_shape():
    grid = simplex_grid(4)
    assert grid.shape == (15, 3) and np.allclose(grid.sum(axis=1), 1.0)
    with pytest.raises(DomainError):
        simplex_grid(1)


def test_full_rps_is_flat_zero(rps_game):
    land = pe_landscape(rps_game, Population((0, 1, 2)), 10)
    assert np.all(np.abs(land.pe) <= 1e-12)


def test_vertices_are_pure_member_responses():
    g = random_skew(9, 2)
    pop = Population((1, 4, 7))
    land = pe_landscape(g, pop, 6)
    for vertex, member in zip(np.eye(3), pop.effective):
        row = int(np.flatnonzero(np.all(land.points == vertex, axis=1))[0])
        br, _, _ = best_response(g, vertex, pop.effective)
        assert land.br[row] == br
        assert land.pe[row] == population_exploitability(g, pop.extend(br)).pe


def test_landscape_never_above_current_pe():
    g = random_skew(12, 4)
    pop = Population((0, 5, 9))
    land = pe_landscape(g, pop, 20)
    assert np.all(land.pe <= population_exploitability(g, pop).pe + TAU_LP)
    assert land.to_csv().splitlines()[0] == "p0,p1,p2,pe,br"
    assert len(land.to_csv().splitlines()) == len(land) + 1


def test_plateaus_on_disc_elo():
    g = generate_game("disc-elo-noise", 100, noise=0.1, seed=0)
    land = pe_landscape(g, Population((3, 40, 77)), 200)
    assert len(np.unique(land.br)) * 100 < len(land)


def test_landscape_needs_three(rps_game):
    with pytest.raises(DomainError):
        pe_landscape(rps_game, Population((0, 1)), 5)


def test_radius_examples(rps_game):
    radius, br = unique_br_radius(rps_game, Population((0,)), [1.0])
    # gaps against rock and scissors are 1 and 2, so gamma = 1 and L = 2
    assert br == 1 and radius == pytest.approx(0.25)
    radius, br = unique_br_radius(rps_game, Population((0, 1, 2)), np.full(3, 1 / 3))
    assert radius is None


def _simplex_step(rng, sigma, dist):
    for _ in range(1000):
        d = rng.standard_normal(sigma.size)
        d -= d.mean()
        cand = sigma + dist * d / np.linalg.norm(d)
        if cand.min() >= 0:
            return cand
    return None


@given(st.integers(0, 10_000))
def test_radius_preserves_best_response(seed):
    g = random_skew(8, seed)
    rng = np.random.default_rng(seed)
    pop = Population(tuple(rng.choice(8, size=3, replace=False).tolist()))
    sigma = rng.dirichlet(np.ones(3))
    radius, br = unique_br_radius(g, pop, sigma)
    if radius is None or not math.isfinite(radius):
        return
    for _ in range(20):
        moved = _simplex_step(rng, sigma, 0.99 * radius)
        if moved is not None:
            _, _, ties = best_response(g, moved, pop.effective)
            assert list(ties) == [br]


def test_grid_neighbors_within_radius_share_response():
    g = random_skew(10, 11)
    pop = Population((2, 5, 8))
    res = 30
    land = pe_landscape(g, pop, res)
    index = {tuple(np.rint(p * res).astype(int)): i for i, p in enumerate(land.points)}
    steps = [(1, -1, 0), (-1, 1, 0), (1, 0, -1), (-1, 0, 1), (0, 1, -1), (0, -1, 1)]
    spacing = math.sqrt(2) / res
    for key, i in index.items():
        radius, br = unique_br_radius(g, pop, land.points[i])
        if radius is None or radius <= spacing:
            continue
        for step in steps:
            j = index.get(tuple(np.add(key, step)))
            if j is not None:
                assert land.br[j] == br
