import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from psrolab.errors import DomainError, GameFileError
from psrolab.game import (Game, Population, best_response, check_mixture, exploitability, generate_game,
                          lift, load_game, payoff_vs_mixture, rps, save_game, skew_residual)
from conftest import random_skew


def test_game_rejects_bad_matrices():
    with pytest.raises(DomainError):
        Game(np.zeros((2, 3)))
    with pytest.raises(DomainError):
        Game(np.array([[0.0, 1.0], [-1.0 + 1e-6, 0.0]]))
    with pytest.raises(DomainError):
        Game(np.array([[1e-6, 0.0], [0.0, 0.0]]))
    with pytest.raises(DomainError):
        Game(np.array([[0.0, np.inf], [-np.inf, 0.0]]))
    with pytest.raises(DomainError):
        Game(np.zeros((0, 0)))


def test_game_is_immutable_copy():
    a = np.array([[0.0, 1.0], [-1.0, 0.0]])
    g = Game(a)
    a[0, 1] = 5.0
    assert g.payoff[0, 1] == 1.0
    with pytest.raises(ValueError):
        g.payoff[0, 1] = 2.0


def test_skew_tolerance_boundary():
    Game(np.array([[0.0, 1.0], [-1.0 + 5e-10, 0.0]]))


def test_population_effective_order():
    pop = Population((3, 1, 3, 0, 1))
    assert pop.effective == (3, 1, 0)
    assert pop.position(0) == 2
    assert Population((2, 0, 1)).effective == (2, 0, 1)
    with pytest.raises(DomainError):
        Population(())
    with pytest.raises(DomainError):
        Population((0, 5)).check(rps())


def test_payoff_vs_mixture_examples(rps_game):
    assert payoff_vs_mixture(rps_game, 1, [1.0], [0]) == 1.0
    for r in range(3):
        assert payoff_vs_mixture(rps_game, r, [1.0], [r]) == 0.0
    g = random_skew(4, 3)
    assert payoff_vs_mixture(g, 2, np.full(4, 0.25)) == pytest.approx(g.payoff[2].mean(), abs=1e-15)
    with pytest.raises(DomainError):
        payoff_vs_mixture(rps_game, 0, [0.5, 0.5], [0])


def test_best_response_examples(rps_game):
    assert best_response(rps_game, [1.0], [0]) == (1, 1.0, [1])
    idx, value, br_set = best_response(rps_game, np.full(3, 1 / 3))
    assert (idx, br_set) == (0, [0, 1, 2])
    assert value == pytest.approx(0.0, abs=1e-15)


@given(st.integers(0, 10_000))
def test_best_response_matches_row_scan(seed):
    g = random_skew(6, seed)
    sigma = np.random.default_rng(seed).dirichlet(np.ones(6))
    idx, value, br_set = best_response(g, sigma)
    scan = [sum(g.payoff[i, j] * sigma[j] for j in range(6)) for i in range(6)]
    assert value == pytest.approx(max(scan), abs=1e-12)
    assert idx == min(br_set) and scan[idx] >= max(scan) - 1e-9


def test_mixtures_are_rejected_not_renormalized():
    with pytest.raises(DomainError):
        check_mixture([0.5, 0.6], 2)
    with pytest.raises(DomainError):
        check_mixture([1.2, -0.2], 2)
    assert np.allclose(check_mixture([0.5, 0.5 + 5e-10], 2), [0.5, 0.5 + 5e-10])


def test_exploitability_examples(rps_game):
    assert exploitability(rps_game, np.full(3, 1 / 3)) == pytest.approx(0.0, abs=1e-15)
    assert exploitability(rps_game, [1.0, 0.0, 0.0]) == 1.0
    g = random_skew(8, 11)
    sigma = np.random.default_rng(5).dirichlet(np.ones(8))
    _, value, _ = best_response(g, sigma)
    self_play = sum(sigma[i] * payoff_vs_mixture(g, i, sigma) for i in range(8))
    assert exploitability(g, sigma) == pytest.approx(value - self_play, abs=1e-12)


@given(st.integers(0, 10_000), st.integers(1, 12))
def test_exploitability_nonnegative(seed, n):
    g = random_skew(n, seed)
    sigma = np.random.default_rng(seed + 1).dirichlet(np.ones(n))
    assert exploitability(g, sigma) >= -1e-9


@given(st.integers(0, 10_000), st.integers(1, 5))
def test_zero_probability_members_do_not_change_best_response(seed, extra):
    g = random_skew(8, seed)
    rng = np.random.default_rng(seed)
    members = [0, 3, 5]
    sigma = rng.dirichlet(np.ones(3))
    padded = members + [int(i) for i in rng.integers(0, 8, size=extra)]
    sigma_padded = np.concatenate([sigma, np.zeros(extra)])
    assert best_response(g, sigma, members)[1] == pytest.approx(best_response(g, sigma_padded, padded)[1], abs=1e-15)


def test_lift_adds_duplicates():
    assert np.allclose(lift([0.25, 0.5, 0.25], [2, 0, 2], 3), [0.5, 0.0, 0.5])


@pytest.mark.parametrize("kind", ["gaussian-skew", "disc-elo-noise"])
def test_generate_game_determinism_and_skew(kind):
    a = generate_game(kind, 7, 0.1, 7)
    b = generate_game(kind, 7, 0.1, 7)
    assert np.array_equal(a.payoff, b.payoff)
    assert skew_residual(a.payoff) == 0.0
    assert not np.array_equal(a.payoff, generate_game(kind, 7, 0.1, 8).payoff)


def test_generate_game_errors():
    with pytest.raises(DomainError):
        generate_game("elo", 3)
    with pytest.raises(DomainError):
        generate_game("gaussian-skew", 0)
    with pytest.raises(DomainError):
        generate_game("gaussian-skew", 3, noise=-1)
    with pytest.raises(DomainError):
        generate_game("from-file")


def test_game_file_roundtrip(tmp_path):
    g = Game(rps().payoff, labels=("rock", "paper", "scissors"))
    path = tmp_path / "g.json"
    save_game(g, path)
    assert load_game(path) == g
    assert generate_game("from-file", path=path) == g


def test_game_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2,\n "payoff": [[0, 1], [-1, 0]')
    with pytest.raises(GameFileError) as info:
        load_game(bad)
    assert info.value.line == 2 and info.value.column is not None
    for doc in ({"n": 2, "payoff": [[0, 1], [1, 0]]}, {"n": 2, "payoff": [[0, 1]]},
                {"n": 1, "payoff": [[0]], "extra": 1}, {"payoff": [[0]]}):
        p = tmp_path / "x.json"
        p.write_text(json.dumps(doc))
        with pytest.raises(GameFileError):
            load_game(p)
    with pytest.raises(GameFileError):
        load_game(tmp_path / "missing.json")
