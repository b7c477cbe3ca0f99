import json

import numpy as np
import pytest

from psrolab.errors import DomainError, SpecError
from psrolab.forge import (CORE_PAYOFF, forge_theorem4_instance, forge_with_shortcut, forge_worst_case,
                           nondegeneracy_check, tangent_directions)
from psrolab.game import Game, Population, best_response, game_from_dict, rps, skew_residual
from psrolab.lp import TAU_LP, population_exploitability
from psrolab.meta import MssSpec
from psrolab.psro import TAU_CONVERGE, run_psro

TARGETS = ["nash", "uniform", "alpharank"]


@pytest.fixture(scope="module")
def pool_s3():
    return forge_theorem4_instance(MssSpec("nash"), 50, 3, seed=0)


def _replay_dichotomy(res, spec, n):
    rec = run_psro(res.game, spec, init=res.init, max_iters=n - 1)
    reached = rec.iterations_to_converge()
    if reached is None:
        return True
    return rec.iterations[reached].effective_size == n


def test_two_strategy_game_is_forced():
    res = forge_worst_case(MssSpec("nash"), 2)
    assert np.array_equal(res.game.payoff, [[0.0, -1.0], [1.0, 0.0]])
    assert res.equilibrium_support == [1]


@pytest.mark.parametrize("kind", TARGETS)
@pytest.mark.parametrize("n", [6, 15])
def test_worst_case_replay(kind, n):
    res = forge_worst_case(MssSpec(kind), n, seed=n)
    assert skew_residual(res.game.payoff) <= 1e-12
    assert _replay_dichotomy(res, MssSpec(kind), n)
    last = res.equilibrium_support[0]
    # the final strategy is a pure equilibrium
    assert np.all(res.game.payoff[last] >= -TAU_LP)


@pytest.mark.parametrize("kind", TARGETS)
@pytest.mark.parametrize("n,s", [(12, 1), (20, 1), (16, 3), (25, 5)])
def test_shortcut_guarantee(kind, n, s):
    res = forge_with_shortcut(MssSpec(kind), n, s, seed=1)
    assert _replay_dichotomy(res, MssSpec(kind), n)
    rec = run_psro(res.game, res.shortcut, init=res.init, max_iters=n - 1)
    assert rec.converged and rec.iterations_to_converge() <= min(s + 2, n - 1)
    assert sorted(res.equilibrium_support) == sorted(
        np.flatnonzero(population_exploitability(res.game, Population(tuple(range(n)))).least_exploitable > 1e-9)
    ) or s == 1
    for entry in res.construction_log:
        for key in ("margin", "gamma", "eta", "delta"):
            if isinstance(entry.get(key), float):
                assert entry[key] > 0


def test_final_shortcut_mixture_exposes_pure_equilibrium():
    res = forge_with_shortcut(MssSpec("nash"), 14, 1, seed=2)
    q = res.shortcut.params["mixtures"][2]
    _, _, ties = best_response(res.game, q, res.core)
    assert list(ties) == res.equilibrium_support


def test_nonzero_init_relabels():
    res = forge_with_shortcut(MssSpec("nash"), 12, 1, init=5, seed=0)
    assert res.init == 5 and res.core[0] == 5
    rec = run_psro(res.game, res.shortcut, init=5, max_iters=11)
    assert rec.iterations_to_converge() <= 3
    assert _replay_dichotomy(res, MssSpec("nash"), 12)


def test_part_two_separation():
    res = forge_with_shortcut(MssSpec("uniform"), 25, 5, seed=3)
    P = res.game.payoff
    sep = res.params["separation"]
    assert sep > 0
    for i, qi in enumerate(res.exposures):
        for j in range(len(res.exposures)):
            if i != j:
                a, b = res.equilibrium_support[i], res.equilibrium_support[j]
                assert (P[a, res.core] - P[b, res.core]) @ qi >= sep - 1e-12


def test_serialization_is_json(tmp_path):
    res = forge_with_shortcut(MssSpec("nash"), 10, 3, seed=0)
    doc = json.loads(json.dumps(res.to_dict()))
    assert game_from_dict(doc["game"]).n == 10
    assert MssSpec.from_dict(doc["shortcut"]) == res.shortcut


def test_argument_errors():
    with pytest.raises(DomainError):
        forge_with_shortcut(MssSpec("nash"), 10, 2)
    with pytest.raises(DomainError):
        forge_with_shortcut(MssSpec("nash"), 10, 11)
    with pytest.raises(DomainError):
        forge_worst_case(MssSpec("nash"), 1)
    with pytest.raises(SpecError):
        forge_worst_case(MssSpec("anytime-exact"), 10)
    with pytest.raises(DomainError):
        forge_theorem4_instance(MssSpec("nash"), 4)


def test_nondegeneracy_examples(rps_game):
    assert nondegeneracy_check(rps_game, [0, 1, 2])
    assert not nondegeneracy_check(Game(np.zeros((2, 2))), [0, 1])
    with pytest.raises(DomainError):
        nondegeneracy_check(rps_game, [])


def test_tangent_directions_point_into_simplex():
    for p in (np.array([1 / 3, 1 / 3, 1 / 3]), np.array([0.5, 0.5, 0.0]), np.array([0.2, 0.0, 0.8])):
        H = tangent_directions(p, 5)
        assert np.allclose(H.sum(axis=1), 0) and np.allclose(np.linalg.norm(H, axis=1), 1)
        inner = H @ H.T
        assert np.all(inner[~np.eye(5, dtype=bool)] < 1 - 1e-3)
        assert np.all(H[:, p <= 0] > 0)


def test_pool_instance_conditions(pool_s3):
    res = pool_s3
    P = res.game.payoff
    core = res.core
    eq = res.equilibrium_support
    out = [i for i in range(50) if i not in eq]
    assert P[core[2], core[0]] == pytest.approx(CORE_PAYOFF) and P[core[2], core[1]] == pytest.approx(CORE_PAYOFF)
    later = [i for i in range(50) if i not in core]
    assert P[np.ix_(later, core[:2])].max() < CORE_PAYOFF
    r = P[np.ix_(eq, out)].min()
    internal = P[np.ix_(eq, eq)]
    assert r > np.abs(internal).max()
    assert nondegeneracy_check(res.game, eq)


def test_pool_instance_population_bounds(pool_s3):
    res = pool_s3
    P = res.game.payoff
    eq = res.equilibrium_support
    out = [i for i in range(50) if i not in eq]
    r = P[np.ix_(eq, out)].min()
    rng = np.random.default_rng(0)
    for _ in range(30):
        pop = tuple(rng.choice(out, size=int(rng.integers(1, 6)), replace=False).tolist())
        assert population_exploitability(res.game, Population(pop)).pe >= r - TAU_LP
    for _ in range(30):
        some_eq = rng.choice(eq, size=int(rng.integers(1, len(eq) + 1)), replace=False).tolist()
        some_out = rng.choice(out, size=int(rng.integers(0, 5)), replace=False).tolist()
        pop = Population(tuple(some_eq + some_out))
        base = population_exploitability(res.game, pop).pe
        assert base < r
        extra = int(rng.choice([i for i in out if i not in some_out]))
        assert population_exploitability(res.game, pop.extend(extra)).pe == pytest.approx(base, abs=TAU_LP)


def test_pool_instance_s1_global_style_bound():
    from psrolab.global_psro import run_global_psro
    res = forge_theorem4_instance(MssSpec("nash"), 50, 1, seed=0)
    rec = run_global_psro(res.game, MssSpec("nash"), init=res.init, k=32, mode="exact-pe", max_rounds=25, seed=0)
    assert rec.converged and rec.iterations_to_converge() <= 4
