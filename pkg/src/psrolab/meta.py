"""Meta-strategy solvers: map a population (and its restricted game) to a mixture."""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import SpecError
from .game import Game, Population, TAU_PROB
from .lp import col_minimax, population_exploitability

MSS_KINDS = ("nash", "uniform", "prd", "alpharank", "anytime-exact", "anytime-rmbr", "scripted")
# solvers that only ever look at the restricted payoff matrix
RESTRICTED_KINDS = ("nash", "uniform", "prd", "alpharank")

_DEFAULTS: dict[str, dict[str, Any]] = {
    "nash": {},
    "uniform": {},
    "prd": {"step_size": 1e-3, "steps": 50_000, "exploration_floor": 1e-3},
    "alpharank": {"alpha": 50.0, "population_size": 50, "perturbation": 1e-6},
    "anytime-exact": {},
    "anytime-rmbr": {"rm_steps": 1000, "samples_per_step": 0, "noise": 0.0},
    "scripted": {"mixtures": [], "fallback": None},
}


@dataclass(frozen=True)
class MssSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MSS_KINDS:
            raise SpecError(f"unknown meta-solver kind {self.kind!r}; expected one of {MSS_KINDS}")
        defaults = _DEFAULTS[self.kind]
        unknown = set(self.params) - set(defaults)
        if unknown:
            raise SpecError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        merged = {**defaults, **self.params}
        if self.kind == "prd":
            if merged["step_size"] <= 0 or merged["steps"] < 0 or not 0 <= merged["exploration_floor"] < 1:
                raise SpecError(f"invalid prd parameters {merged}")
        elif self.kind == "alpharank":
            if merged["alpha"] < 0 or merged["population_size"] < 2 or not 0 < merged["perturbation"] < 1:
                raise SpecError(f"invalid alpharank parameters {merged}")
        elif self.kind == "anytime-rmbr":
            if merged["rm_steps"] < 1:
                raise SpecError("rm_steps must be >= 1")
        elif self.kind == "scripted":
            mixtures = []
            for i, mix in enumerate(merged["mixtures"]):
                arr = np.asarray(mix, dtype=float)
                if arr.ndim != 1 or arr.size == 0 or np.any(arr < -TAU_PROB) or abs(arr.sum() - 1) > TAU_PROB:
                    raise SpecError(f"scripted mixture {i} is not a probability vector")
                mixtures.append(tuple(float(v) for v in arr))
            merged["mixtures"] = tuple(mixtures)
            fb = merged["fallback"]
            if fb is not None and fb not in RESTRICTED_KINDS + ("anytime-exact",):
                raise SpecError(f"invalid fallback kind {fb!r}")
        object.__setattr__(self, "params", merged)

    @property
    def restricted_only(self) -> bool:
        if self.kind == "scripted":
            return True
        return self.kind in RESTRICTED_KINDS

    def to_dict(self) -> dict:
        params = dict(self.params)
        if self.kind == "scripted":
            params["mixtures"] = [list(m) for m in params["mixtures"]]
        return {"kind": self.kind, "params": params}

    @classmethod
    def from_dict(cls, doc) -> "MssSpec":
        if isinstance(doc, str):
            return cls(doc)
        if not isinstance(doc, dict) or "kind" not in doc or set(doc) - {"kind", "params"}:
            raise SpecError(f"meta-solver must look like {{'kind': ..., 'params': {{...}}}}, got {doc!r}")
        return cls(doc["kind"], dict(doc.get("params") or {}))


def _simplex_floor_projection(x: np.ndarray, floor: float) -> np.ndarray:
    """Euclidean projection onto {x : sum x = 1, x_i >= floor}."""
    d = x.size
    floor = min(floor, 1.0 / d)
    budget = 1.0 - d * floor
    y = x - floor
    if budget <= 0:
        return np.full(d, 1.0 / d)
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - budget
    k = np.arange(1, d + 1)
    rho = np.flatnonzero(u - css / k > 0)[-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(y - theta, 0.0) + floor


def prd(matrix: np.ndarray, step_size: float = 1e-3, steps: int = 50_000,
        exploration_floor: float = 1e-3) -> np.ndarray:
    """Projected replicator dynamics from the uniform mixture."""
    a = np.asarray(matrix, dtype=float)
    d = a.shape[0]
    x = np.full(d, 1.0 / d)
    if d == 1:
        return x
    floor = min(exploration_floor, 1.0 / d)
    for _ in range(steps):
        fitness = a @ x
        x = x + step_size * x * (fitness - x @ fitness)
        if x.min() < floor or abs(x.sum() - 1.0) > 1e-12:
            x = _simplex_floor_projection(x, floor)
    return x


def _log_abs_one_minus_exp_neg(v: np.ndarray) -> np.ndarray:
    """log|1 - exp(-v)| for v != 0, without overflow."""
    out = np.empty_like(v)
    pos = v > 0
    out[pos] = np.log(-np.expm1(-v[pos]))
    neg = ~pos
    out[neg] = -v[neg] + np.log(-np.expm1(v[neg]))
    return out


def alpharank(matrix: np.ndarray, alpha: float = 50.0, population_size: int = 50,
              perturbation: float = 1e-6) -> np.ndarray:
    """Single-population AlphaRank stationary distribution of a skew-symmetric game."""
    a = np.asarray(matrix, dtype=float)
    d = a.shape[0]
    if d == 1:
        return np.ones(1)
    m = population_size
    # u[s, r]: selection pressure for mutant r invading a population of s
    u = alpha * m / (m - 1) * a.T
    rho = np.full((d, d), 1.0 / m)
    nz = np.abs(u) > 1e-14
    rho[nz] = np.exp(_log_abs_one_minus_exp_neg(u[nz]) - _log_abs_one_minus_exp_neg(m * u[nz]))
    trans = rho / (d - 1)
    np.fill_diagonal(trans, 0.0)
    np.fill_diagonal(trans, 1.0 - trans.sum(axis=1))
    trans = (1.0 - perturbation) * trans + perturbation / d
    # stationary pi solves pi (P - I) = 0 with sum(pi) = 1
    system = np.vstack([(trans - np.eye(d)).T, np.ones((1, d))])
    rhs = np.zeros(d + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    for _ in range(100):
        if np.abs(pi @ trans - pi).max() <= 1e-12:
            break
        pi = pi @ trans
        pi /= pi.sum()
    return pi


def _restricted(game: Game, pop: Population) -> np.ndarray:
    return game.submatrix(pop.effective)


# Restricted-game solvers are pure functions of the d x d matrix, so replays of
# the same path (forge, then PSRO on the forged game) can share their results.
_CACHE: "OrderedDict[tuple, np.ndarray]" = OrderedDict()
_CACHE_SIZE = 4096


def _cached_restricted(spec: MssSpec, matrix: np.ndarray) -> np.ndarray:
    key = (spec.kind, tuple(sorted(spec.params.items())), matrix.shape, matrix.tobytes())
    hit = _CACHE.get(key)
    if hit is not None:
        _CACHE.move_to_end(key)
        return hit.copy()
    if spec.kind == "nash":
        out = np.ones(1) if matrix.shape[0] == 1 else col_minimax(matrix)[1]
    elif spec.kind == "prd":
        out = prd(matrix, **spec.params)
    else:
        out = alpharank(matrix, **spec.params)
    _CACHE[key] = out.copy()
    if len(_CACHE) > _CACHE_SIZE:
        _CACHE.popitem(last=False)
    return out


def restricted_mixture(spec: MssSpec, matrix: np.ndarray) -> np.ndarray:
    """Run a restricted-game solver directly on a square skew-symmetric matrix."""
    matrix = np.ascontiguousarray(matrix, dtype=float)
    if spec.kind == "uniform":
        return np.full(matrix.shape[0], 1.0 / matrix.shape[0])
    if spec.kind not in ("nash", "prd", "alpharank"):
        raise SpecError(f"{spec.kind} is not a restricted-game solver")
    return _cached_restricted(spec, matrix)


def solve_meta(spec: MssSpec, game: Game, pop: Population, iteration: int = 0, seed: int = 0) -> np.ndarray:
    """Mixture over ``pop.effective``. ``iteration`` counts completed population additions."""
    if not isinstance(pop, Population):
        pop = Population(tuple(pop))
    pop.check(game)
    d = len(pop.effective)
    kind, params = spec.kind, spec.params

    if kind == "scripted":
        script = params["mixtures"]
        if iteration < len(script):
            mix = np.asarray(script[iteration], dtype=float)
            if mix.size > d:
                if np.any(mix[d:] > TAU_PROB):
                    raise SpecError(f"scripted mixture {iteration} has mass beyond effective size {d}")
                mix = mix[:d]
            return np.concatenate([mix, np.zeros(d - mix.size)])
        if params["fallback"] is None:
            raise SpecError(f"script exhausted at iteration {iteration} with no fallback")
        return solve_meta(MssSpec(params["fallback"]), game, pop, iteration, seed)

    if kind in RESTRICTED_KINDS:
        return restricted_mixture(spec, _restricted(game, pop))
    if kind == "anytime-exact":
        return population_exploitability(game, pop).least_exploitable
    if kind == "anytime-rmbr":
        from .rmbr import estimate_pe

        return estimate_pe(game, pop, params["rm_steps"], params["samples_per_step"], seed,
                           noise=params["noise"]).rho
    raise SpecError(f"unhandled kind {kind!r}")
