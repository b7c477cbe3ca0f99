"""Symmetric zero-sum games, populations, best responses and exploitability.

A game is a square skew-symmetric payoff matrix ``A`` where ``A[i, j]`` is
the row player's payoff for strategy ``i`` against strategy ``j``. Mixtures
are plain 1-D numpy arrays; a mixture "over a population" is indexed by the
population's effective members.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, GameFileError

TAU_SYM = 1e-9
TAU_PROB = 1e-9
TAU_TIE = 1e-9

GAME_KINDS = ("disc-elo-noise", "gaussian-skew", "from-file")


@dataclass(frozen=True, eq=False)
class Game:
    payoff: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        a = np.array(self.payoff, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DomainError(f"payoff must be a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DomainError("payoff contains non-finite entries")
        resid = skew_residual(a)
        if resid > TAU_SYM:
            raise DomainError(f"payoff is not skew-symmetric (residual {resid:.3e} > {TAU_SYM:g})")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != a.shape[0]:
                raise DomainError(f"{len(labels)} labels for {a.shape[0]} strategies")
            object.__setattr__(self, "labels", labels)
        a.setflags(write=False)
        object.__setattr__(self, "payoff", a)

    @property
    def n(self) -> int:
        return self.payoff.shape[0]

    def submatrix(self, rows, cols=None) -> np.ndarray:
        cols = rows if cols is None else cols
        return self.payoff[np.ix_(list(rows), list(cols))]

    def to_dict(self) -> dict:
        d = {"n": self.n, "payoff": self.payoff.tolist()}
        if self.labels is not None:
            d["labels"] = list(self.labels)
        return d

    def __eq__(self, other):
        if not isinstance(other, Game):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.payoff, other.payoff)

    __hash__ = None


def skew_residual(a: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0.0
    return float(max(np.max(np.abs(a + a.T)), np.max(np.abs(np.diag(a)))))


@dataclass(frozen=True)
class Population:
    """Ordered restricted strategy list; duplicates collapse in ``effective``."""

    members: tuple
    effective: tuple = field(init=False, repr=False)

    def __post_init__(self):
        members = tuple(int(m) for m in self.members)
        if not members:
            raise DomainError("population must be nonempty")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "effective", tuple(dict.fromkeys(members)))

    def check(self, game: Game) -> "Population":
        bad = [m for m in self.members if not 0 <= m < game.n]
        if bad:
            raise DomainError(f"population indices {bad} outside [0, {game.n})")
        return self

    def extend(self, *indices) -> "Population":
        return Population(self.members + tuple(int(i) for i in indices))

    def position(self, index: int) -> int:
        """Slot of a full-game strategy in the effective view."""
        return self.effective.index(int(index))

    def __len__(self):
        return len(self.members)


def check_mixture(sigma, size: int, name: str = "sigma") -> np.ndarray:
    """Validate a probability vector. Inputs off the simplex are rejected, never renormalized."""
    p = np.asarray(sigma, dtype=float)
    if p.ndim != 1 or p.shape[0] != size:
        raise DomainError(f"{name} has shape {p.shape}, expected ({size},)")
    if not np.all(np.isfinite(p)) or np.any(p < -TAU_PROB):
        raise DomainError(f"{name} has negative or non-finite entries")
    if abs(p.sum() - 1.0) > TAU_PROB:
        raise DomainError(f"{name} sums to {p.sum():.12g}, not 1")
    return np.clip(p, 0.0, None)


def _domain(game: Game, sigma, members) -> tuple:
    if members is None:
        members = range(game.n)
    if isinstance(members, Population):
        members = members.check(game).effective
    members = [int(m) for m in members]
    if any(not 0 <= m < game.n for m in members):
        raise DomainError(f"mixture domain {members} not valid for a {game.n}-strategy game")
    return members, check_mixture(sigma, len(members))


def lift(sigma, members, n: int) -> np.ndarray:
    """Embed a mixture over ``members`` into the full strategy set (duplicates add up)."""
    if isinstance(members, Population):
        members = members.effective
    full = np.zeros(n)
    np.add.at(full, np.asarray(list(members), dtype=int), np.asarray(sigma, dtype=float))
    return full


def payoff_vs_mixture(game: Game, row: int, sigma, members=None) -> float:
    members, p = _domain(game, sigma, members)
    if not 0 <= row < game.n:
        raise DomainError(f"row {row} outside [0, {game.n})")
    return float(game.payoff[row, members] @ p)


def row_values(game: Game, sigma, members=None) -> np.ndarray:
    """Payoff of every full-game strategy against the mixture."""
    members, p = _domain(game, sigma, members)
    return game.payoff[:, members] @ p


def best_response(game: Game, sigma, members=None, tol: float = TAU_TIE):
    """Return ``(index, value, br_set)``; the index is the lowest one in the tie set."""
    vals = row_values(game, sigma, members)
    value = float(vals.max())
    br_set = [int(i) for i in np.flatnonzero(vals >= value - tol)]
    return br_set[0], value, br_set


def exploitability(game: Game, sigma) -> float:
    """max_pi U(pi, sigma) - U(sigma, sigma) for the symmetric profile (sigma, sigma)."""
    p = check_mixture(sigma, game.n)
    vals = game.payoff @ p
    return float(vals.max() - p @ vals)


def generate_game(kind: str, n: int = 0, noise: float = 0.0, seed: int = 0, path=None) -> Game:
    """Build a game deterministically from ``(kind, n, noise, seed)``.

    ``disc-elo-noise`` is a house recipe (no canonical generator exists): each
    strategy gets an Elo rating ``r_i ~ N(0, 1)`` and a 2-D disc embedding
    ``v_i ~ N(0, I)``; the payoff is ``tanh(r_i - r_j) + v_i^T J v_j`` plus
    Gaussian noise of std ``noise``, antisymmetrized. ``gaussian-skew`` is
    i.i.d. standard normal entries (plus the optional noise layer),
    antisymmetrized.
    """
    if kind == "from-file":
        if path is None:
            raise DomainError("from-file requires a path")
        return load_game(path)
    if kind not in GAME_KINDS:
        raise DomainError(f"unknown game kind {kind!r}; expected one of {GAME_KINDS}")
    if n < 1:
        raise DomainError("n must be >= 1")
    if noise < 0:
        raise DomainError("noise must be >= 0")
    rng = np.random.default_rng(seed)
    if kind == "gaussian-skew":
        a = rng.standard_normal((n, n))
        if noise > 0:
            a = a + noise * rng.standard_normal((n, n))
    else:
        ratings = rng.standard_normal(n)
        disc = rng.standard_normal((n, 2))
        j = np.array([[0.0, 1.0], [-1.0, 0.0]])
        a = np.tanh(ratings[:, None] - ratings[None, :]) + disc @ j @ disc.T
        if noise > 0:
            a = a + noise * rng.standard_normal((n, n))
    return Game((a - a.T) / 2.0)


def load_game(path) -> Game:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise GameFileError(f"cannot read game file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFileError(f"invalid JSON in {path}: {exc.msg}", exc.lineno, exc.colno) from exc
    return game_from_dict(doc, source=str(path))


def game_from_dict(doc, source: str = "<dict>") -> Game:
    if not isinstance(doc, dict) or "payoff" not in doc or "n" not in doc:
        raise GameFileError(f"{source}: expected an object with 'n' and 'payoff'")
    extra = set(doc) - {"n", "payoff", "labels"}
    if extra:
        raise GameFileError(f"{source}: unknown keys {sorted(extra)}")
    payoff = doc["payoff"]
    n = doc["n"]
    if not isinstance(n, int) or not isinstance(payoff, list) or len(payoff) != n:
        raise GameFileError(f"{source}: 'payoff' must be a list of {n} rows")
    for i, row in enumerate(payoff):
        if not isinstance(row, list) or len(row) != n:
            raise GameFileError(f"{source}: row {i} must have {n} entries")
    try:
        return Game(np.array(payoff, dtype=float), labels=doc.get("labels"))
    except (TypeError, ValueError) as exc:
        raise GameFileError(f"{source}: {exc}") from exc


def save_game(game: Game, path) -> None:
    Path(path).write_text(json.dumps(game.to_dict()) + "\n")


def rps() -> Game:
    return Game(
        np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]]),
        labels=("rock", "paper", "scissors"),
    )
