"""Dense two-phase tableau simplex and the game-theoretic LPs built on it.

Bland's rule is the reference pivoting path: it cannot cycle and the basis it
ends on depends only on the input. The ``dantzig`` rule picks the most
negative reduced cost and drops back to Bland after a run of degenerate
pivots; it is faster on large games and lands on the same optimal value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, SolverError
from .game import Game, Population, TAU_TIE

TAU_LP = 1e-9

_PIVOT_TOL = 1e-11
_COST_TOL = 1e-11
_PHASE1_TOL = 1e-9
_DEGENERATE_SWITCH = 50

RULES = ("bland", "dantzig")


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[np.ndarray]
    fun: Optional[float]
    iterations: int
    basis: Optional[np.ndarray] = None


def _pivot(t: np.ndarray, row: int, col: int) -> None:
    t[row] /= t[row, col]
    factors = t[:, col].copy()
    factors[row] = 0.0
    t -= np.outer(factors, t[row])


def _entering(costs: np.ndarray, rule: str, degenerate_run: int) -> int:
    neg = np.flatnonzero(costs < -_COST_TOL)
    if neg.size == 0:
        return -1
    if rule == "bland" or degenerate_run >= _DEGENERATE_SWITCH:
        return int(neg[0])
    return int(neg[np.argmin(costs[neg])])


def _leaving(t: np.ndarray, col: int, basis: np.ndarray) -> int:
    m = t.shape[0] - 1
    column = t[:m, col]
    rows = np.flatnonzero(column > _PIVOT_TOL)
    if rows.size == 0:
        return -1
    ratios = t[rows, -1] / column[rows]
    best = ratios.min()
    ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
    return int(ties[np.argmin(basis[ties])])


def _run(t, basis, n_active, rule, max_iter, counter):
    """Optimize the tableau in place over the first ``n_active`` columns."""
    degenerate_run = 0
    while True:
        col = _entering(t[-1, :n_active], rule, degenerate_run)
        if col < 0:
            return "optimal"
        row = _leaving(t, col, basis)
        if row < 0:
            return "unbounded"
        degenerate_run = degenerate_run + 1 if t[row, -1] <= 1e-12 else 0
        _pivot(t, row, col)
        basis[row] = col
        counter[0] += 1
        if counter[0] > max_iter:
            raise SolverError(
                "simplex iteration limit reached",
                {"iterations": counter[0], "rule": rule, "rows": t.shape[0] - 1},
            )


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, *, maximize=False,
            rule: str = "bland", max_iter: Optional[int] = None) -> LPResult:
    """Optimize ``c @ x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``."""
    if rule not in RULES:
        raise DomainError(f"unknown pivot rule {rule!r}")
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    if A_ub.shape != (b_ub.size, n) or A_eq.shape != (b_eq.size, n):
        raise DomainError("constraint shapes do not match the objective length")
    for arr in (c, A_ub, b_ub, A_eq, b_eq):
        if not np.all(np.isfinite(arr)):
            raise DomainError("LP data contains non-finite entries")
    cost = -c if maximize else c

    m_ub, m_eq = b_ub.size, b_eq.size
    m = m_ub + m_eq
    # columns: structural | slacks | artificials
    A_std = np.zeros((m, n + m_ub))
    A_std[:m_ub, :n] = A_ub
    A_std[:m_ub, n:] = np.eye(m_ub)
    A_std[m_ub:, :n] = A_eq
    rhs = np.concatenate([b_ub, b_eq])
    flip = rhs < 0
    A_std[flip] *= -1.0
    rhs = np.where(flip, -rhs, rhs)

    needs_art = np.ones(m, dtype=bool)
    needs_art[:m_ub] = flip[:m_ub]
    art_rows = np.flatnonzero(needs_art)
    n_std = n + m_ub
    n_art = art_rows.size

    t = np.zeros((m + 1, n_std + n_art + 1))
    t[:m, :n_std] = A_std
    t[:m, -1] = rhs
    basis = np.empty(m, dtype=int)
    basis[:m_ub] = n + np.arange(m_ub)
    for k, r in enumerate(art_rows):
        t[r, n_std + k] = 1.0
        basis[r] = n_std + k

    if max_iter is None:
        max_iter = 50 * (m + n_std + 10)
    counter = [0]

    if n_art:
        t[-1, :] = -t[art_rows].sum(axis=0)
        t[-1, n_std:n_std + n_art] = 0.0
        _run(t, basis, n_std + n_art, "bland" if rule == "bland" else rule, max_iter, counter)
        if -t[-1, -1] > _PHASE1_TOL * max(1.0, np.abs(rhs).max(initial=0.0)):
            return LPResult("infeasible", None, None, counter[0])
        # drive zero-level artificials out of the basis; drop redundant rows
        keep = np.ones(m + 1, dtype=bool)
        for r in range(m):
            if basis[r] >= n_std:
                cand = np.flatnonzero(np.abs(t[r, :n_std]) > 1e-9)
                if cand.size:
                    _pivot(t, r, int(cand[0]))
                    basis[r] = int(cand[0])
                else:
                    keep[r] = False
        t = np.delete(t[keep], np.s_[n_std:n_std + n_art], axis=1)
        basis = basis[keep[:m]]
        A_std = A_std[keep[:m]]
        rhs = rhs[keep[:m]]

    full_cost = np.concatenate([cost, np.zeros(m_ub)])
    t[-1, :n_std] = full_cost - full_cost[basis] @ t[:-1, :n_std]
    t[-1, -1] = -full_cost[basis] @ t[:-1, -1]
    status = _run(t, basis, n_std, rule, max_iter, counter)
    if status == "unbounded":
        return LPResult("unbounded", None, None, counter[0])

    xs = np.zeros(n_std)
    xs[basis] = t[:-1, -1]
    if basis.size:
        try:
            refined = np.linalg.solve(A_std[:, basis], rhs)
            if np.all(refined >= -1e-12) and np.max(np.abs(refined - t[:-1, -1])) < 1e-6:
                xs[basis] = refined
        except np.linalg.LinAlgError:
            pass
    xs = np.clip(xs, 0.0, None)
    x = xs[:n]
    return LPResult("optimal", x, float(c @ x), counter[0], basis.copy())


@dataclass
class GameSolution:
    value: float
    row_strategy: np.ndarray
    col_strategy: np.ndarray
    residual: float
    iterations: int = 0


def _normalize(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def col_minimax(A: np.ndarray, rule: str = "bland"):
    """Column player's LP: min_y max_i (A y)_i over the simplex. Returns (value, y, iterations).

    Internally the LP runs on ``A + shift`` with every entry >= 1, in the
    classic form ``max 1 @ z`` s.t. ``(A + shift) z <= 1``; its right-hand
    side is strictly positive, which keeps the simplex far from the
    all-degenerate pivots of the free-value formulation. The reported value
    is re-evaluated on the untouched matrix.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    shift = 1.0 - float(A.min())
    res = linprog(np.ones(n), A + shift, np.ones(m), maximize=True, rule=rule)
    if res.status != "optimal" or res.fun <= 0:
        raise SolverError(f"minimax LP ended {res.status}", {"iterations": res.iterations, "shape": A.shape})
    y = _normalize(res.x)
    return float(np.max(A @ y)), y, res.iterations


def solve_matrix_game(A, rule: str = "bland") -> GameSolution:
    """Maximin mixture for the row player and minimax mixture for the column player."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or 0 in A.shape:
        raise DomainError(f"payoff matrix must be 2-D and nonempty, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError("payoff matrix contains non-finite entries")
    col_value, y, it_col = col_minimax(A, rule)
    _, x, it_row = col_minimax(-A.T, rule)
    row_value = float(np.min(x @ A))
    gap = col_value - row_value
    scale = max(1.0, float(np.abs(A).max()))
    if abs(gap) > 1e-7 * scale:
        raise SolverError(
            "duality gap too large",
            {"row_security": row_value, "col_security": col_value, "iterations": it_col + it_row},
        )
    return GameSolution(0.5 * (row_value + col_value), x, y, abs(gap), it_col + it_row)


@dataclass
class PopulationExploitability:
    pe: float
    least_exploitable: np.ndarray
    full_br: int

    def __iter__(self):
        return iter((self.pe, self.least_exploitable, self.full_br))


def population_exploitability(game: Game, pop, rule: str = "bland") -> PopulationExploitability:
    """Smallest worst-case loss of a mixture over the population against the full strategy set."""
    if not isinstance(pop, Population):
        pop = Population(tuple(pop))
    pop.check(game)
    cross = game.payoff[:, list(pop.effective)]
    if cross.shape[1] == 1:
        sigma = np.ones(1)
        pe = float(cross[:, 0].max())
    else:
        pe, sigma, _ = col_minimax(cross, rule)
    vals = cross @ sigma
    full_br = int(np.flatnonzero(vals >= vals.max() - TAU_TIE)[0])
    return PopulationExploitability(pe, sigma, full_br)


@dataclass
class FeasibilityResult:
    status: str  # "feasible" | "infeasible"
    x: Optional[np.ndarray] = None
    certificate: Optional[np.ndarray] = None

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def solve_feasibility(A, b, objective=None, rule: str = "bland") -> FeasibilityResult:
    """Find ``x >= 0`` with ``A x <= b`` or a Farkas certificate ``y >= 0, A^T y >= 0, b^T y < 0``.

    With ``objective`` given, the returned point maximizes ``objective @ x``
    over the feasible set (the LP must then be bounded).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if A.shape[0] != b.size:
        raise DomainError(f"A has {A.shape[0]} rows but b has {b.size} entries")
    k = A.shape[1]
    c = np.zeros(k) if objective is None else np.asarray(objective, dtype=float)
    res = linprog(c, A, b, maximize=True, rule=rule)
    if res.status == "optimal":
        return FeasibilityResult("feasible", x=res.x)
    if res.status == "unbounded":
        raise SolverError("feasibility objective is unbounded", {"iterations": res.iterations})
    if np.all(b >= 0):
        raise SolverError("phase one reported infeasible with nonnegative right-hand side",
                          {"iterations": res.iterations})
    # certificate LP: y >= 0, A^T y >= 0, b^T y = -1, pushing A^T y toward zero
    m = b.size
    cert = linprog(A.sum(axis=1), -A.T, np.zeros(k), b[None, :], [-1.0], rule=rule)
    if cert.status != "optimal":
        raise SolverError("no Farkas certificate found for an infeasible system",
                          {"iterations": res.iterations + cert.iterations, "status": cert.status})
    y = cert.x[:m]
    return FeasibilityResult("infeasible", certificate=y / y.max())
