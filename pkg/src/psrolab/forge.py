"""Adversarial game construction.

Given a restricted-game meta-solver, the forge simulates PSRO with that
solver while it writes the payoff matrix one strategy at a time. Every new
strategy is the unique best response to the solver's current mixture, is
never a best response to any earlier mixture, exploits the current
restricted equilibrium, and beats every earlier strategy. The last strategy
is then a pure equilibrium that PSRO only finds after adding everything.

In shortcut mode the construction additionally keeps a mixture over the
first three strategies (the "core") whose unique best response ends up being
the equilibrium, so a scripted solver reaches equilibrium in three
iterations. With an equilibrium support of size ``s > 1`` the pure
equilibrium is replaced by an ``s``-strategy block, each member exposed by
its own core mixture.

Strategies are built in introduction order; at the end index 0 and
``init`` trade places so that PSRO started from ``init`` follows the path.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, ForgeError, SpecError
from .game import Game, Population, TAU_TIE
from .lp import col_minimax, linprog, population_exploitability, solve_feasibility
from .meta import RESTRICTED_KINDS, MssSpec, restricted_mixture

NASH = MssSpec("nash")
CORE_PAYOFF = 0.95
LATER_PAYOFF_CAP = 0.9
MAX_HALVINGS = 20
_REFRESH_TV = 1e-4


@dataclass
class ForgeResult:
    game: Game
    shortcut: MssSpec
    equilibrium_support: list
    construction_log: list
    target_spec: MssSpec
    init: int = 0
    target_nonconvergent: bool = False
    core: list = field(default_factory=list)
    exposures: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "game": self.game.to_dict(),
            "shortcut": self.shortcut.to_dict(),
            "equilibrium_support": list(self.equilibrium_support),
            "target_spec": self.target_spec.to_dict(),
            "init": self.init,
            "target_nonconvergent": self.target_nonconvergent,
            "core": list(self.core),
            "exposures": [list(map(float, q)) for q in self.exposures],
            "params": self.params,
            "construction_log": self.construction_log,
        }


def _pad(p, n) -> np.ndarray:
    out = np.zeros(n)
    out[: len(p)] = p
    return out


def _check_target(target: MssSpec) -> None:
    if not isinstance(target, MssSpec):
        raise SpecError("target must be an MssSpec")
    if target.kind not in RESTRICTED_KINDS:
        raise SpecError(f"target must read only the restricted game; got {target.kind!r}")


def _label_order(n: int, init: int) -> np.ndarray:
    """label[k] = final index of the k-th introduced strategy."""
    labels = np.arange(n)
    labels[0], labels[init] = init, 0
    return labels


class _Builder:
    """Incremental state of one forge run (introduction-order indices)."""

    def __init__(self, target, n_total, labels, rng, shortcut, pool_instance):
        self.target = target
        self.n_total = n_total
        self.labels = labels
        self.rng = rng
        self.shortcut = shortcut
        self.pool_instance = pool_instance
        self.U = np.zeros((n_total, n_total))
        self.n = 1
        self.protected: list = []  # mixtures whose best response must never change
        self.best: list = []  # introduction index of each protected mixture's BR
        self.log: list = []
        self.surrogate = False
        self.nonconvergent = False
        self.q: Optional[np.ndarray] = None
        self.v: Optional[float] = None
        self.core_mixtures: list = []

    # -- evaluation helpers ------------------------------------------------
    def vals(self, p) -> np.ndarray:
        n = self.n
        return self.U[:n, :n] @ _pad(p, n)

    def br(self, p) -> int:
        vals = self.vals(p)
        ties = np.flatnonzero(vals >= vals.max() - TAU_TIE)
        return int(ties[np.argmin(self.labels[ties])])

    def thresholds(self) -> np.ndarray:
        return np.array([self.vals(p).max() for p in self.protected])

    def core_value(self, q) -> float:
        return float((self.U[: self.n, :3] @ q).max())

    # -- one extension -----------------------------------------------------
    def extend(self, rows, rhs, base, objective, xi, kind="plain", margins=None):
        """Solve for the new payoff row ``u = base + x``; ``x >= 0``.

        ``rows @ u <= rhs`` are hard constraints; each is tightened by the
        worst-case effect of a uniform ``[0, xi]`` perturbation so the
        perturbed point still satisfies them.
        """
        n = self.n
        G = np.array(rows, dtype=float)
        h = np.array(rhs, dtype=float)
        tight = h - xi * np.clip(G, 0.0, None).sum(axis=1)
        rhs_x = tight - G @ base
        if rhs_x.min() < -1e-12:
            raise ForgeError(
                "margin arithmetic produced a negative right-hand side",
                {"step_kind": kind, "n": n, "worst": float(rhs_x.min()), "margins": margins},
            )
        res = solve_feasibility(G, np.clip(rhs_x, 0.0, None), objective=objective)
        if not res.feasible:
            raise ForgeError("feasibility LP infeasible despite nonnegative right-hand side",
                             {"step_kind": kind, "n": n})
        u = base + res.x
        for noise in (self.rng.uniform(0.0, xi, size=n), np.zeros(n)):
            cand = u + noise
            slack = h - G @ cand
            if slack.min() > 0 and cand.min() > 0:
                return cand
        raise ForgeError("perturbed payoff row violates a strict margin", {"step_kind": kind, "n": n})

    def max_margin(self, rows, rhs, kind="plain"):
        """Row ``u >= 0`` maximizing the common slack ``t`` in ``rows @ u + t <= rhs``.

        The returned row is perturbed by uniform noise on ``[0, t/4]``; every
        row here has nonnegative entries summing to at most one or is a
        coordinate bound, so the perturbed row keeps at least ``3t/4`` slack.
        """
        n = self.n
        G = np.array(rows, dtype=float)
        h = np.array(rhs, dtype=float)
        A = np.hstack([G, np.ones((G.shape[0], 1))])
        res = linprog(np.append(np.zeros(n), 1.0), A, h, maximize=True)
        if res.status != "optimal" or res.x[-1] <= 10 * TAU_TIE:
            raise ForgeError("no extension row with a positive margin",
                             {"step_kind": kind, "n": n, "status": res.status,
                              "margin": None if res.x is None else float(res.x[-1])})
        t = float(res.x[-1])
        u = res.x[:n] + self.rng.uniform(0.0, t / 4, size=n)
        if np.min(h - G @ u) <= t / 2:
            raise ForgeError("perturbed payoff row violates a strict margin", {"step_kind": kind, "n": n})
        return u, t

    def place(self, u) -> None:
        n = self.n
        self.U[n, :n] = u
        self.U[:n, n] = -u
        self.n = n + 1


def _ordering_rows(n: int, star: int) -> list:
    rows = []
    for a in range(3):
        if a != star:
            g = np.zeros(n)
            g[star], g[a] = 1.0, -1.0
            rows.append(g)
    return rows


def _box(n: int, pool_instance: bool) -> tuple:
    rows, rhs = list(np.eye(n)), [1.0] * n
    if pool_instance:
        rhs[0] = rhs[1] = LATER_PAYOFF_CAP
    return rows, rhs


def _build_pure(target: MssSpec, n_pure: int, init_labels, rng, shortcut: bool, pool_instance: bool) -> _Builder:
    b = _Builder(target, n_pure, init_labels, rng, shortcut, pool_instance)
    b.U[1, 0], b.U[0, 1] = 1.0, -1.0
    b.n = 2 if n_pure >= 2 else 1
    b.protected.append(np.ones(1))
    b.best.append(1)
    b.core_mixtures.append([1.0])
    b.log.append({"step": 1, "n": 1, "case": "first-response", "eps": None, "e": 0.0, "lp_status": "fixed"})
    step = 1
    core_done = False
    while b.n < n_pure:
        step += 1
        n = b.n
        Ue = b.U[:n, :n]
        nash_mix = restricted_mixture(NASH, Ue)
        p = nash_mix if b.surrogate else restricted_mixture(target, Ue)
        vals = Ue @ p
        e = float(vals.max())
        thresholds = b.thresholds()
        eps = float(thresholds.min())
        eps_eff = min(eps, LATER_PAYOFF_CAP) if pool_instance and n >= 3 else eps
        entry = {"step": step, "n": n, "eps": eps, "e": e, "surrogate": b.surrogate}

        if e >= eps_eff:
            if b.surrogate:
                raise ForgeError("surrogate mixture stalled", {"n": n, "e": e, "eps": eps})
            if shortcut and n <= 2:
                raise ForgeError("target stalled before the three-strategy core exists",
                                 {"n": n, "e": e, "eps": eps})
            best = b.br(p)
            b.protected.append(p)
            b.best.append(best)
            b.surrogate = True
            b.nonconvergent = True
            b.log.append({**entry, "case": "stall", "reused": int(b.labels[best]), "lp_status": "none"})
            continue

        is_final = shortcut and n == n_pure - 1
        box_rows, box_rhs = _box(n, pool_instance and n >= 3)
        prot_rows = [_pad(pt, n) for pt in b.protected]

        if pool_instance and n == 2:
            u = np.array([CORE_PAYOFF, CORE_PAYOFF])
            ok = (u @ _pad(b.protected[0], 2) < thresholds[0]) and (u @ p > e) and (u @ nash_mix > 0)
            if not ok:
                raise ForgeError("fixed second response breaks the target path", {"p": p.tolist()})
            case, margins = "fixed-second", {"c": CORE_PAYOFF}
        elif shortcut and core_done and not is_final and _refresh_needed(p, b.q):
            case = "refresh"
            delta = (eps_eff + e) / 2
            dprime = (eps_eff - e) / 4
            star = _core_star(p)
            alpha = 1 - (eps_eff - e) / (4 * (eps_eff + e))
            eprime = (eps_eff - e) / 16
            base = np.full(n, delta)
            base[star] *= alpha
            pin = (e + eps_eff) / 2
            rows = prot_rows + [-p, -nash_mix, p, -p] + _ordering_rows(n, star) + box_rows
            rhs = ([r - dprime for r in thresholds] + [-e - dprime, -dprime, pin + dprime / 2, -pin + dprime / 2]
                   + [-eprime] * 2 + box_rhs)
            margins = {"delta": delta, "delta_prime": dprime, "alpha": alpha, "eps_prime": eprime, "i_star": star}
            u = b.extend(rows, rhs, base, p, dprime / 16, kind=case, margins=margins)
        elif shortcut and core_done and not is_final:
            case = "outside-extension"
            q = _pad(b.q, n)
            L = max(b.v, e)
            if L >= eps_eff:
                raise ForgeError("shortcut invariant lost", {"v": b.v, "e": e, "eps": eps_eff})
            # every row carries the common margin; q's row keeps the core value from rising
            rows = prot_rows + [-p, q] + list(-np.eye(n)) + box_rows
            rhs = thresholds.tolist() + [-L, b.v] + [0.0] * n + box_rhs
            u, t = b.max_margin(rows, rhs, kind=case)
            margins = {"margin": t, "L": L}
        elif is_final:
            case = "final"
            q = _pad(b.q, n)
            L = max(e, b.v)
            if L >= eps_eff:
                raise ForgeError("shortcut invariant lost at the final step", {"v": b.v, "e": e, "eps": eps_eff})
            delta = (eps_eff + L) / 2
            dprime = (eps_eff - L) / 4
            base = np.full(n, delta)
            rows = prot_rows + [-p, -nash_mix, -q, p] + box_rows
            rhs = [r - dprime for r in thresholds] + [-e - dprime, -dprime, -b.v - dprime, eps_eff] + box_rhs
            margins = {"delta": delta, "delta_prime": dprime, "L": L}
            u = b.extend(rows, rhs, base, p + q, dprime / 8, kind=case, margins=margins)
        elif shortcut and n == 3:
            case = "core"
            delta = (eps_eff + e) / 2
            dprime = (eps_eff - e) / 4
            star = _core_star(p)
            alpha = 1 - (eps_eff - e) / (4 * (eps_eff + e))
            eprime = (eps_eff - e) / 16
            base = np.full(n, delta)
            base[star] *= alpha
            rows = prot_rows + [-p, -nash_mix, p] + _ordering_rows(n, star) + box_rows
            rhs = [r - dprime for r in thresholds] + [-e - dprime, -dprime, eps_eff] + [-eprime] * 2 + box_rhs
            margins = {"delta": delta, "delta_prime": dprime, "alpha": alpha, "eps_prime": eprime, "i_star": star}
            u = b.extend(rows, rhs, base, p, dprime / 8, kind=case, margins=margins)
        else:
            case = "extension"
            delta = (eps_eff + e) / 2
            dprime = (eps_eff - e) / 4
            base = np.full(n, delta)
            rows = prot_rows + [-p, -nash_mix, p] + box_rows
            rhs = [r - dprime for r in thresholds] + [-e - dprime, -dprime, eps_eff] + box_rhs
            margins = {"delta": delta, "delta_prime": dprime}
            u = b.extend(rows, rhs, base, p, dprime / 8, kind=case, margins=margins)

        if n == 2:
            b.core_mixtures.append([float(v) for v in p])
        b.place(u)
        b.protected.append(p)
        b.best.append(n)
        new_eps = float(b.thresholds().min())
        if case in ("core", "refresh"):
            v, q, _ = col_minimax(b.U[: b.n, :3])
            b.q, b.v = q, v
            core_done = True
        elif case == "outside-extension":
            b.v = b.core_value(b.q)
        if shortcut and core_done and case != "final" and not b.v < new_eps:
            raise ForgeError("shortcut mixture became as exploitable as the path threshold",
                             {"v": b.v, "eps": new_eps, "case": case})
        entry.update({"case": case, "margins": margins, "lp_status": "feasible", "eps_after": new_eps,
                      "v": b.v, "added": int(b.labels[n]) if n < len(b.labels) else n})
        b.log.append(entry)
    return b


def _core_star(p) -> int:
    """Core coordinate (1 or 2) forced to be the new strategy's weakest matchup."""
    return 1 if p[1] <= p[2] else 2


def _refresh_needed(p, q) -> bool:
    qp = _pad(q, p.size)
    outside = float(p[3:].sum())
    return outside <= 1e-12 and 0.5 * float(np.abs(p - qp).sum()) < _REFRESH_TV


def _path_margins(b: _Builder, U: np.ndarray) -> list:
    out = []
    for p, best in zip(b.protected, b.best):
        vals = U[: b.n, : b.n] @ _pad(p, b.n)
        others = np.delete(vals, best)
        out.append(float(vals[best] - others.max()) if others.size else math.inf)
    return out


def tangent_directions(p: np.ndarray, s: int, tol: float = 1e-12) -> np.ndarray:
    """``s`` distinct unit directions in the plane ``sum = 0`` pointing into the simplex at ``p``."""
    e1 = np.array([1.0, -1.0, 0.0]) / math.sqrt(2)
    e2 = np.array([1.0, 1.0, -2.0]) / math.sqrt(6)
    zero = np.flatnonzero(p <= tol)
    grid = np.linspace(0.0, 2 * math.pi, 7200, endpoint=False)
    h = np.outer(np.cos(grid), e1) + np.outer(np.sin(grid), e2)
    ok = np.all(h[:, zero] > 0, axis=1) if zero.size else np.ones(grid.size, dtype=bool)
    if not ok.any():
        raise ForgeError("no feasible tangent direction at the shortcut mixture", {"p": p.tolist()})
    if ok.all():
        angles = np.arange(s) * 2 * math.pi / s
    else:
        # the feasible arc, unwrapped so it is contiguous
        start = np.flatnonzero(ok & ~np.roll(ok, 1))[0]
        idx = (start + np.arange(grid.size)) % grid.size
        arc = idx[: np.flatnonzero(~ok[idx])[0]]
        lo, hi = grid[arc[0]], grid[arc[0]] + (arc.size - 1) * (2 * math.pi / grid.size)
        angles = lo + (hi - lo) * (np.arange(s) + 1) / (s + 1)
    return np.outer(np.cos(angles), e1) + np.outer(np.sin(angles), e2)


def _cyclic_block(s: int, rng) -> np.ndarray:
    block = np.zeros((s, s))
    half = (s - 1) // 2
    for i in range(s):
        for k in range(1, half + 1):
            block[i, (i + k) % s] = 1.0
            block[(i + k) % s, i] = -1.0
    noise = rng.uniform(-0.1, 0.1, size=(s, s))
    return block + (noise - noise.T) / 2


def nondegeneracy_check(game, support, max_exhaustive: int = 6, samples: int = 64, seed: int = 0) -> bool:
    """True iff every tested subgame on ``support`` has a unique equilibrium.

    All nonempty subsets are tested when the support has at most
    ``max_exhaustive`` members; otherwise the full support plus ``samples``
    random subsets.
    """
    A = game.payoff if isinstance(game, Game) else np.asarray(game, dtype=float)
    support = [int(i) for i in support]
    if not support:
        raise DomainError("support must be nonempty")
    if len(support) <= max_exhaustive:
        subsets = [list(c) for r in range(1, len(support) + 1) for c in itertools.combinations(support, r)]
    else:
        rng = np.random.default_rng(seed)
        subsets = [support]
        for _ in range(samples):
            k = int(rng.integers(1, len(support) + 1))
            subsets.append(sorted(rng.choice(support, size=k, replace=False).tolist()))
    rng = np.random.default_rng(seed)
    return all(_unique_equilibrium(A[np.ix_(sub, sub)], rng) for sub in subsets)


def _unique_equilibrium(M: np.ndarray, rng) -> bool:
    d = M.shape[0]
    if d == 1:
        return True
    value, y, _ = col_minimax(M)
    # equilibrium set: {y in simplex : M y <= value}
    A_ub = M
    b_ub = np.full(d, value + 1e-12)
    A_eq = np.ones((1, d))
    ref = None
    for _ in range(2):
        c = rng.standard_normal(d)
        for sign in (1.0, -1.0):
            res = linprog(sign * c, A_ub, b_ub, A_eq, [1.0])
            if res.status != "optimal":
                return False
            if ref is None:
                ref = res.x
            elif np.abs(res.x - ref).max() > 1e-7:
                return False
    if np.abs(ref - y).max() > 1e-7:
        return False
    supp = np.flatnonzero(y > 1e-9)
    active = np.flatnonzero(M @ y >= value - 1e-9)
    system = np.vstack([M[np.ix_(active, supp)], np.ones((1, supp.size))])
    return int(np.linalg.matrix_rank(system, tol=1e-9)) == supp.size


def _expand_support(b: _Builder, s: int, rng, pool_instance: bool, shortcut_active: bool):
    """Replace the pure equilibrium (last strategy) by an ``s``-strategy block."""
    n_pure = b.n
    n_total = n_pure - 1 + s
    star = n_pure - 1
    out = np.arange(n_pure - 1)
    Up = b.U[:n_pure, :n_pure]
    star_row = Up[star, :star]
    exposures = []
    params: dict = {}

    mu = min(_path_margins(b, Up))
    if shortcut_active:
        p = b.q
        u = star_row[:3]
        gaps = u @ p - Up[out][:, :3] @ p
        gamma = float(gaps.min())
        L = float(np.linalg.norm(u[None, :] - Up[out][:, :3], axis=1).max())
        H = tangent_directions(p, s)
        inner = H @ H.T
        alpha = float(min(1 - inner[i, j] for i in range(s) for j in range(s) if i != j))
        if alpha <= 1e-3:
            raise ForgeError("tangent directions too close", {"alpha": alpha})
        shrink = [p[j] / -H[i, j] for i in range(s) for j in range(3) if H[i, j] < 0 and p[j] > 0]
        delta = min(0.5 * gamma / L, 0.5 * min(shrink) if shrink else 1.0)
        params.update({"gamma": gamma, "L": L, "alpha_min": alpha})
    else:
        H = None
        delta = 0.0
    eta = 0.2 * mu
    if pool_instance:
        eta = min(eta, 0.02)
    xi = min(0.2 * mu, 0.25 * float(star_row.min()))

    for attempt in range(MAX_HALVINGS + 1):
        G = np.zeros((n_total, n_total))
        G[: n_pure - 1, : n_pure - 1] = Up[: n_pure - 1, : n_pure - 1]
        eq = np.arange(star, n_total)
        for i, k in enumerate(eq):
            row = star_row + rng.uniform(-xi, xi, size=star)
            if shortcut_active:
                d = eta * (H[i] - (p @ H[i]))
                row[:3] = star_row[:3] + d
            G[k, :star] = row
            G[:star, k] = -row
        r = float(G[star:, :star].min()) if star > 0 else 1.0
        for _ in range(20):
            block = _cyclic_block(s, rng)
            block *= 0.5 * r / np.abs(block).max()
            if nondegeneracy_check(block, range(s)):
                _, y, _ = col_minimax(block)
                if y.min() > 1e-6:
                    break
        else:
            raise ForgeError("could not draw a nondegenerate full-support block", {"s": s})
        G[star:, star:] = block

        failures = []
        if star > 0 and r <= 0:
            failures.append("support does not beat every outside strategy")
        for p_t, best in zip(b.protected, b.best):
            vals = G[:n_total, : len(p_t)] @ p_t
            if best == star:
                top = int(np.argmax(vals))
                if top < star or np.sort(vals)[-1] - vals[:star].max() <= 10 * TAU_TIE:
                    failures.append("final path step no longer selects the support")
            else:
                others = np.delete(vals, best)
                if vals[best] - others.max() <= 10 * TAU_TIE:
                    failures.append(f"path mixture lost its best response {best}")
        if shortcut_active:
            exposures = [p + delta * H[i] for i in range(s)]
            for i, qi in enumerate(exposures):
                if qi.min() < 0:
                    failures.append("exposure left the simplex")
                    continue
                vals = G[:, :3] @ qi
                j = star + i
                others = np.delete(vals, j)
                if vals[j] - others.max() <= 10 * TAU_TIE:
                    failures.append(f"exposure {i} is not uniquely answered")
        if not failures:
            params.update({"delta": delta, "eta": eta, "xi": xi, "r": r, "attempts": attempt + 1,
                           "separation": delta * eta * params.get("alpha_min", 0.0)})
            return G, exposures, params
        delta, eta, xi = delta / 2, eta / 2, xi / 2
    raise ForgeError("perturbations collapsed after repeated halving", {"failures": failures[:5]})


def _finish(target, b_or_matrix, n, init, labels, support_intro, script, log, nonconvergent, exposures, params,
            core):
    U = b_or_matrix
    P = np.empty((n, n))
    P[np.ix_(labels, labels)] = U
    game = Game((P - P.T) / 2)
    if script is None:
        shortcut = MssSpec("scripted", {"mixtures": [], "fallback": "nash"})
    else:
        shortcut = MssSpec("scripted", {"mixtures": script, "fallback": "nash"})
    return ForgeResult(
        game=game,
        shortcut=shortcut,
        equilibrium_support=sorted(int(labels[k]) for k in support_intro),
        construction_log=log,
        target_spec=target,
        init=init,
        target_nonconvergent=nonconvergent,
        core=[int(labels[k]) for k in core],
        exposures=exposures,
        params=params,
    )


def _forge(target: MssSpec, n: int, s: int, init: int, seed: int, shortcut: bool, pool_instance: bool) -> ForgeResult:
    _check_target(target)
    if n < 1:
        raise DomainError("n must be >= 1")
    if s < 1 or s % 2 == 0 or s > n:
        raise DomainError(f"support size must be odd and in [1, n], got {s}")
    if not 0 <= init < n:
        raise DomainError(f"init {init} outside [0, {n})")
    rng = np.random.default_rng(seed)
    labels = _label_order(n, init)
    n_pure = n - s + 1
    active = shortcut and n_pure >= 5
    if n_pure == 1:
        block_rng = np.random.default_rng(seed)
        for _ in range(20):
            block = _cyclic_block(s, block_rng)
            block /= np.abs(block).max()
            if nondegeneracy_check(block, range(s)):
                break
        return _finish(target, block, n, init, labels, range(s), None,
                       [{"step": 0, "case": "block-only"}], False, [], {}, [])
    b = _build_pure(target, n_pure, labels, rng, active, pool_instance)
    log = b.log
    params = {"min_path_margin": min(_path_margins(b, b.U[: b.n, : b.n])), "shortcut_active": active}
    script = None
    exposures: list = []
    if s == 1:
        if active:
            script = [b.core_mixtures[0], b.core_mixtures[1], [float(v) for v in b.q]]
            exposures = [b.q.copy()]
        U = b.U[:n_pure, :n_pure]
        support = [n_pure - 1]
    else:
        U, exposures, extra = _expand_support(b, s, rng, pool_instance, active)
        params.update(extra)
        if active:
            script = [b.core_mixtures[0], b.core_mixtures[1]] + [[float(v) for v in q] for q in exposures]
        support = list(range(n_pure - 1, n))
        log.append({"step": "support", "case": "support-block", "s": s, "params": extra, "lp_status": "none"})
    core = [0, 1, 2] if active else []
    return _finish(target, U, n, init, labels, support, script, log, b.nonconvergent, exposures, params, core)


def forge_worst_case(target: MssSpec, n: int, init: int = 0, seed: int = 0) -> ForgeResult:
    """Game on which PSRO with ``target`` needs every strategy (or never converges)."""
    if n < 2:
        raise DomainError("n must be >= 2")
    return _forge(target, n, 1, init, seed, shortcut=False, pool_instance=False)


def forge_with_shortcut(target: MssSpec, n: int, s: int = 1, init: int = 0, seed: int = 0) -> ForgeResult:
    """Worst-case game for ``target`` plus a scripted solver reaching equilibrium in ``min(s+2, n-1)``."""
    if n < 2:
        raise DomainError("n must be >= 2")
    return _forge(target, n, s, init, seed, shortcut=True, pool_instance=False)


def forge_theorem4_instance(target: MssSpec, n: int, s: int = 1, seed: int = 0, init: int = 0) -> ForgeResult:
    """Shortcut game whose first two responses and support block suit pool-based selection.

    The second strategy scores ``CORE_PAYOFF`` against both of the first two,
    later strategies are held to ``LATER_PAYOFF_CAP`` against them, and the
    support block is nondegenerate with entries smaller than every cross
    payoff.
    """
    if n < 5:
        raise DomainError("the instance needs n >= 5")
    res = _forge(target, n, s, init, seed, shortcut=True, pool_instance=True)
    support = res.equilibrium_support
    if not nondegeneracy_check(res.game, support):
        raise ForgeError("support subgames are degenerate", {"support": support})
    res.params["pool_instance"] = {"c": CORE_PAYOFF, "clamp": LATER_PAYOFF_CAP}
    return res
