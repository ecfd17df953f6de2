"""Dense two-phase simplex over the probability simplex.

Every program has the implicit constraints ``p >= 0`` and ``sum(p) == 1``,
which keeps the feasible set bounded.  Pivoting follows Bland's
smallest-index rule, so the run never cycles and the returned vertex is a
deterministic function of the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from jointdp.errors import MechanismError

PIVOT_TOL = 1e-11
COST_TOL = 1e-11
FEAS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """Optimize ``c @ p`` subject to ``A_ub p <= b_ub``, ``A_eq p == b_eq``.

    ``p`` additionally lies on the probability simplex.
    """

    c: np.ndarray
    a_ub: np.ndarray = None
    b_ub: np.ndarray = None
    a_eq: np.ndarray = None
    b_eq: np.ndarray = None
    maximize: bool = True

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        n = c.size
        if n == 0:
            raise MechanismError("linear program needs at least one variable")
        for a_name, b_name in (("a_ub", "b_ub"), ("a_eq", "b_eq")):
            a = getattr(self, a_name)
            b = getattr(self, b_name)
            a = np.zeros((0, n)) if a is None else np.asarray(a, dtype=float).reshape(-1, n)
            b = np.zeros(0) if b is None else np.asarray(b, dtype=float).reshape(-1)
            if a.shape[0] != b.size:
                raise MechanismError(f"{a_name} has {a.shape[0]} rows but {b_name} has {b.size}")
            object.__setattr__(self, a_name, a)
            object.__setattr__(self, b_name, b)
        object.__setattr__(self, "c", c)

    @property
    def n_vars(self) -> int:
        return self.c.size

    def with_rows(self, a_ub=None, b_ub=None, a_eq=None, b_eq=None, c=None, maximize=None) -> "LinearProgram":
        """A copy with extra constraint rows (and optionally a new objective)."""
        def stack(old, new, width):
            if new is None:
                return old
            return np.vstack([old, np.asarray(new, dtype=float).reshape(-1, width)])

        n = self.n_vars
        return LinearProgram(
            c=self.c if c is None else c,
            a_ub=stack(self.a_ub, a_ub, n),
            b_ub=self.b_ub if b_ub is None else np.concatenate([self.b_ub, np.atleast_1d(b_ub)]),
            a_eq=stack(self.a_eq, a_eq, n),
            b_eq=self.b_eq if b_eq is None else np.concatenate([self.b_eq, np.atleast_1d(b_eq)]),
            maximize=self.maximize if maximize is None else maximize,
        )

    def max_violation(self, p: np.ndarray) -> float:
        p = np.asarray(p, dtype=float)
        parts = [max(0.0, -float(p.min())), abs(float(p.sum()) - 1.0)]
        if self.b_ub.size:
            parts.append(max(0.0, float(np.max(self.a_ub @ p - self.b_ub))))
        if self.b_eq.size:
            parts.append(float(np.max(np.abs(self.a_eq @ p - self.b_eq))))
        return max(parts)


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: str
    x: np.ndarray = field(default=None)
    value: float = float("nan")
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    def __init__(self, a: np.ndarray, b: np.ndarray, basis: list[int]):
        m, n = a.shape
        self.t = np.zeros((m + 1, n + 1))
        self.t[:m, :n] = a
        self.t[:m, n] = b
        self.basis = basis
        self.iterations = 0

    @property
    def m(self) -> int:
        return self.t.shape[0] - 1

    def set_cost(self, cost: np.ndarray) -> None:
        n = self.t.shape[1] - 1
        row = np.zeros(n + 1)
        row[:n] = cost
        for r, j in enumerate(self.basis):
            if row[j] != 0.0:
                row -= row[j] * self.t[r]
        self.t[-1] = row

    def pivot(self, r: int, c: int) -> None:
        t = self.t
        t[r] /= t[r, c]
        col = t[:, c].copy()
        col[r] = 0.0
        nz = np.flatnonzero(col)
        if nz.size:
            t[nz] -= np.outer(col[nz], t[r])
        self.basis[r] = c
        self.iterations += 1

    def run(self, allowed: np.ndarray) -> str:
        """Minimise the current cost row; Bland's rule throughout."""
        t = self.t
        while True:
            red = t[-1, :-1]
            cand = np.flatnonzero((red < -COST_TOL) & allowed)
            if cand.size == 0:
                return "optimal"
            c = int(cand[0])
            col = t[:-1, c]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return "unbounded"
            ratios = t[rows, -1] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            self.pivot(r, c)

    def drop_row(self, r: int) -> None:
        self.t = np.delete(self.t, r, axis=0)
        del self.basis[r]


def _normalise_rows(a: np.ndarray, b: np.ndarray):
    scale = np.abs(a).max(axis=1) if a.size else np.zeros(0)
    keep = scale > 0
    empty_ok = b[~keep]
    return a[keep] / scale[keep, None], b[keep] / scale[keep], empty_ok


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve ``lp`` exactly up to floating point; status is ``optimal``,
    ``infeasible`` or ``unbounded``."""
    n = lp.n_vars
    a_ub, b_ub, empty_ub = _normalise_rows(lp.a_ub, lp.b_ub)
    a_eq, b_eq, empty_eq = _normalise_rows(lp.a_eq, lp.b_eq)
    if np.any(empty_ub < -FEAS_TOL) or np.any(np.abs(empty_eq) > FEAS_TOL):
        return LpSolution("infeasible")
    a_eq = np.vstack([a_eq, np.ones((1, n))])
    b_eq = np.concatenate([b_eq, [1.0]])

    m_ub, m_eq = len(b_ub), len(b_eq)
    m = m_ub + m_eq
    # columns: p | slacks | artificials
    n_slack = m_ub
    rows = np.zeros((m, n + n_slack))
    rhs = np.concatenate([b_ub, b_eq])
    rows[:m_ub, :n] = a_ub
    rows[:m_ub, n:] = np.eye(m_ub)
    rows[m_ub:, :n] = a_eq
    neg = rhs < 0
    rows[neg] *= -1
    rhs = np.abs(rhs)

    basis: list[int] = []
    art_rows = []
    for r in range(m):
        if r < m_ub and not neg[r]:
            basis.append(n + r)
        else:
            basis.append(-1)
            art_rows.append(r)
    n_art = len(art_rows)
    full = np.zeros((m, n + n_slack + n_art))
    full[:, : n + n_slack] = rows
    for j, r in enumerate(art_rows):
        full[r, n + n_slack + j] = 1.0
        basis[r] = n + n_slack + j

    tab = _Tableau(full, rhs, basis)
    n_real = n + n_slack
    all_cols = np.ones(n_real + n_art, dtype=bool)
    if n_art:
        cost = np.zeros(n_real + n_art)
        cost[n_real:] = 1.0
        tab.set_cost(cost)
        tab.run(all_cols)
        if -tab.t[-1, -1] > FEAS_TOL:
            return LpSolution("infeasible", iterations=tab.iterations)
        # drive remaining artificials out of the basis
        r = 0
        while r < tab.m:
            if tab.basis[r] >= n_real:
                cand = np.flatnonzero(np.abs(tab.t[r, :n_real]) > PIVOT_TOL)
                if cand.size:
                    tab.pivot(r, int(cand[0]))
                else:
                    tab.drop_row(r)
                    continue
            r += 1
        tab.t = np.delete(tab.t, np.s_[n_real : n_real + n_art], axis=1)

    sign = -1.0 if lp.maximize else 1.0
    cost = np.zeros(n_real)
    cost[:n] = sign * lp.c
    tab.set_cost(cost)
    status = tab.run(np.ones(n_real, dtype=bool))
    if status != "optimal":
        return LpSolution(status, iterations=tab.iterations)

    x = np.zeros(n_real)
    for r, j in enumerate(tab.basis):
        x[j] = tab.t[r, -1]
    p = x[:n]
    p[np.abs(p) < 1e-15] = 0.0
    p = np.maximum(p, 0.0)
    return LpSolution("optimal", p, float(lp.c @ p), tab.iterations)


def simplex_lp(c: Sequence[float], maximize: bool = True) -> LinearProgram:
    return LinearProgram(np.asarray(c, dtype=float), maximize=maximize)
