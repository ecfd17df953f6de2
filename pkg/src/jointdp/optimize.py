"""Utility maximisation over joint and independent mechanisms.

Over joint mechanisms both the privacy rows and the influence rows are
linear in the tuple probabilities, so the whole design problem is one LP.
Over independent mechanisms the binary balanced problem has a closed form.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from jointdp.errors import DomainError, Infeasible, Unbounded
from jointdp.lp import LinearProgram, solve_lp
from jointdp.mechanisms import (
    MAX_JOINT_SIZE,
    JointMechanism,
    NeighborhoodGraph,
    OutputAlphabet,
    build_graph,
    joint_size,
)

# Above this alphabet size the 2^|V| subset rows are replaced by value rows.
MAX_SUBSET_VALUES = 10
# Slack on the stage-1 optimum when it is pinned during stage 2.
LEX_SLACK = 1e-12


def _digits(n_datasets: int, n_values: int) -> np.ndarray:
    """``(size, n_datasets)`` array of outcome tuples in mixed-radix order."""
    size = n_values**n_datasets
    idx = np.arange(size)
    powers = n_values ** np.arange(n_datasets - 1, -1, -1)
    return (idx[:, None] // powers[None, :]) % n_values


def marginal_functional(n_datasets: int, n_values: int, i: int, j: int) -> np.ndarray:
    """Coefficients of ``Pr[M(d_i) = v_j]`` as a linear form in the joint probabilities."""
    return (_digits(n_datasets, n_values)[:, i] == j).astype(float)


def influence_functional(n_datasets: int, n_values: int, i: int, k: int) -> np.ndarray:
    d = _digits(n_datasets, n_values)
    return (d[:, i] != d[:, k]).astype(float)


def dp_rows(graph: NeighborhoodGraph, n_values: int, epsilon: float, delta: float):
    """Inequality rows ``A p <= b`` enforcing (eps, delta)-DP on the marginals.

    Small alphabets get one row per proper nonempty subset and direction,
    which is exact.  Larger alphabets get per-value rows at
    ``delta / (|V| - 1)``, which is sufficient but not necessary.
    """
    nd = graph.n_datasets
    d = _digits(nd, n_values)
    onehot = [np.stack([(d[:, i] == j).astype(float) for j in range(n_values)]) for i in range(nd)]
    scale = math.exp(epsilon)
    if n_values <= MAX_SUBSET_VALUES:
        subsets = [
            list(s)
            for r in range(1, n_values)
            for s in itertools.combinations(range(n_values), r)
        ]
        row_delta = delta
    else:
        subsets = [[j] for j in range(n_values)]
        row_delta = delta / (n_values - 1)
    rows = []
    for i, k in graph.edge_list():
        for a, b in ((i, k), (k, i)):
            for s in subsets:
                rows.append(onehot[a][s].sum(axis=0) - scale * onehot[b][s].sum(axis=0))
    a_ub = np.array(rows)
    return a_ub, np.full(len(rows), row_delta)


def li_rows(graph: NeighborhoodGraph, n_values: int, iota: float):
    rows = [influence_functional(graph.n_datasets, n_values, i, k) for i, k in graph.edge_list()]
    return np.array(rows), np.full(len(rows), iota)


def optimize_joint(
    graph: NeighborhoodGraph,
    alphabet: OutputAlphabet,
    utility: np.ndarray,
    epsilon: float,
    delta: float,
    iota: Optional[float] = None,
    balance: Sequence[tuple[np.ndarray, float]] = (),
    lexicographic_min_influence: bool = False,
    cap: int = MAX_JOINT_SIZE,
) -> JointMechanism:
    """Maximise a linear utility over joint mechanisms under DP (and LI) rows.

    With ``lexicographic_min_influence`` a second LP minimises the summed
    per-edge influence while holding the utility at its stage-1 optimum.

    Raises:
        Infeasible: no mechanism satisfies the constraints.
    """
    nv = len(alphabet)
    size = joint_size(graph.n_datasets, nv, cap)
    utility = np.asarray(utility, dtype=float).reshape(-1)
    if utility.size != size:
        raise DomainError(f"utility has {utility.size} coefficients, expected {size}")
    a_ub, b_ub = dp_rows(graph, nv, epsilon, delta)
    if iota is not None:
        a_li, b_li = li_rows(graph, nv, iota)
        a_ub, b_ub = np.vstack([a_ub, a_li]), np.concatenate([b_ub, b_li])
    a_eq = np.array([np.asarray(a, dtype=float) for a, _ in balance]).reshape(-1, size)
    b_eq = np.array([float(b) for _, b in balance])
    lp = LinearProgram(utility, a_ub, b_ub, a_eq, b_eq, maximize=True)
    sol = _solve(lp)
    if lexicographic_min_influence:
        total_inf = li_rows(graph, nv, 0.0)[0].sum(axis=0)
        pinned = sol.value - LEX_SLACK * max(1.0, abs(sol.value))
        lp2 = lp.with_rows(a_ub=-utility, b_ub=-pinned, c=total_inf, maximize=False)
        sol = _solve(lp2)
    return JointMechanism(graph, alphabet, sol.x / sol.x.sum())


def _solve(lp: LinearProgram):
    sol = solve_lp(lp)
    if sol.status == "infeasible":
        raise Infeasible("no mechanism satisfies the requested constraints")
    if sol.status == "unbounded":
        raise Unbounded("linear program is unbounded")
    return sol


# Binary balanced examples: two neighboring datasets, V = {1, 2},
# utility Pr[M(d_1) = 1], balance Pr[M(d_1) = 1] = Pr[M(d_2) = 2].


def binary_example_instance():
    """``(graph, alphabet, utility, balance)`` for the balanced binary design problem."""
    graph = build_graph(["d1", "d2"], [(0, 1)])
    alphabet = OutputAlphabet(("1", "2"))
    utility = marginal_functional(2, 2, 0, 0)
    balance = [(marginal_functional(2, 2, 0, 0) - marginal_functional(2, 2, 1, 1), 0.0)]
    return graph, alphabet, utility, balance


def independent_example_lp(epsilon: float, delta: float) -> LinearProgram:
    """The balanced independent problem as an LP over ``(x, 1 - x)``."""
    s = math.exp(epsilon)
    a_ub = np.array([[1.0, -s], [-s, 1.0]])
    return LinearProgram(np.array([1.0, 0.0]), a_ub, np.array([delta, delta]))


def independent_binary_optimum(epsilon: float, delta: float) -> tuple[float, float, float]:
    """Closed-form ``(x*, influence, utility)`` for the balanced independent problem."""
    _check_params(epsilon, delta)
    s = math.exp(epsilon)
    x = (s + delta) / (s + 1)
    inf = 1 - 2 * (1 - delta) * (s + delta) / (s + 1) ** 2
    return x, inf, x


def joint_binary_optimum(epsilon: float, delta: float) -> tuple[float, float, float, float]:
    """Closed-form ``(x*, y*, influence, utility)`` for the balanced joint problem,
    with x = Pr[(1, 2)] and y = Pr[(2, 1)]."""
    _check_params(epsilon, delta)
    s = math.exp(epsilon)
    x = (s + 2 * delta - 1) / (s + 1)
    return x, 0.0, x, (1 + x) / 2


def solve_independent_example(epsilon: float, delta: float) -> tuple[float, float, float]:
    """LP route to :func:`independent_binary_optimum`."""
    sol = _solve(independent_example_lp(epsilon, delta))
    x = float(sol.x[0])
    return x, 1 - 2 * x * (1 - x), x


def solve_joint_example(epsilon: float, delta: float) -> tuple[float, float, float, float]:
    """LP route to :func:`joint_binary_optimum` (lexicographic influence minimisation)."""
    graph, alphabet, utility, balance = binary_example_instance()
    mech = optimize_joint(graph, alphabet, utility, epsilon, delta, balance=balance,
                          lexicographic_min_influence=True)
    p = mech.probs
    x, y = float(p[1]), float(p[2])
    return x, y, x + y, float(utility @ p)


def _check_params(epsilon: float, delta: float) -> None:
    if not epsilon >= 0 or not 0 <= delta <= 1:
        raise DomainError(f"need epsilon >= 0 and delta in [0, 1], got ({epsilon}, {delta})")


@dataclass(frozen=True)
class TradeoffRow:
    utility: float
    epsilon: float
    independent_influence: float
    joint_influence: float


TRADEOFF_HEADER = ("U", "epsilon", "independent_influence", "joint_influence")


def tradeoff_row(u: float) -> TradeoffRow:
    if not 0.5 < u < 1:
        raise DomainError(f"utility must lie in (1/2, 1), got {u}")
    return TradeoffRow(u, math.log(u / (1 - u)), 2 * u * u - 2 * u + 1, 2 * u - 1)


def tradeoff_curve(u_grid: Iterable[float]) -> list[TradeoffRow]:
    """Privacy level and optimal influences (independent, joint) at each utility with delta = 0."""
    return [tradeoff_row(float(u)) for u in u_grid]


def fmt(x: float) -> str:
    return f"{x:.12g}"


def write_tradeoff_csv(rows: Iterable[TradeoffRow], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(TRADEOFF_HEADER)
    for r in rows:
        w.writerow([fmt(r.utility), fmt(r.epsilon), fmt(r.independent_influence), fmt(r.joint_influence)])


def read_tradeoff_csv(f: TextIO) -> list[TradeoffRow]:
    reader = csv.reader(f)
    header = tuple(next(reader))
    if header != TRADEOFF_HEADER:
        raise DomainError(f"unexpected tradeoff header {header}")
    return [TradeoffRow(*map(float, row)) for row in reader if row]
