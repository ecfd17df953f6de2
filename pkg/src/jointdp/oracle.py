"""Brute-force checks that stay independent of the fast paths they verify.

Randomness comes from numpy's PCG64 bit generator seeded with an explicit
integer.  Distributions on a simplex are drawn by normalising i.i.d.
Exp(1) variates, each obtained as ``-log(1 - U)`` from a PCG64 double, which
gives the uniform (flat Dirichlet) law.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from jointdp import certify
from jointdp.errors import (
    AlphabetMismatch,
    BadStep,
    IndexOutOfRange,
    MechanismError,
    NotInR,
    SizeLimitExceeded,
)
from jointdp.lp import FEAS_TOL, LinearProgram
from jointdp.mechanisms import (
    MAX_JOINT_SIZE,
    SUM_TOL,
    IndependentMechanism,
    JointMechanism,
    NeighborhoodGraph,
    OutputAlphabet,
    embed_independent,
    joint_size,
    path_graph,
)

MAX_ORACLE_VALUES = 20
MAX_BOOLEAN_ARITY = 20
R_TOL = 1e-12


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_simplex(rng: np.random.Generator, shape) -> np.ndarray:
    """Uniform draws from the simplex over the last axis of ``shape``."""
    e = -np.log1p(-rng.random(shape))
    return e / e.sum(axis=-1, keepdims=True)


# ---------------------------------------------------------------- privacy

def dp_subset_oracle(p: Sequence[float], q: Sequence[float], epsilon: float) -> float:
    """``max_S p(S) - e^eps q(S)`` by enumerating every subset S, clamped at 0."""
    p = [float(a) for a in p]
    q = [float(b) for b in q]
    if len(p) != len(q):
        raise AlphabetMismatch(f"alphabet sizes differ: {len(p)} vs {len(q)}")
    n = len(p)
    if n > MAX_ORACLE_VALUES:
        raise SizeLimitExceeded(f"subset enumeration limited to {MAX_ORACLE_VALUES} values, got {n}")
    scale = math.exp(epsilon)
    gap = [a - scale * b for a, b in zip(p, q)]
    best = 0.0
    for r in range(1, n + 1):
        for s in itertools.combinations(range(n), r):
            best = max(best, math.fsum(gap[v] for v in s))
    return best


# --------------------------------------------------------- boolean functions

@dataclass(frozen=True, eq=False)
class BooleanFunction:
    """``f: {-1, 1}^n -> {-1, 1}`` as a truth table.

    Entry ``idx`` holds ``f(x)`` where ``x_i = (-1) ** ((idx >> i) & 1)``.
    """

    n: int
    truth_table: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n <= MAX_BOOLEAN_ARITY:
            raise SizeLimitExceeded(f"arity must be in 1..{MAX_BOOLEAN_ARITY}, got {self.n}")
        t = np.asarray(self.truth_table, dtype=np.int8).reshape(-1)
        if t.size != 2**self.n:
            raise MechanismError(f"truth table needs {2**self.n} entries, got {t.size}")
        if not np.all(np.abs(t) == 1):
            raise MechanismError("truth table entries must be -1 or +1")
        t.flags.writeable = False
        object.__setattr__(self, "truth_table", t)

    @classmethod
    def from_callable(cls, n: int, f: Callable[[tuple[int, ...]], int]) -> "BooleanFunction":
        table = [f(tuple(1 - 2 * ((idx >> i) & 1) for i in range(n))) for idx in range(2**n)]
        return cls(n, np.array(table))

    def __neg__(self) -> "BooleanFunction":
        return BooleanFunction(self.n, -self.truth_table)


def dictator(n: int, i: int = 0) -> BooleanFunction:
    return BooleanFunction.from_callable(n, lambda x: x[i])


def majority(n: int) -> BooleanFunction:
    if n % 2 == 0:
        raise MechanismError("majority needs an odd number of inputs")
    return BooleanFunction.from_callable(n, lambda x: 1 if sum(x) > 0 else -1)


def parity(n: int) -> BooleanFunction:
    return BooleanFunction.from_callable(n, lambda x: int(np.prod(x)))


def boolean_influence(f: BooleanFunction, i: int) -> float:
    """Fraction of inputs where flipping coordinate ``i`` (0-based) changes ``f``."""
    if not 0 <= i < f.n:
        raise IndexOutOfRange(f"coordinate {i} outside 0..{f.n - 1}")
    idx = np.arange(2**f.n)
    changed = int(np.count_nonzero(f.truth_table != f.truth_table[idx ^ (1 << i)]))
    return changed / 2**f.n


# ------------------------------------------------------ lower-bound machinery

def influence_function(u, v) -> float:
    """``1 - sum_i u_i v_i``: the disagreement probability of independent draws."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise AlphabetMismatch(f"shapes differ: {u.shape} vs {v.shape}")
    return 1.0 - math.fsum((u * v).tolist())


def _on_simplex(p: np.ndarray) -> bool:
    return bool(np.all(p >= -R_TOL) and np.all(p <= 1 + R_TOL) and abs(p.sum() - 1) <= SUM_TOL)


def in_R(u, v) -> bool:
    """Both on the simplex, ``u`` maximal at the first value, ``v`` at the second (ties allowed)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.size < 2:
        return False
    return (
        _on_simplex(u) and _on_simplex(v)
        and u[0] >= u.max() - R_TOL
        and v[1] >= v.max() - R_TOL
    )


def in_S(u, v) -> bool:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return in_R(u, v) and bool(np.all(np.abs(u[2:]) <= R_TOL) and np.all(np.abs(v[2:]) <= R_TOL))


def star_reduce(u, v) -> tuple[np.ndarray, np.ndarray]:
    """Move the mass beyond the first two values onto them, half each."""
    if not in_R(u, v):
        raise NotInR("pair is not in R: u must peak at the first value and v at the second")
    out = []
    for w in (np.asarray(u, dtype=float), np.asarray(v, dtype=float)):
        tail = math.fsum(w[2:].tolist())
        r = np.zeros_like(w)
        r[0] = w[0] + tail / 2
        r[1] = w[1] + tail / 2
        out.append(r)
    return out[0], out[1]


def grid_min_influence_nontrivial(step: float) -> tuple[float, list[tuple[float, float]]]:
    """Exhaustive minimum of ``x + y - 2xy`` over ``[1/2, 1] x [0, 1/2]`` minus ``(1/2, 1/2)``.

    Evaluated in integer arithmetic on the grid ``i / N``, so the minimum
    and its argmin set are exact.
    """
    if not 0 < step <= 0.5:
        raise BadStep(f"step must be in (0, 1/2], got {step}")
    n = round(1 / step)
    if abs(n * step - 1) > 1e-9 or n % 2:
        raise BadStep(f"step {step} does not divide 1/2")
    h = n // 2
    best = None
    argmin: list[tuple[int, int]] = []
    for i in range(h, n + 1):
        for j in range(0, h + 1):
            if i == h and j == h:
                continue
            val = (i + j) * n - 2 * i * j  # = N^2 * I(i/N, j/N)
            if best is None or val < best:
                best, argmin = val, [(i, j)]
            elif val == best:
                argmin.append((i, j))
    return best / n**2, [(i / n, j / n) for i, j in argmin]


def simplex_grid(n_values: int, step: float) -> np.ndarray:
    n = round(1 / step)
    pts = [c for c in itertools.product(range(n + 1), repeat=n_values - 1) if sum(c) <= n]
    arr = np.array([list(c) + [n - sum(c)] for c in pts], dtype=float)
    return arr / n


@dataclass(frozen=True)
class RGridResult:
    pairs: int
    min_influence: float
    max_increase: float  # largest I(star) - I over the grid; <= 0 expected
    star_always_in_S: bool


def r_grid_audit(n_values: int = 3, step: float = 0.05) -> RGridResult:
    """Check star reduction and the 1/2 floor over every grid pair in R."""
    g = simplex_grid(n_values, step)
    us = g[g[:, 0] >= g.max(axis=1) - R_TOL]
    vs = g[g[:, 1] >= g.max(axis=1) - R_TOL]
    count = 0
    lo = math.inf
    worst = -math.inf
    all_s = True
    for u in us:
        for v in vs:
            i0 = influence_function(u, v)
            us_, vs_ = star_reduce(u, v)
            worst = max(worst, influence_function(us_, vs_) - i0)
            all_s &= in_S(us_, vs_)
            lo = min(lo, i0)
            count += 1
    return RGridResult(count, lo, worst, all_s)


# ------------------------------------------------------ random mechanisms

def random_joint(graph: NeighborhoodGraph, alphabet: OutputAlphabet, seed: int,
                 cap: int = MAX_JOINT_SIZE) -> JointMechanism:
    size = joint_size(graph.n_datasets, len(alphabet), cap)
    return JointMechanism(graph, alphabet, random_simplex(rng_for(seed), size))


def random_independent(graph: NeighborhoodGraph, alphabet: OutputAlphabet, seed: int) -> IndependentMechanism:
    rows = random_simplex(rng_for(seed), (graph.n_datasets, len(alphabet)))
    return IndependentMechanism(graph, alphabet, rows)


def random_nontrivial_independent(graph: NeighborhoodGraph, alphabet: OutputAlphabet,
                                  seed: int, max_draws: int = 10_000) -> IndependentMechanism:
    """Rejection sampling: redraw uniform rows until the mechanism is nontrivial."""
    rng = rng_for(seed)
    for _ in range(max_draws):
        mech = IndependentMechanism(graph, alphabet, random_simplex(rng, (graph.n_datasets, len(alphabet))))
        if certify.is_nontrivial(mech)[0]:
            return mech
    raise RuntimeError(f"no nontrivial draw in {max_draws} attempts")


# ------------------------------------------------------------ LP oracle

def lp_vertex_oracle(lp: LinearProgram) -> Optional[float]:
    """Optimal value by enumerating every basic solution; ``None`` if infeasible.

    Exponential in the number of constraints; meant for a handful of variables.
    """
    n = lp.n_vars
    rows = [(a, b) for a, b in zip(lp.a_ub, lp.b_ub)]
    rows += [(-np.eye(n)[j], 0.0) for j in range(n)]
    eq = [(a, b) for a, b in zip(lp.a_eq, lp.b_eq)] + [(np.ones(n), 1.0)]
    best = None
    free = n - len(eq)
    if free < 0:
        free = 0
    for active in itertools.combinations(range(len(rows)), free):
        a = np.array([r[0] for r in eq] + [rows[j][0] for j in active])
        b = np.array([r[1] for r in eq] + [rows[j][1] for j in active])
        sol, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
        if rank < n:
            continue
        if np.max(np.abs(a @ sol - b)) > 1e-9:
            continue
        if lp.max_violation(sol) > FEAS_TOL:
            continue
        val = float(lp.c @ sol)
        if best is None or (val > best if lp.maximize else val < best):
            best = val
    return best


# ---------------------------------------------------------------- audits

AUDIT_TOL = 1e-12
MAX_RECORDED = 50


@dataclass
class SuiteReport:
    suite: str
    trials: int
    violations: list = field(default_factory=list)
    n_violations: int = 0

    @property
    def passed(self) -> bool:
        return self.n_violations == 0

    def flag(self, record: dict) -> None:
        self.n_violations += 1
        if len(self.violations) < MAX_RECORDED:
            self.violations.append(record)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "trials": self.trials, "violations": self.violations,
                "pass": self.passed}


@dataclass
class AuditReport:
    suites: list[SuiteReport]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def to_dict(self) -> dict:
        return {
            "suite": "all",
            "trials": sum(s.trials for s in self.suites),
            "violations": [dict(v, suite=s.suite) for s in self.suites for v in s.violations],
            "pass": self.passed,
            "suites": [s.to_dict() for s in self.suites],
        }


def _graphs(n_datasets: int, sizes: Iterable[int]):
    g = path_graph(n_datasets)
    return {k: (g, OutputAlphabet.of_size(k)) for k in sizes}


def audit_nontrivial_floor(trials: int, seed: int, sizes=(2, 3, 4, 5)) -> SuiteReport:
    """Nontrivial independent mechanisms never have influence below 1/2."""
    rep = SuiteReport("nontrivial_independent_floor", trials)
    setups = _graphs(2, sizes)
    for t in range(trials):
        k = sizes[t % len(sizes)]
        mech = random_nontrivial_independent(*setups[k], seed + t)
        inf = certify.influence(mech).overall
        if inf < 0.5 - AUDIT_TOL:
            rep.flag({"trial": t, "n_values": k, "rows": mech.rows.tolist(), "influence": inf})
    return rep


def audit_li_chain(trials: int, seed: int, sizes=(2, 3, 4)) -> SuiteReport:
    """Low influence bounds value-DP and DP deltas at eps = 0."""
    rep = SuiteReport("li_vdp_dp_chain", trials)
    setups = _graphs(2, sizes)
    for t in range(trials):
        k = sizes[t % len(sizes)]
        mech = random_joint(*setups[k], seed + t)
        inf = certify.influence(mech)
        iota = inf.overall
        vdp = certify.tightest_vdp_delta(mech, 0.0).overall
        dp_edges = certify.tightest_delta(mech, 0.0)
        dp = dp_edges.overall
        checks = {
            "vdp<=iota": vdp <= iota + AUDIT_TOL,
            "dp<=iota*(|V|-1)": dp <= iota * (k - 1) + AUDIT_TOL,
            "dp_edge<=influence_edge": all(
                d <= f + AUDIT_TOL for d, f in zip(dp_edges.values, inf.values)
            ),
            "vdp<=dp<=(|V|-1)*vdp": vdp <= dp + AUDIT_TOL and dp <= (k - 1) * vdp + AUDIT_TOL,
        }
        failed = [name for name, ok in checks.items() if not ok]
        if failed:
            rep.flag({"trial": t, "n_values": k, "failed": failed, "iota": iota,
                      "vdp_delta": vdp, "dp_delta": dp})
    return rep


def audit_hockey_stick(trials: int, seed: int,
                       epsilons=(0.0, math.log(2), 1.0, 3.0), max_values: int = 6) -> SuiteReport:
    rep = SuiteReport("hockey_stick_vs_subsets", trials)
    for t in range(trials):
        rng = rng_for(seed + t)
        k = 2 + t % (max_values - 1)
        p, q = random_simplex(rng, (2, k))
        eps = epsilons[t % len(epsilons)]
        fast = certify.hockey_stick(p, q, eps)
        slow = dp_subset_oracle(p, q, eps)
        if fast != slow:
            rep.flag({"trial": t, "p": p.tolist(), "q": q.tolist(), "epsilon": eps,
                      "hockey_stick": fast, "oracle": slow})
    return rep


def audit_quadratic_vs_linear(trials: int, seed: int, sizes=(2, 3, 4)) -> SuiteReport:
    """Independent influence via ``1 - <M_i, M_k>`` equals the joint off-diagonal sum."""
    rep = SuiteReport("quadratic_vs_linear_influence", trials)
    setups = _graphs(3, sizes)
    for t in range(trials):
        k = sizes[t % len(sizes)]
        ind = random_independent(*setups[k], seed + t)
        quad = certify.influence(ind).values
        lin = certify.influence(embed_independent(ind)).values
        gap = max(abs(a - b) for a, b in zip(quad, lin))
        if gap > AUDIT_TOL:
            rep.flag({"trial": t, "n_values": k, "gap": gap})
    return rep


def audit_constant_mechanisms(trials: int, seed: int, sizes=(2, 3, 4)) -> SuiteReport:
    """Constant mechanisms are trivial and have zero influence, so the 1/2 floor does not apply."""
    rep = SuiteReport("constant_mechanisms_trivial", trials)
    setups = _graphs(3, sizes)
    for t in range(trials):
        k = sizes[t % len(sizes)]
        g, a = setups[k]
        v = int(rng_for(seed + t).integers(k))
        rows = np.zeros((g.n_datasets, k))
        rows[:, v] = 1.0
        mech = IndependentMechanism(g, a, rows)
        nontrivial, _ = certify.is_nontrivial(mech)
        inf = certify.influence(mech).overall
        if nontrivial or inf != 0.0:
            rep.flag({"trial": t, "value": v, "nontrivial": nontrivial, "influence": inf})
    return rep


def audit_theorems(trials: int, seed: int) -> AuditReport:
    """Run every randomized property suite with ``trials`` trials each."""
    return AuditReport([
        audit_nontrivial_floor(trials, seed),
        audit_li_chain(trials, seed),
        audit_hockey_stick(trials, seed),
        audit_quadratic_vs_linear(trials, seed),
        audit_constant_mechanisms(trials, seed),
    ])
