import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from jointdp.errors import MechanismError
from jointdp.lp import LinearProgram, simplex_lp, solve_lp
from jointdp.oracle import lp_vertex_oracle


def scipy_value(lp):
    """Reference optimum from HiGHS with the simplex row made explicit."""
    n = lp.n_vars
    a_eq = np.vstack([lp.a_eq, np.ones((1, n))])
    b_eq = np.concatenate([lp.b_eq, [1.0]])
    sign = -1.0 if lp.maximize else 1.0
    res = linprog(sign * lp.c, A_ub=lp.a_ub if lp.a_ub.size else None,
                  b_ub=lp.b_ub if lp.b_ub.size else None,
                  A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * n, method="highs")
    if res.status == 2:
        return None
    assert res.status == 0
    return sign * res.fun


def test_vertex_of_simplex():
    sol = solve_lp(simplex_lp([1, 0, 0]))
    assert sol.optimal and sol.value == pytest.approx(1.0, abs=1e-12)
    assert sol.x == pytest.approx([1, 0, 0], abs=1e-12)


def test_symmetric_cap():
    lp = LinearProgram([1, 0], a_ub=[[1, -1]], b_ub=[0])
    sol = solve_lp(lp)
    assert sol.value == pytest.approx(0.5, abs=1e-12)


def test_minimize():
    sol = solve_lp(simplex_lp([3, 1, 2], maximize=False))
    assert sol.value == pytest.approx(1.0, abs=1e-12)


def test_equality_rows():
    lp = LinearProgram([1, 2, 3], a_eq=[[1, -1, 0]], b_eq=[0.0], a_ub=[[0, 0, 1]], b_ub=[0.2])
    sol = solve_lp(lp)
    # p3 = 0.2, p1 = p2 = 0.4 ->  0.4 + 0.8 + 0.6
    assert sol.value == pytest.approx(1.8, abs=1e-12)
    assert lp.max_violation(sol.x) <= 1e-12


def test_infeasible():
    lp = LinearProgram([1, 0], a_ub=[[1, 0], [0, 1]], b_ub=[0.2, 0.2])
    assert solve_lp(lp).status == "infeasible"
    assert lp_vertex_oracle(lp) is None


def test_redundant_equalities():
    lp = LinearProgram([1, 1, 0], a_eq=[[1, 1, 0], [2, 2, 0]], b_eq=[0.5, 1.0])
    sol = solve_lp(lp)
    assert sol.optimal and sol.value == pytest.approx(0.5, abs=1e-12)


def test_degenerate_does_not_cycle():
    # many constraints active at the same vertex
    a = np.array([[1, -1, 0, 0], [1, 0, -1, 0], [1, 0, 0, -1], [0, 1, -1, 0], [0, 0, 1, -1]], dtype=float)
    lp = LinearProgram([1, 1, 1, 1], a_ub=a, b_ub=np.zeros(5))
    sol = solve_lp(lp)
    assert sol.optimal and sol.value == pytest.approx(1.0, abs=1e-12)


def test_shape_mismatch():
    with pytest.raises(MechanismError):
        LinearProgram([1, 0], a_ub=[[1, 0]], b_ub=[0.1, 0.2])


@settings(max_examples=120, deadline=None)
@given(st.integers(2, 5), st.integers(0, 4), st.integers(0, 1), st.integers(0, 2**32 - 1), st.booleans())
def test_random_lps_against_oracles(n, m_ub, m_eq, seed, maximize):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=n)
    a_ub = rng.normal(size=(m_ub, n))
    b_ub = rng.uniform(-0.3, 1.0, size=m_ub)
    a_eq = rng.normal(size=(m_eq, n))
    b_eq = rng.uniform(-0.3, 0.3, size=m_eq)
    lp = LinearProgram(c, a_ub, b_ub, a_eq, b_eq, maximize=maximize)
    ref = scipy_value(lp)
    sol = solve_lp(lp)
    if ref is None:
        assert sol.status == "infeasible"
        return
    assert sol.optimal
    assert sol.value == pytest.approx(ref, abs=1e-7)
    assert lp.max_violation(sol.x) <= 1e-8
    vertex = lp_vertex_oracle(lp)
    assert vertex == pytest.approx(ref, abs=1e-7)
