import io
import math

import numpy as np
import pytest

from jointdp.certify import influence, tightest_delta
from jointdp.errors import DomainError, Infeasible
from jointdp.lp import solve_lp
from jointdp.mechanisms import OutputAlphabet, marginal, pair_marginal, path_graph
from jointdp.optimize import (
    binary_example_instance,
    dp_rows,
    independent_binary_optimum,
    independent_example_lp,
    joint_binary_optimum,
    marginal_functional,
    optimize_joint,
    read_tradeoff_csv,
    solve_independent_example,
    solve_joint_example,
    tradeoff_curve,
    tradeoff_row,
    write_tradeoff_csv,
)

GRID = [(round(0.1 * i, 10), round(0.1 * j, 10)) for i in range(31) for j in range(6)]


def independent_by_grid(epsilon, delta, n=20000):
    """Largest feasible x on a fine grid, for the balanced independent problem."""
    s = math.exp(epsilon)
    x = np.arange(n + 1) / n
    ok = (x <= s * (1 - x) + delta + 1e-12) & (1 - x <= s * x + delta + 1e-12)
    return x[ok].max()


class TestClosedForms:
    @pytest.mark.parametrize("eps,delta,x,inf", [
        (0.0, 0.0, 0.5, 0.5),
        (math.log(2), 0.0, 2 / 3, 5 / 9),
        (0.0, 0.2, 0.6, 0.52),
    ])
    def test_independent(self, eps, delta, x, inf):
        got = independent_binary_optimum(eps, delta)
        assert got[0] == pytest.approx(x, abs=1e-12)
        assert got[1] == pytest.approx(inf, abs=1e-12)
        assert got[1] == pytest.approx(1 - 2 * x * (1 - x), abs=1e-12)

    @pytest.mark.parametrize("eps,delta,x,util", [
        (0.0, 0.0, 0.0, 0.5),
        (math.log(2), 0.0, 1 / 3, 2 / 3),
        (0.0, 0.2, 0.2, 0.6),
    ])
    def test_joint(self, eps, delta, x, util):
        xs, ys, inf, u = joint_binary_optimum(eps, delta)
        assert (xs, ys, inf, u) == pytest.approx((x, 0, x, util), abs=1e-12)

    @pytest.mark.parametrize("eps,delta", GRID)
    def test_grid_lp_matches(self, eps, delta):
        xi, inf_i, _ = solve_independent_example(eps, delta)
        xi_ref, inf_i_ref, _ = independent_binary_optimum(eps, delta)
        assert abs(xi - xi_ref) <= 1e-7
        assert abs(xi - independent_by_grid(eps, delta)) <= 1e-4
        x, y, inf_j, _ = solve_joint_example(eps, delta)
        xj_ref = joint_binary_optimum(eps, delta)[0]
        assert abs(x - xj_ref) <= 1e-7 and abs(y) <= 1e-7
        assert inf_j <= inf_i + 1e-12
        assert joint_binary_optimum(eps, delta)[2] <= inf_i_ref

    def test_bad_params(self):
        with pytest.raises(DomainError):
            independent_binary_optimum(-1, 0)
        with pytest.raises(DomainError):
            joint_binary_optimum(0, 1.5)


class TestOptimizeJoint:
    def test_lexicographic_example(self):
        graph, alphabet, utility, balance = binary_example_instance()
        mech = optimize_joint(graph, alphabet, utility, math.log(2), 0.0, balance=balance,
                              lexicographic_min_influence=True)
        q = pair_marginal(mech, 0, 1)
        assert q[0, 1] == pytest.approx(1 / 3, abs=1e-9)
        assert q[1, 0] == pytest.approx(0.0, abs=1e-9)
        assert influence(mech).overall == pytest.approx(1 / 3, abs=1e-9)
        assert tightest_delta(mech, math.log(2)).overall <= 1e-9

    def test_vacuous_privacy(self):
        graph, alphabet, utility, _ = binary_example_instance()
        mech = optimize_joint(graph, alphabet, utility, 30.0, 0.0)
        assert float(utility @ mech.probs) == pytest.approx(1.0, abs=1e-9)
        assert np.count_nonzero(mech.probs > 1e-12) == 1

    def test_zero_influence_feasible(self):
        graph, alphabet, utility, balance = binary_example_instance()
        mech = optimize_joint(graph, alphabet, utility, 0.0, 0.0, iota=0.0, balance=balance)
        assert float(utility @ mech.probs) == pytest.approx(0.5, abs=1e-9)
        assert mech.probs[1] == pytest.approx(0, abs=1e-12) and mech.probs[2] == pytest.approx(0, abs=1e-12)

    def test_infeasible(self):
        graph, alphabet, utility, _ = binary_example_instance()
        must_differ = (marginal_functional(2, 2, 0, 0) - marginal_functional(2, 2, 1, 0), 0.5)
        with pytest.raises(Infeasible):
            optimize_joint(graph, alphabet, utility, 0.0, 0.0, balance=[must_differ])

    def test_wrong_utility_size(self):
        graph, alphabet, _, _ = binary_example_instance()
        with pytest.raises(DomainError):
            optimize_joint(graph, alphabet, np.ones(3), 0.0, 0.0)

    @pytest.mark.parametrize("nv", [3, 4])
    def test_larger_alphabet_certifies(self, nv):
        graph = path_graph(3)
        alphabet = OutputAlphabet.of_size(nv)
        utility = marginal_functional(3, nv, 0, 0) + marginal_functional(3, nv, 2, nv - 1)
        eps, delta = 0.5, 0.05
        mech = optimize_joint(graph, alphabet, utility, eps, delta)
        assert tightest_delta(mech, eps).overall <= delta + 1e-9
        assert marginal(mech, 0).sum() == pytest.approx(1.0)

    def test_subset_rows_are_exact(self):
        # a mechanism achieving the LP optimum is DP, and the DP region equals the row set
        graph = path_graph(2)
        a_ub, b_ub = dp_rows(graph, 3, 0.0, 0.1)
        assert a_ub.shape[0] == 2 * (2**3 - 2)
        assert np.all(b_ub == 0.1)


class TestIndependentLp:
    def test_lp_shape(self):
        lp = independent_example_lp(math.log(2), 0.0)
        sol = solve_lp(lp)
        assert sol.x[0] == pytest.approx(2 / 3, abs=1e-12)


class TestTradeoff:
    @pytest.mark.parametrize("u,eps,ind,joint", [
        (0.75, math.log(3), 0.625, 0.5),
        (0.9, math.log(9), 0.82, 0.8),
    ])
    def test_rows(self, u, eps, ind, joint):
        r = tradeoff_row(u)
        assert (r.epsilon, r.independent_influence, r.joint_influence) == pytest.approx((eps, ind, joint), abs=1e-12)

    def test_left_limit(self):
        r = tradeoff_row(0.5 + 1e-9)
        assert r.epsilon == pytest.approx(0, abs=1e-8)
        assert r.independent_influence == pytest.approx(0.5, abs=1e-8)
        assert r.joint_influence == pytest.approx(0, abs=1e-8)

    @pytest.mark.parametrize("u", [0.5, 1.0, 0.2, 1.3])
    def test_domain(self, u):
        with pytest.raises(DomainError):
            tradeoff_row(u)

    def test_rows_match_lps(self):
        for r in tradeoff_curve(np.linspace(0.51, 0.99, 49)):
            xi, inf_i, ui = solve_independent_example(r.epsilon, 0.0)
            assert ui == pytest.approx(r.utility, abs=1e-7)
            assert inf_i == pytest.approx(r.independent_influence, abs=1e-7)
            _, _, inf_j, uj = solve_joint_example(r.epsilon, 0.0)
            assert uj == pytest.approx(r.utility, abs=1e-7)
            assert inf_j == pytest.approx(r.joint_influence, abs=1e-7)

    def test_csv_round_trip(self):
        rows = tradeoff_curve([0.55, 0.6, 0.95])
        buf = io.StringIO()
        write_tradeoff_csv(rows, buf)
        text = buf.getvalue()
        assert text.splitlines()[0] == "U,epsilon,independent_influence,joint_influence"
        back = read_tradeoff_csv(io.StringIO(text))
        for a, b in zip(rows, back):
            assert b.epsilon == pytest.approx(a.epsilon, rel=1e-11)
            assert b.joint_influence == pytest.approx(a.joint_influence, rel=1e-11)
