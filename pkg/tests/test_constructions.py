import io
import math

import numpy as np
import pytest

from jointdp.certify import certify, influence, is_nontrivial, li_to_dp_bound, tightest_delta
from jointdp.constructions import (
    grid_size,
    low_influence_nontrivial,
    read_region_csv,
    region_independent_binary,
    region_joint_binary,
    tight_half_mechanism,
)
from jointdp.errors import BadAlpha, BadStep, MissingEdge
from jointdp.mechanisms import (
    OutputAlphabet,
    build_graph,
    hamming_graph,
    is_independent,
    marginal,
    outcome_index,
    pair_marginal,
    path_graph,
)

BIN = OutputAlphabet(("1", "2"))


def point(region, *coords):
    idx = np.flatnonzero(np.all(np.abs(region.coords - np.array(coords)) < 1e-12, axis=1))
    assert idx.size == 1
    return list(region)[idx[0]]


class TestTightHalf:
    def test_two_nodes(self):
        m = tight_half_mechanism(path_graph(2), BIN)
        assert m.rows.tolist() == [[0.5, 0.5], [0, 1]]
        assert influence(m).overall == 0.5
        assert is_nontrivial(m)[0]

    def test_three_nodes(self):
        m = tight_half_mechanism(path_graph(3), OutputAlphabet.of_size(3))
        inf = influence(m)
        assert inf[(0, 1)] == 0.5 and inf[(1, 2)] == 0.0
        assert inf.overall == 0.5
        assert is_nontrivial(m)[0]

    def test_hypercube(self):
        m = tight_half_mechanism(hamming_graph(3), BIN)
        assert influence(m).overall == 0.5


class TestLowInfluence:
    def test_two_nodes(self):
        m = low_influence_nontrivial(path_graph(2), BIN, 0.1)
        assert m.probs == pytest.approx([0.45, 0.1, 0, 0.45], abs=1e-15)
        assert pair_marginal(m, 0, 1) == pytest.approx(np.array([[0.45, 0.1], [0, 0.45]]), abs=1e-15)
        assert influence(m).overall == pytest.approx(0.1, abs=1e-12)

    def test_three_nodes_pair_marginal(self):
        m = low_influence_nontrivial(path_graph(3), BIN, 0.1)
        assert pair_marginal(m, 0, 1) == pytest.approx(np.array([[0.45, 0.1], [0, 0.45]]), abs=1e-15)

    @pytest.mark.parametrize("alpha", [1e-4, 0.01, 0.1, 0.3])
    @pytest.mark.parametrize("nv", [2, 3])
    def test_certifies(self, alpha, nv):
        m = low_influence_nontrivial(path_graph(4), OutputAlphabet.of_size(nv), alpha)
        assert abs(influence(m).overall - alpha) <= 1e-12
        assert is_nontrivial(m)[0]
        assert not is_independent(m, 1e-9)
        bound = li_to_dp_bound(alpha, nv)
        assert tightest_delta(m, bound.epsilon).overall <= bound.delta + 1e-12

    def test_vanishing_alpha(self):
        m = low_influence_nontrivial(path_graph(2), BIN, 1e-6)
        assert influence(m).overall == pytest.approx(1e-6, abs=1e-15)
        assert marginal(m, 0)[0] == pytest.approx(0.5 + 5e-7, abs=1e-15)
        assert marginal(m, 1)[0] == pytest.approx(0.5 - 5e-7, abs=1e-15)
        assert is_nontrivial(m, tie_tol=1e-9)[0]

    def test_bad_alpha(self):
        for a in (0.0, 1.0, -0.1, math.nan):
            with pytest.raises(BadAlpha):
                low_influence_nontrivial(path_graph(2), BIN, a)

    def test_missing_edge(self):
        g = build_graph(["a", "b", "c"], [(0, 2), (1, 2)])
        with pytest.raises(MissingEdge):
            low_influence_nontrivial(g, BIN, 0.1)

    def test_report(self):
        rep = certify(low_influence_nontrivial(path_graph(2), BIN, 0.1), 0.0)
        assert rep.nontrivial and rep.bounds is None
        assert rep.delta == pytest.approx(0.1, abs=1e-12)


class TestGrid:
    @pytest.mark.parametrize("step,n", [(0.5, 2), (0.25, 4), (0.01, 100), (0.1, 10)])
    def test_sizes(self, step, n):
        assert grid_size(step) == n

    @pytest.mark.parametrize("step", [0.2, 0.3, 0.0, 0.6, -0.1])
    def test_bad(self, step):
        with pytest.raises(BadStep):
            grid_size(step)


@pytest.fixture(scope="module")
def region():
    return region_independent_binary(math.log(2), 0.0, 0.4, 0.01)


class TestIndependentRegion:
    def test_size(self, region):
        assert len(region) == 101**2

    def test_examples(self, region):
        p = point(region, 0.3, 0.6)
        assert p.dp and not p.li
        assert 0.3 + 0.6 - 2 * 0.18 == pytest.approx(0.54)
        p = point(region, 0.05, 0.0)
        assert not p.dp and p.li
        p = point(region, 0.0, 0.0)
        assert p.dp and p.li and not p.nontrivial

    def test_non_embedding(self, region):
        assert np.any(region.dp & ~region.li)
        assert np.any(region.li & ~region.dp)

    def test_flags_against_certifier(self):
        from jointdp.mechanisms import IndependentMechanism
        r = region_independent_binary(0.3, 0.1, 0.45, 0.1)
        for p in r:
            m = IndependentMechanism(path_graph(2), BIN, [[p.x, 1 - p.x], [p.y, 1 - p.y]])
            assert p.dp == (tightest_delta(m, 0.3).overall <= 0.1 + 1e-12)
            assert p.li == (influence(m).overall <= 0.45 + 1e-12)
            assert p.nontrivial == is_nontrivial(m)[0]


class TestJointRegion:
    @pytest.mark.parametrize("iota", [0.05, 0.1, 0.25])
    def test_li_inside_dp(self, iota):
        r = region_joint_binary(0.0, iota, iota, 0.01)
        inside = r.simplex & r.li
        assert inside.any()
        assert np.all(r.dp[inside])

    def test_examples(self):
        r = region_joint_binary(0.0, 0.5, 0.5, 0.01)
        p = point(r, 0.1, 0.0, 0.5)
        assert p.li and not p.nontrivial
        p = point(r, 0.1, 0.0, 0.49)
        assert p.li and p.nontrivial
        p = point(r, 0.0, 0.0, 1.0)
        assert p.li and p.dp and not p.nontrivial and p.simplex
        assert not point(r, 0.5, 0.5, 0.5).simplex

    def test_dp_flag_against_certifier(self):
        from jointdp.mechanisms import JointMechanism
        r = region_joint_binary(0.4, 0.1, 0.3, 0.1)
        for p in r:
            if not p.simplex:
                continue
            w = max(0.0, 1 - p.x - p.y - p.z)
            probs = np.zeros(4)
            probs[outcome_index((0, 1), 2)] = p.x
            probs[outcome_index((1, 0), 2)] = p.y
            probs[outcome_index((0, 0), 2)] = p.z
            probs[outcome_index((1, 1), 2)] = w
            m = JointMechanism(path_graph(2), BIN, probs)
            assert p.dp == (tightest_delta(m, 0.4).overall <= 0.1 + 1e-12)
            assert p.li == (influence(m).overall <= 0.3 + 1e-12)


def test_csv_round_trip(tmp_path):
    r = region_joint_binary(0.0, 0.5, 0.5, 0.25)
    path = r.save(tmp_path)
    assert path.name == "region_joint_0_0.5_0.5.csv"
    pts = read_region_csv(io.StringIO(path.read_text()))
    assert pts == list(r)
    assert len(pts) == 125
