import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jointdp import fileformat
from jointdp.constructions import low_influence_nontrivial
from jointdp.errors import DisconnectedGraph, NotStochastic, ParseError
from jointdp.mechanisms import IndependentMechanism, JointMechanism, OutputAlphabet, path_graph
from jointdp.oracle import random_independent, random_joint

TOY = {
    "type": "independent",
    "datasets": ["d1", "d2"],
    "alphabet": ["1", "2"],
    "edges": [[1, 2]],
    "rows": [[0.6, 0.4], [0.4, 0.6]],
}


def test_parse_independent():
    m = fileformat.mechanism_from_dict(TOY)
    assert isinstance(m, IndependentMechanism)
    assert m.graph.edge_list() == [(0, 1)]
    assert m.rows.tolist() == TOY["rows"]


def test_unknown_field():
    with pytest.raises(ParseError, match="unknown"):
        fileformat.mechanism_from_dict({**TOY, "extra": 1})


def test_bad_type():
    with pytest.raises(ParseError):
        fileformat.mechanism_from_dict({**TOY, "type": "mixed"})


def test_invalid_json():
    with pytest.raises(ParseError):
        fileformat.loads("{not json")


def test_row_sum_names_row():
    with pytest.raises(NotStochastic, match="row 2"):
        fileformat.mechanism_from_dict({**TOY, "rows": [[0.5, 0.5], [0.5, 0.4]]})


def test_disconnected_file():
    d = {**TOY, "datasets": ["a", "b", "c"], "rows": [[1, 0]] * 3}
    with pytest.raises(DisconnectedGraph):
        fileformat.mechanism_from_dict(d)


def test_sparse_joint():
    d = {"type": "joint", "datasets": ["a", "b"], "alphabet": ["x", "y"], "edges": [[1, 2]],
         "sparse": {"1,1": 0.45, "1,2": 0.1, "2,2": 0.45}}
    m = fileformat.mechanism_from_dict(d)
    assert m.probs.tolist() == [0.45, 0.1, 0.0, 0.45]


def test_joint_needs_one_encoding():
    base = {"type": "joint", "datasets": ["a", "b"], "alphabet": ["x", "y"], "edges": [[1, 2]]}
    with pytest.raises(ParseError):
        fileformat.mechanism_from_dict(base)
    with pytest.raises(ParseError):
        fileformat.mechanism_from_dict({**base, "probs": [0.25] * 4, "sparse": {"1,1": 1.0}})


def test_sparse_emitted_when_mostly_zero():
    m = low_influence_nontrivial(path_graph(4), OutputAlphabet.of_size(3), 0.1)
    d = fileformat.mechanism_to_dict(m)
    assert "sparse" in d and len(d["sparse"]) == 3
    assert d["sparse"]["1,2,1,1"] == 0.1


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 2**32 - 1), st.booleans())
def test_round_trip(nd, nv, seed, joint):
    g, a = path_graph(nd), OutputAlphabet.of_size(nv)
    m = random_joint(g, a, seed) if joint else random_independent(g, a, seed)
    text = fileformat.dumps(m)
    back = fileformat.loads(text)
    assert type(back) is type(m)
    arr, arr2 = (m.probs, back.probs) if joint else (m.rows, back.rows)
    assert np.max(np.abs(arr - arr2)) <= 1e-12
    assert fileformat.dumps(back) == text
    assert json.loads(text)["edges"][0] == [1, 2]


def test_save_load(tmp_path):
    m = JointMechanism(path_graph(2), OutputAlphabet(("a", "b")), [0.5, 0, 0, 0.5])
    fileformat.save(m, tmp_path / "m.json")
    assert fileformat.load(tmp_path / "m.json").probs.tolist() == [0.5, 0, 0, 0.5]
