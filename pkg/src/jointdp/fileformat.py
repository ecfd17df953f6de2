"""JSON mechanism files.

::

    {"type": "independent" | "joint",
     "datasets": [...], "alphabet": [...], "edges": [[i, k], ...],
     "rows": [[...], ...]                      # independent
     "probs": [...] | "sparse": {"v1,v2,...": p}   # joint, exactly one of the two}

Indices in files are 1-based; unknown fields are rejected.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from jointdp.errors import ParseError
from jointdp.mechanisms import (
    MAX_JOINT_SIZE,
    IndependentMechanism,
    JointMechanism,
    Mechanism,
    NeighborhoodGraph,
    OutputAlphabet,
    build_graph,
    joint_size,
    outcome_index,
    outcome_tuple,
)

_COMMON = {"type", "datasets", "alphabet", "edges"}
_ALLOWED = {
    "independent": _COMMON | {"rows"},
    "joint": _COMMON | {"probs", "sparse"},
}


def round12(x: float) -> float:
    """Round to 12 significant digits so emitted files are byte-stable."""
    return float(f"{x:.12g}")


def _list(d: dict, key: str) -> list:
    if key not in d:
        raise ParseError(f"missing field {key!r}")
    v = d[key]
    if not isinstance(v, list):
        raise ParseError(f"field {key!r} must be a list")
    return v


def _graph(d: dict) -> NeighborhoodGraph:
    labels = [str(x) for x in _list(d, "datasets")]
    edges = []
    for e in _list(d, "edges"):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(i, int) for i in e)):
            raise ParseError(f"edge {e!r} must be a pair of integers")
        edges.append((e[0] - 1, e[1] - 1))
    return build_graph(labels, edges)


def mechanism_from_dict(d: Any, cap: int = MAX_JOINT_SIZE) -> Mechanism:
    if not isinstance(d, dict):
        raise ParseError("mechanism file must hold a JSON object")
    kind = d.get("type")
    if kind not in _ALLOWED:
        raise ParseError(f"type must be 'independent' or 'joint', got {kind!r}")
    unknown = set(d) - _ALLOWED[kind]
    if unknown:
        raise ParseError(f"unknown fields for a {kind} mechanism: {sorted(unknown)}")
    graph = _graph(d)
    alphabet = OutputAlphabet(tuple(str(v) for v in _list(d, "alphabet")))
    nv = len(alphabet)
    if kind == "independent":
        rows = _list(d, "rows")
        try:
            arr = np.array(rows, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"rows are not a numeric matrix: {exc}") from None
        return IndependentMechanism(graph, alphabet, arr)

    size = joint_size(graph.n_datasets, nv, cap)
    if ("probs" in d) == ("sparse" in d):
        raise ParseError("a joint mechanism needs exactly one of 'probs' or 'sparse'")
    if "probs" in d:
        try:
            probs = np.array(_list(d, "probs"), dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"probs are not numeric: {exc}") from None
    else:
        sparse = d["sparse"]
        if not isinstance(sparse, dict):
            raise ParseError("'sparse' must map 'v1,v2,...' keys to probabilities")
        probs = np.zeros(size)
        for key, p in sparse.items():
            try:
                outcome = [int(s) - 1 for s in key.split(",")]
            except ValueError:
                raise ParseError(f"bad sparse key {key!r}") from None
            if not isinstance(p, (int, float)):
                raise ParseError(f"sparse value for {key!r} is not a number")
            probs[outcome_index(outcome, nv, graph.n_datasets)] = p
    return JointMechanism(graph, alphabet, probs)


def mechanism_to_dict(mech: Mechanism) -> dict:
    d: dict[str, Any] = {
        "type": "independent" if isinstance(mech, IndependentMechanism) else "joint",
        "datasets": list(mech.graph.labels),
        "alphabet": list(mech.alphabet.values),
        "edges": [[i + 1, k + 1] for i, k in mech.graph.edge_list()],
    }
    if isinstance(mech, IndependentMechanism):
        d["rows"] = [[round12(x) for x in row] for row in mech.rows.tolist()]
        return d
    nz = np.flatnonzero(mech.probs)
    if 4 * nz.size < mech.probs.size:
        d["sparse"] = {
            ",".join(str(v + 1) for v in outcome_tuple(int(j), mech.n_datasets, mech.n_values)):
                round12(float(mech.probs[j]))
            for j in nz
        }
    else:
        d["probs"] = [round12(x) for x in mech.probs.tolist()]
    return d


def loads(text: str, cap: int = MAX_JOINT_SIZE) -> Mechanism:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return mechanism_from_dict(data, cap)


def dumps(mech: Mechanism) -> str:
    return json.dumps(mechanism_to_dict(mech), indent=1) + "\n"


def load(path: Path | str, cap: int = MAX_JOINT_SIZE) -> Mechanism:
    return loads(Path(path).read_text(encoding="utf-8"), cap)


def save(mech: Mechanism, path: Path | str) -> None:
    Path(path).write_text(dumps(mech), encoding="utf-8")

