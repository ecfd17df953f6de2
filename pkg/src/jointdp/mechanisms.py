"""Dataset graphs, output alphabets, and independent/joint mechanisms.

An independent mechanism is a row-stochastic matrix ``rows[i, j] = Pr[M(d_i) = v_j]``.
A joint mechanism is one distribution over every output tuple
``(v_1, ..., v_|D|)``, stored densely in mixed radix with dataset 0 as the
most significant digit.

All indices in the Python API are 0-based.  Mechanism files use 1-based
indices; see :mod:`jointdp.fileformat`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from jointdp.errors import (
    DisconnectedGraph,
    DuplicateLabel,
    IndexOutOfRange,
    MechanismError,
    NotStochastic,
    SelfLoop,
    SizeLimitExceeded,
    TooFewDatasets,
)

SUM_TOL = 1e-9
MAX_JOINT_SIZE = 10**7
MAX_HAMMING_DIM = 20


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class NeighborhoodGraph:
    """Datasets with a symmetric, connected neighbor relation.

    ``edges`` is an ``(E, 2)`` integer array of 0-based index pairs with
    ``i < k``, sorted lexicographically.
    """

    labels: tuple[str, ...]
    edges: np.ndarray
    _skip_connectivity: bool = field(default=False, repr=False)

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if len(labels) < 2:
            raise TooFewDatasets(f"need at least 2 datasets, got {len(labels)}")
        if len(set(labels)) != len(labels):
            dup = next(x for x in labels if labels.count(x) > 1)
            raise DuplicateLabel(f"dataset label {dup!r} appears more than once")
        n = len(labels)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise IndexOutOfRange(f"edge index outside 0..{n - 1}")
        if np.any(edges[:, 0] == edges[:, 1]):
            i = int(edges[edges[:, 0] == edges[:, 1]][0, 0])
            raise SelfLoop(f"dataset {labels[i]!r} is listed as its own neighbor")
        edges = np.sort(edges, axis=1)
        edges = np.unique(edges, axis=0) if edges.size else edges
        if not self._skip_connectivity:
            adj = coo_matrix(
                (np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n)
            )
            ncomp, comp = connected_components(adj, directed=False)
            if ncomp > 1:
                lost = [labels[j] for j in np.flatnonzero(comp != comp[0])[:3]]
                raise DisconnectedGraph(
                    f"graph has {ncomp} components; unreachable from {labels[0]!r}: {lost}"
                )
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "edges", _frozen(edges))

    @property
    def n_datasets(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_list(self) -> list[tuple[int, int]]:
        return [(int(i), int(k)) for i, k in self.edges]

    def has_edge(self, i: int, k: int) -> bool:
        a, b = min(i, k), max(i, k)
        hit = (self.edges[:, 0] == a) & (self.edges[:, 1] == b)
        return bool(hit.any())

    def index(self, label: str) -> int:
        return self.labels.index(label)


@dataclass(frozen=True)
class OutputAlphabet:
    values: tuple[str, ...]

    def __post_init__(self):
        values = tuple(str(v) for v in self.values)
        if len(values) < 2:
            raise MechanismError(f"output alphabet needs at least 2 values, got {len(values)}")
        if len(set(values)) != len(values):
            raise DuplicateLabel("output alphabet labels must be distinct")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def of_size(cls, n: int) -> "OutputAlphabet":
        return cls(tuple(str(j + 1) for j in range(n)))


def build_graph(labels: Sequence[str], edge_pairs: Iterable[tuple[int, int]]) -> NeighborhoodGraph:
    """Validate labels and 0-based edge pairs into a :class:`NeighborhoodGraph`."""
    return NeighborhoodGraph(tuple(labels), np.array(list(edge_pairs), dtype=np.int64))


def path_graph(n: int) -> NeighborhoodGraph:
    return build_graph([f"d{j + 1}" for j in range(n)], [(j, j + 1) for j in range(n - 1)])


def hamming_graph(n: int) -> NeighborhoodGraph:
    """Hypercube on bitstrings of length ``n``; neighbors differ in one bit."""
    if not 1 <= n <= MAX_HAMMING_DIM:
        raise SizeLimitExceeded(f"hamming dimension must be in 1..{MAX_HAMMING_DIM}, got {n}")
    nodes = np.arange(2**n, dtype=np.int64)
    parts = []
    for b in range(n):
        lo = nodes[(nodes >> b) & 1 == 0]
        parts.append(np.stack([lo, lo | (1 << b)], axis=1))
    labels = tuple(format(j, f"0{n}b") for j in range(2**n))
    # connected by construction
    return NeighborhoodGraph(labels, np.concatenate(parts), _skip_connectivity=True)


def _check_distribution(p: np.ndarray, what: str, tol: float = SUM_TOL) -> None:
    if not np.all(np.isfinite(p)):
        raise NotStochastic(f"{what} has non-finite entries")
    if p.min() < 0 or p.max() > 1:
        raise NotStochastic(f"{what} has entries outside [0, 1]")
    s = float(p.sum())
    if abs(s - 1.0) > tol:
        raise NotStochastic(f"{what} sums to {s:.12g}, not 1")


@dataclass(frozen=True, eq=False)
class IndependentMechanism:
    graph: NeighborhoodGraph
    alphabet: OutputAlphabet
    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        shape = (self.graph.n_datasets, len(self.alphabet))
        if rows.shape != shape:
            raise MechanismError(f"rows must have shape {shape}, got {rows.shape}")
        for i, row in enumerate(rows):
            _check_distribution(row, f"row {i + 1} (dataset {self.graph.labels[i]!r})")
        object.__setattr__(self, "rows", _frozen(rows))

    @property
    def n_datasets(self) -> int:
        return self.graph.n_datasets

    @property
    def n_values(self) -> int:
        return len(self.alphabet)

    def marginal(self, i: int) -> np.ndarray:
        _check_dataset_index(i, self.n_datasets)
        return self.rows[i]

    def marginals(self) -> np.ndarray:
        return self.rows


@dataclass(frozen=True, eq=False)
class JointMechanism:
    graph: NeighborhoodGraph
    alphabet: OutputAlphabet
    probs: np.ndarray

    def __post_init__(self):
        size = joint_size(self.graph.n_datasets, len(self.alphabet))
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if probs.shape != (size,):
            raise MechanismError(f"probs must have length {size}, got {probs.size}")
        _check_distribution(probs, "joint probability vector")
        object.__setattr__(self, "probs", _frozen(probs))

    @property
    def n_datasets(self) -> int:
        return self.graph.n_datasets

    @property
    def n_values(self) -> int:
        return len(self.alphabet)

    def tensor(self) -> np.ndarray:
        """View of ``probs`` with one axis per dataset."""
        return self.probs.reshape((self.n_values,) * self.n_datasets)

    def marginal(self, i: int) -> np.ndarray:
        return marginal(self, i)

    def marginals(self) -> np.ndarray:
        t = self.tensor()
        axes = range(self.n_datasets)
        return np.stack([t.sum(axis=tuple(a for a in axes if a != i)) for i in axes])

    def prob(self, outcome: Sequence[int]) -> float:
        return float(self.probs[outcome_index(outcome, self.n_values, self.n_datasets)])


Mechanism = Union[IndependentMechanism, JointMechanism]


def joint_size(n_datasets: int, n_values: int, cap: int = MAX_JOINT_SIZE) -> int:
    size = n_values**n_datasets
    if size > cap:
        raise SizeLimitExceeded(
            f"|V|^|D| = {n_values}^{n_datasets} = {size} exceeds the cap of {cap}"
        )
    return size


def _check_dataset_index(i: int, n: int) -> None:
    if not 0 <= i < n:
        raise IndexOutOfRange(f"dataset index {i} outside 0..{n - 1}")


def outcome_index(outcome: Sequence[int], n_values: int, n_datasets: int | None = None) -> int:
    """Mixed-radix index of an outcome tuple, dataset 0 most significant."""
    if n_datasets is not None and len(outcome) != n_datasets:
        raise IndexOutOfRange(f"outcome has length {len(outcome)}, expected {n_datasets}")
    idx = 0
    for v in outcome:
        if not 0 <= v < n_values:
            raise IndexOutOfRange(f"value index {v} outside 0..{n_values - 1}")
        idx = idx * n_values + int(v)
    return idx


def outcome_tuple(index: int, n_datasets: int, n_values: int) -> tuple[int, ...]:
    if not 0 <= index < n_values**n_datasets:
        raise IndexOutOfRange(f"outcome index {index} outside 0..{n_values**n_datasets - 1}")
    out = []
    for _ in range(n_datasets):
        index, v = divmod(index, n_values)
        out.append(v)
    return tuple(reversed(out))


def marginal(joint: JointMechanism, i: int) -> np.ndarray:
    """Distribution of ``M(d_i)`` under a joint mechanism."""
    _check_dataset_index(i, joint.n_datasets)
    t = joint.tensor()
    return t.sum(axis=tuple(a for a in range(joint.n_datasets) if a != i))


def pair_marginal(joint: JointMechanism, i: int, k: int) -> np.ndarray:
    """``Q[j, l] = Pr[M(d_i) = v_j, M(d_k) = v_l]``."""
    _check_dataset_index(i, joint.n_datasets)
    _check_dataset_index(k, joint.n_datasets)
    if i == k:
        raise IndexOutOfRange("pair marginal needs two distinct datasets")
    t = joint.tensor()
    q = t.sum(axis=tuple(a for a in range(joint.n_datasets) if a not in (i, k)))
    return q if i < k else q.T


def embed_independent(ind: IndependentMechanism, cap: int = MAX_JOINT_SIZE) -> JointMechanism:
    """The joint mechanism whose tuple probabilities are products of the rows."""
    joint_size(ind.n_datasets, ind.n_values, cap)
    probs = reduce(np.multiply.outer, ind.rows).reshape(-1)
    return JointMechanism(ind.graph, ind.alphabet, probs)


def product_of_marginals(joint: JointMechanism) -> np.ndarray:
    return reduce(np.multiply.outer, joint.marginals()).reshape(-1)


def is_independent(joint: JointMechanism, tol: float = 1e-9) -> bool:
    """True iff every tuple probability equals the product of its marginals within ``tol``."""
    return bool(np.max(np.abs(joint.probs - product_of_marginals(joint))) <= tol)


def as_joint(mech: Mechanism, cap: int = MAX_JOINT_SIZE) -> JointMechanism:
    return mech if isinstance(mech, JointMechanism) else embed_independent(mech, cap)
