"""Certificates for (eps, delta)-DP, value DP, low influence and nontriviality.

Privacy is a property of the single-dataset marginals, so both mechanism
classes are checked on ``mech.marginals()``.  Influence needs the coupling
of neighboring outputs: for an independent mechanism it is the quadratic
``1 - <M_i, M_k>``, for a joint mechanism the off-diagonal mass of the pair
marginal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from jointdp.errors import AlphabetMismatch, DomainError
from jointdp.mechanisms import (
    IndependentMechanism,
    Mechanism,
    SUM_TOL,
    pair_marginal,
)

TIE_TOL = 1e-9


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float
    delta: float

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon}")
        if not 0 <= self.delta <= 1:
            raise DomainError(f"delta must be in [0, 1], got {self.delta}")


@dataclass(frozen=True)
class EdgeProfile:
    """One value per neighbor edge; ``overall`` is the max over edges."""

    edges: tuple[tuple[int, int], ...]
    values: tuple[float, ...]

    @property
    def overall(self) -> float:
        return max(self.values)

    def __getitem__(self, edge: tuple[int, int]) -> float:
        i, k = edge
        return self.values[self.edges.index((min(i, k), max(i, k)))]


class Witness(NamedTuple):
    i: int
    k: int
    value: int


def _as_dist(p) -> list[float]:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise AlphabetMismatch("distributions must be one-dimensional")
    if abs(math.fsum(p) - 1.0) > SUM_TOL:
        raise DomainError(f"distribution sums to {math.fsum(p):.12g}, not 1")
    return p.tolist()


def hockey_stick(p, q, epsilon: float) -> float:
    """Smallest delta with ``p(S) <= e^eps q(S) + delta`` for every subset S.

    The worst subset is ``{v : p(v) > e^eps q(v)}``, so the supremum over
    subsets collapses to a sum of positive parts.
    """
    p, q = _as_dist(p), _as_dist(q)
    if len(p) != len(q):
        raise AlphabetMismatch(f"alphabet sizes differ: {len(p)} vs {len(q)}")
    scale = math.exp(epsilon)
    return max(0.0, math.fsum(max(0.0, a - scale * b) for a, b in zip(p, q)))


def hockey_stick_array(p: np.ndarray, q: np.ndarray, epsilon: float) -> np.ndarray:
    """Vectorised :func:`hockey_stick` over the last axis, no validation."""
    return np.maximum(0.0, p - math.exp(epsilon) * q).sum(axis=-1)


def _edges(mech: Mechanism) -> tuple[tuple[int, int], ...]:
    return tuple(mech.graph.edge_list())


def tightest_delta(mech: Mechanism, epsilon: float) -> EdgeProfile:
    """Per-edge smallest delta for which ``mech`` is (eps, delta)-DP."""
    m = mech.marginals()
    edges = _edges(mech)
    vals = tuple(
        max(hockey_stick(m[i], m[k], epsilon), hockey_stick(m[k], m[i], epsilon))
        for i, k in edges
    )
    return EdgeProfile(edges, vals)


def tightest_vdp_delta(mech: Mechanism, epsilon: float) -> EdgeProfile:
    """Per-edge smallest delta satisfying the singleton-set (value) DP rows."""
    m = mech.marginals()
    scale = math.exp(epsilon)
    edges = _edges(mech)
    vals = tuple(
        max(0.0, float(np.max(m[i] - scale * m[k])), float(np.max(m[k] - scale * m[i])))
        for i, k in edges
    )
    return EdgeProfile(edges, vals)


def check_dp(mech: Mechanism, epsilon: float, delta: float, tol: float = 0.0) -> tuple[bool, float]:
    best = tightest_delta(mech, epsilon).overall
    return best <= delta + tol, best


def check_vdp(mech: Mechanism, epsilon: float, delta: float, tol: float = 0.0) -> tuple[bool, float]:
    best = tightest_vdp_delta(mech, epsilon).overall
    return best <= delta + tol, best


def vdp_to_dp(epsilon: float, delta: float, alphabet_size: int) -> PrivacyParams:
    """(eps, delta)-VDP implies (eps, (|V| - 1) delta)-DP."""
    return PrivacyParams(epsilon, min(1.0, (alphabet_size - 1) * delta))


def li_to_dp_bound(iota: float, alphabet_size: int) -> PrivacyParams:
    """An iota-LI mechanism is (0, iota (|V| - 1))-DP."""
    if not 0 <= iota <= 1:
        raise DomainError(f"iota must be in [0, 1], got {iota}")
    return PrivacyParams(0.0, min(1.0, iota * (alphabet_size - 1)))


def influence(mech: Mechanism) -> EdgeProfile:
    """Per-edge ``Pr[M(d_i) != M(d_k)]``."""
    edges = _edges(mech)
    if isinstance(mech, IndependentMechanism):
        rows = mech.rows
        vals = tuple(1.0 - float(rows[i] @ rows[k]) for i, k in edges)
    else:
        off = ~np.eye(mech.n_values, dtype=bool)
        vals = tuple(float(pair_marginal(mech, i, k)[off].sum()) for i, k in edges)
    return EdgeProfile(edges, vals)


def argmax_set(dist, tie_tol: float = TIE_TOL) -> frozenset[int]:
    dist = np.asarray(dist, dtype=float)
    return frozenset(np.flatnonzero(dist >= dist.max() - tie_tol).tolist())


def is_nontrivial(mech: Mechanism, tie_tol: float = TIE_TOL) -> tuple[bool, Optional[Witness]]:
    """Whether the most likely output changes across some neighbor edge.

    Ties are handled by comparing argmax *sets*; the witness is the first
    edge whose sets differ and the smallest value in their symmetric
    difference.
    """
    m = mech.marginals()
    sets = [argmax_set(row, tie_tol) for row in m]
    for i, k in _edges(mech):
        diff = sets[i] ^ sets[k]
        if diff:
            return True, Witness(i, k, min(diff))
    return False, None


@dataclass(frozen=True)
class InfluenceBounds:
    """Lower bounds on the influence of an independent mechanism.

    ``half`` and ``square`` only apply to nontrivial mechanisms and are
    ``None`` otherwise.
    """

    half: Optional[float]
    square: Optional[float]
    maxprob: float

    def applicable(self) -> list[float]:
        return [b for b in (self.half, self.square, self.maxprob) if b is not None]


def influence_lower_bounds(ind: IndependentMechanism, tie_tol: float = TIE_TOL) -> InfluenceBounds:
    nontrivial, _ = is_nontrivial(ind, tie_tol)
    maxprob = 1.0 - float(ind.rows.max(axis=1).min())
    if not nontrivial:
        return InfluenceBounds(None, None, maxprob)
    return InfluenceBounds(0.5, 1.0 / ind.n_values**2, maxprob)


@dataclass(frozen=True)
class CertificateReport:
    epsilon: float
    edges: tuple[tuple[int, int], ...]
    edge_delta: tuple[float, ...]
    edge_influence: tuple[float, ...]
    vdp_delta: float
    nontrivial: bool
    witness: Optional[Witness]
    bounds: Optional[InfluenceBounds] = None
    alphabet: Sequence[str] = field(default=(), compare=False)

    @property
    def delta(self) -> float:
        return max(self.edge_delta)

    @property
    def influence(self) -> float:
        return max(self.edge_influence)

    def to_dict(self) -> dict:
        w = None
        if self.witness is not None:
            w = {"i": self.witness.i + 1, "k": self.witness.k + 1, "value": self.witness.value + 1}
            if self.alphabet:
                w["label"] = self.alphabet[self.witness.value]
        b = None
        if self.bounds is not None:
            b = {"half": self.bounds.half, "square": self.bounds.square, "maxprob": self.bounds.maxprob}
        return {
            "epsilon": self.epsilon,
            "edges": [
                {"i": i + 1, "k": k + 1, "delta": d, "influence": f}
                for (i, k), d, f in zip(self.edges, self.edge_delta, self.edge_influence)
            ],
            "delta": self.delta,
            "vdp_delta": self.vdp_delta,
            "influence": self.influence,
            "nontrivial": self.nontrivial,
            "witness": w,
            "bounds": b,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CertificateReport":
        edges = tuple((e["i"] - 1, e["k"] - 1) for e in d["edges"])
        w = d.get("witness")
        b = d.get("bounds")
        return cls(
            epsilon=float(d["epsilon"]),
            edges=edges,
            edge_delta=tuple(float(e["delta"]) for e in d["edges"]),
            edge_influence=tuple(float(e["influence"]) for e in d["edges"]),
            vdp_delta=float(d["vdp_delta"]),
            nontrivial=bool(d["nontrivial"]),
            witness=None if w is None else Witness(w["i"] - 1, w["k"] - 1, w["value"] - 1),
            bounds=None if b is None else InfluenceBounds(b["half"], b["square"], b["maxprob"]),
        )


def certify(mech: Mechanism, epsilon: float, tie_tol: float = TIE_TOL) -> CertificateReport:
    """Compute every certificate value for ``mech`` at privacy level ``epsilon``."""
    dp = tightest_delta(mech, epsilon)
    inf = influence(mech)
    nontrivial, witness = is_nontrivial(mech, tie_tol)
    bounds = influence_lower_bounds(mech, tie_tol) if isinstance(mech, IndependentMechanism) else None
    return CertificateReport(
        epsilon=epsilon,
        edges=dp.edges,
        edge_delta=dp.values,
        edge_influence=inf.values,
        vdp_delta=tightest_vdp_delta(mech, epsilon).overall,
        nontrivial=nontrivial,
        witness=witness,
        bounds=bounds,
        alphabet=mech.alphabet.values,
    )
