"""Explicit mechanisms and region samplers for the binary toy problem.

The samplers evaluate flags on a regular grid whose step divides 1/2, so
0, 1/2 and 1 are always grid values.  Coordinates are exact multiples
``i / N`` rather than accumulated sums.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, TextIO

import numpy as np

from jointdp.certify import hockey_stick_array
from jointdp.errors import BadAlpha, BadStep, MissingEdge
from jointdp.mechanisms import (
    MAX_JOINT_SIZE,
    IndependentMechanism,
    JointMechanism,
    NeighborhoodGraph,
    OutputAlphabet,
    joint_size,
    outcome_index,
)

# Slack for grid-flag comparisons; boundary points count as inside for
# non-strict inequalities and outside for strict ones.
FLAG_TOL = 1e-12


def tight_half_mechanism(graph: NeighborhoodGraph, alphabet: OutputAlphabet) -> IndependentMechanism:
    """Nontrivial independent mechanism with influence exactly 1/2.

    Dataset 0 outputs the first two values with probability 1/2 each; every
    other dataset always outputs the second value.
    """
    rows = np.zeros((graph.n_datasets, len(alphabet)))
    rows[0, :2] = 0.5
    rows[1:, 1] = 1.0
    return IndependentMechanism(graph, alphabet, rows)


def low_influence_nontrivial(
    graph: NeighborhoodGraph, alphabet: OutputAlphabet, alpha: float, cap: int = MAX_JOINT_SIZE
) -> JointMechanism:
    """Nontrivial joint mechanism whose influence is exactly ``alpha``.

    Mass (1 - alpha)/2 on the all-first and all-second tuples, and ``alpha``
    on the tuple that is all-first except for dataset 1.  Requires datasets
    0 and 1 to be neighbors.
    """
    if not 0 < alpha < 1:
        raise BadAlpha(f"alpha must lie in (0, 1), got {alpha}")
    if not graph.has_edge(0, 1):
        raise MissingEdge(f"datasets {graph.labels[0]!r} and {graph.labels[1]!r} must be neighbors")
    nd, nv = graph.n_datasets, len(alphabet)
    probs = np.zeros(joint_size(nd, nv, cap))
    probs[outcome_index([0] * nd, nv)] = (1 - alpha) / 2
    probs[outcome_index([1] * nd, nv)] = (1 - alpha) / 2
    probs[outcome_index([0, 1] + [0] * (nd - 2), nv)] = alpha
    return JointMechanism(graph, alphabet, probs)


@dataclass(frozen=True)
class RegionPoint:
    x: float
    y: float
    z: Optional[float]
    simplex: bool
    dp: bool
    li: bool
    nontrivial: bool


@dataclass(frozen=True, eq=False)
class Region:
    """Flags over a sampled grid, stored column-wise; iterate for points."""

    kind: str
    epsilon: float
    delta: float
    iota: float
    step: float
    coords: np.ndarray
    simplex: np.ndarray
    dp: np.ndarray
    li: np.ndarray
    nontrivial: np.ndarray

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[RegionPoint]:
        three = self.coords.shape[1] == 3
        for c, s, d, l, n in zip(self.coords.tolist(), self.simplex, self.dp, self.li, self.nontrivial):
            yield RegionPoint(c[0], c[1], c[2] if three else None, bool(s), bool(d), bool(l), bool(n))

    def filename(self) -> str:
        return f"region_{self.kind}_{self.epsilon:.12g}_{self.delta:.12g}_{self.iota:.12g}.csv"

    def write_csv(self, out: TextIO) -> None:
        axes = ["x", "y", "z"][: self.coords.shape[1]]
        w = csv.writer(out, lineterminator="\n")
        w.writerow(axes + ["simplex", "dp", "li", "nontrivial"])
        flags = np.stack([self.simplex, self.dp, self.li, self.nontrivial], axis=1).astype(int)
        for c, f in zip(self.coords.tolist(), flags.tolist()):
            w.writerow([f"{v:.12g}" for v in c] + f)

    def save(self, directory: Path | str = ".") -> Path:
        path = Path(directory) / self.filename()
        with path.open("w", newline="") as fh:
            self.write_csv(fh)
        return path


def read_region_csv(f: TextIO) -> list[RegionPoint]:
    reader = csv.DictReader(f)
    three = "z" in (reader.fieldnames or [])
    out = []
    for r in reader:
        out.append(RegionPoint(
            float(r["x"]), float(r["y"]), float(r["z"]) if three else None,
            r["simplex"] == "1", r["dp"] == "1", r["li"] == "1", r["nontrivial"] == "1",
        ))
    return out


def grid_size(step: float) -> int:
    """Number of intervals ``N = 1/step``; ``N`` must be even so 1/2 is a grid value."""
    if not 0 < step <= 0.5:
        raise BadStep(f"step must be in (0, 1/2], got {step}")
    n = round(1 / step)
    if abs(n * step - 1) > 1e-9 or n % 2:
        raise BadStep(f"step {step} does not divide 1/2")
    return n


def _side(p: np.ndarray) -> np.ndarray:
    """+1 / 0 / -1 when the first value is more / equally / less likely than the second."""
    return np.where(p > 0.5 + FLAG_TOL, 1, np.where(p < 0.5 - FLAG_TOL, -1, 0))


def region_independent_binary(epsilon: float, delta: float, iota: float, step: float) -> Region:
    """Flags on the ``(x, y)`` grid, ``x = Pr[M(d_1)=1]``, ``y = Pr[M(d_2)=1]``.

    The dp flag is the four binary privacy inequalities and the li flag is
    ``x + y - 2xy <= iota``.
    """
    n = grid_size(step)
    g = np.arange(n + 1) / n
    x, y = (a.ravel() for a in np.meshgrid(g, g, indexing="ij"))
    s = math.exp(epsilon)
    t = delta + FLAG_TOL
    dp = (
        (x <= s * y + t)
        & (y <= s * x + t)
        & (1 - x <= s * (1 - y) + t)
        & (1 - y <= s * (1 - x) + t)
    )
    li = x + y - 2 * x * y <= iota + FLAG_TOL
    return Region(
        "independent", epsilon, delta, iota, step,
        coords=np.stack([x, y], axis=1),
        simplex=np.ones_like(x, dtype=bool),
        dp=dp, li=li,
        nontrivial=_side(x) != _side(y),
    )


def region_joint_binary(epsilon: float, delta: float, iota: float, step: float) -> Region:
    """Flags on the ``(x, y, z)`` cube for a joint binary mechanism.

    ``x = P(1,2)``, ``y = P(2,1)``, ``z = P(1,1)``.  The marginals are
    ``Pr[M(d_1)=1] = x + z`` and ``Pr[M(d_2)=1] = y + z``.
    """
    n = grid_size(step)
    g = np.arange(n + 1) / n
    x, y, z = (a.ravel() for a in np.meshgrid(g, g, g, indexing="ij"))
    a = x + z
    b = y + z
    m1 = np.stack([a, 1 - a], axis=1)
    m2 = np.stack([b, 1 - b], axis=1)
    worst = np.maximum(hockey_stick_array(m1, m2, epsilon), hockey_stick_array(m2, m1, epsilon))
    nontrivial = ((a > 0.5 + FLAG_TOL) & (b < 0.5 - FLAG_TOL)) | (
        (a < 0.5 - FLAG_TOL) & (b > 0.5 + FLAG_TOL)
    )
    return Region(
        "joint", epsilon, delta, iota, step,
        coords=np.stack([x, y, z], axis=1),
        simplex=x + y + z <= 1 + FLAG_TOL,
        dp=worst <= delta + FLAG_TOL,
        li=x + y <= iota + FLAG_TOL,
        nontrivial=nontrivial,
    )
