"""Finite randomized mechanisms: differential privacy, low influence, and joint design."""

from jointdp.certify import (
    CertificateReport,
    PrivacyParams,
    check_dp,
    check_vdp,
    hockey_stick,
    influence,
    influence_lower_bounds,
    is_nontrivial,
    li_to_dp_bound,
    tightest_delta,
    tightest_vdp_delta,
    vdp_to_dp,
)
from jointdp.mechanisms import (
    IndependentMechanism,
    JointMechanism,
    NeighborhoodGraph,
    OutputAlphabet,
    build_graph,
    embed_independent,
    hamming_graph,
    is_independent,
    marginal,
    outcome_index,
    outcome_tuple,
    pair_marginal,
    path_graph,
)

__version__ = "0.1.0"

__all__ = [
    "CertificateReport",
    "IndependentMechanism",
    "JointMechanism",
    "NeighborhoodGraph",
    "OutputAlphabet",
    "PrivacyParams",
    "build_graph",
    "check_dp",
    "check_vdp",
    "embed_independent",
    "hamming_graph",
    "hockey_stick",
    "influence",
    "influence_lower_bounds",
    "is_independent",
    "is_nontrivial",
    "li_to_dp_bound",
    "marginal",
    "outcome_index",
    "outcome_tuple",
    "pair_marginal",
    "path_graph",
    "tightest_delta",
    "tightest_vdp_delta",
    "vdp_to_dp",
]
