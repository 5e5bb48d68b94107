"""Tensor-network evaluation of Haar-averaged circuit moments."""

from .analysis import (
    PurityDistribution,
    anticoncentration_curve,
    collision_probability,
    deep_hea_reduced_state,
    entropy_scan,
    haar_purities,
    k_purities,
    phi_k_mps,
    q02_mps,
    weight_gauge,
    z_haar,
)
from .circuits import (
    PNet,
    Topology,
    build_pnet,
    circuit_moment,
    evolve,
    hea_topology,
    moment,
    qcnn_topology,
    random_topology,
    vectorize_pauli_obs,
    vectorize_product_state,
)
from .commutant import CommutantBasis, PGate, pgate, pgate_o4_t2, pgate_u4_t2, pgate_ff_so4_t2, site_basis
from .montecarlo import kl_divergence, mc_sample_purities, sample_complexity_bound, sign_problem_report
from .mps import MPS, apply_pgate, entropy_renyi2, entropy_vn, inner_product, sweep_compress
from .oracle import exact_moment_small, exact_twirl_projector, haar_sample

__all__ = [
    "CommutantBasis", "MPS", "PGate", "PNet", "PurityDistribution", "Topology",
    "anticoncentration_curve", "apply_pgate", "build_pnet", "circuit_moment", "collision_probability",
    "deep_hea_reduced_state", "entropy_renyi2", "entropy_scan", "entropy_vn", "evolve",
    "exact_moment_small", "exact_twirl_projector", "haar_purities", "haar_sample", "hea_topology",
    "inner_product", "k_purities", "kl_divergence", "mc_sample_purities", "moment", "pgate",
    "pgate_ff_so4_t2", "pgate_o4_t2", "pgate_u4_t2", "phi_k_mps", "q02_mps", "qcnn_topology",
    "random_topology", "sample_complexity_bound", "sign_problem_report", "site_basis",
    "sweep_compress", "vectorize_pauli_obs", "vectorize_product_state", "weight_gauge", "z_haar",
]
