"""Exact finite-state kernels and spectral checks used as oracles for the live samplers."""

from .analysis import (
    DominanceReport,
    SingularTriplets,
    SpectrumReport,
    check_detailed_balance,
    conditional_projection,
    haar_triviality_check,
    spectrum,
    stationary_distribution,
    svd_triplets,
    verify_dominance,
)
from .discrete import BlockedDiscreteJoint, DiscreteJoint, PermutationGroup, TwoBlockDiscreteJoint, sample_rows
from .gaussian import CompactnessReport, GaussianToy, compactness_diagnostics, nystrom_spectrum
from .kernels import (
    TransitionMatrix,
    adda_exact_kernel_discrete,
    build_da_joint_kernel,
    build_da_kernel,
    build_haar_pxda_kernel,
    build_sandwich_kernel,
    build_two_block_kernel,
    build_two_block_pxda_kernel,
    group_middle_kernel,
)

__all__ = [
    "BlockedDiscreteJoint",
    "CompactnessReport",
    "DiscreteJoint",
    "DominanceReport",
    "GaussianToy",
    "PermutationGroup",
    "SingularTriplets",
    "SpectrumReport",
    "TransitionMatrix",
    "TwoBlockDiscreteJoint",
    "adda_exact_kernel_discrete",
    "build_da_joint_kernel",
    "build_da_kernel",
    "build_haar_pxda_kernel",
    "build_sandwich_kernel",
    "build_two_block_kernel",
    "build_two_block_pxda_kernel",
    "check_detailed_balance",
    "compactness_diagnostics",
    "conditional_projection",
    "group_middle_kernel",
    "haar_triviality_check",
    "nystrom_spectrum",
    "sample_rows",
    "spectrum",
    "stationary_distribution",
    "svd_triplets",
    "verify_dominance",
]
