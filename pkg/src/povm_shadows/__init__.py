"""Shadow process tomography with generalized measurements.

Classical-shadow construction by least-squares frame inversion, Choi-state
channel handling, exact shadow-norm evaluation, a median-of-means sample
planner, and a simulated-annealing optimizer over Bloch-parametrized POVMs.
"""

__version__ = "0.1.0"

from .anneal import (
    AnnealConfig,
    AnnealResult,
    OptimizeChoiResult,
    anneal,
    energy,
    optimize_choi,
    pair_energy,
    perturb_pair,
    symmetric_bloch_povm,
)
from .channels import (
    ChoiState,
    KrausChannel,
    amplitude_damping_channel,
    apply_channel,
    apply_via_choi,
    channel_from_dict,
    choi_expectation,
    choi_state,
    depolarizing_channel,
    identity_channel,
    outcome_distribution,
    phase_damping_channel,
    random_channel,
    unitary_channel,
)
from .estimation import (
    Estimate,
    MomPlan,
    SimulationResult,
    estimator_tables,
    exact_variance,
    median_of_means,
    plan,
    sample_outcomes,
    shot_estimator,
    simulate_channel_estimation,
)
from .norms import (
    CompositeObservable,
    NormReport,
    ProjectiveEnsemble,
    SeparabilityStructure,
    bloch_norm_sq,
    bloch_norms_sq,
    choi_shadow_norm_sq,
    factorized_kappa_sq,
    kappa_sq,
    log2_pauli_bound_sq_product,
    pauli_bound_sq,
    pauli_bound_sq_product,
    pauli_measurement_ensemble,
    product_ensemble,
    projective_ensemble_norm_sq,
    shadow_norm_sq,
)
from .povm import (
    BlochPovm,
    ClassicalShadowSet,
    FrameOperator,
    NotInformationallyCompleteError,
    Povm,
    PovmValidity,
    SingularWError,
    bloch_povm_to_povm,
    canonical_povm,
    classical_shadows,
    frame_operator,
    least_squares_estimate,
    pauli6_povm,
    povm_from_dict,
    povm_from_effects,
    povm_to_bloch_povm,
    povm_to_dict,
    random_povm,
    shadow_bloch_vectors,
    split_uniform_trace,
    tetrahedral_povm,
    validate_povm,
    w_matrix,
)
