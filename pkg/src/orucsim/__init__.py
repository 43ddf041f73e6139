"""orucsim: build, simulate and learn random unitary channels on Pauli bases."""

from .paulis import (
    PauliString,
    PhasedPauli,
    SignMatrix,
    commutator_string,
    enumerate_paulis,
    pauli_index,
    pauli_product,
    sign_matrix,
    symplectic_inner,
)
from .channels import (
    Channel,
    Composition,
    GeneralRUC,
    OrucChannel,
    PauliChannel,
    ProbabilityVector,
    SparseMultiplicative,
    UnitaryChannel,
    WeylChannel,
    WeylIndex,
    adjoint_channel,
    apply_channel_exact,
    apply_channel_sampled,
    clifford_conjugated_pauli_probs,
    fidelities_from_probs,
    probs_from_fidelities,
    ptm_of,
    sparse_additive_channel,
    weyl_matrix,
)
from .dense import (
    GeneratorSet,
    channel_distance,
    exp_pauli_sum,
    haar_unitary,
    pauli_matrix,
)
from .expectations import (
    CallCounter,
    MeasurementPlan,
    build_measurement_plan,
    expectation_exact,
    expectation_sampled,
    pauli_input_decomposition,
)
from .oruc_learning import (
    LearnerSettings,
    OrucEstimate,
    Schedule,
    absorb_dominant_pauli,
    learn_oruc,
    locally_equivalent_solutions_check,
    transformed_pauli_target,
)
from .sparse_models import (
    Layout,
    SparseChannelStats,
    avg_fidelity_additive,
    avg_fidelity_multiplicative,
    brute_force_avg_fidelity,
    build_layout,
    equivalent_pbar,
    feasibility_check,
    layout_delta,
)
from .pauli_learning import (
    PauliLearnState,
    lstsq_update,
    project_simplex,
    riemannian_grad,
    simplex_rgd_run,
)
from .unitary_learning import (
    AdamUpdater,
    PQCAnsatz,
    RotationGate,
    UnitaryLearnState,
    cql_full_step,
    cql_gradients,
    cql_plan_step,
    cql_run,
    cql_step,
    default_generators,
    pair_loss,
    pqc_gradient,
    ri_cql_plan_step,
    ri_cql_step,
)

__all__ = [name for name in dir() if not name.startswith("_")]
