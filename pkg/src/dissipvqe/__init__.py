"""Density-matrix simulator and training lab for variational eigensolvers
with engineered single-qubit dissipation."""

__version__ = "0.1.0"

from .analytic import (
    cost_ed,
    cost_n,
    cost_u,
    landscape_grid,
    optimal_dt,
    var_grad_ed,
    var_grad_u,
)
from .circuit import (
    AnsatzSpec,
    ProductXAnsatz,
    apply_ansatz,
    apply_product_x_ansatz,
    build_ansatz,
    initial_state,
)
from .collision import (
    CollisionConfig,
    CollisionResult,
    collision_channel,
    collision_step,
    resource_report,
    step_unitary,
)
from .hamiltonian import (
    LocalityProfile,
    PauliSum,
    RandomHamiltonianSpec,
    effective_hamiltonian,
    expectation,
    hf_dissipators,
    load_pauli_file,
    random_hamiltonian,
    warmup_hamiltonian,
)
from .lindblad import (
    ChannelSpec,
    ConvexChannelSpec,
    DissipatorSpec,
    LiouvillianSpec,
    SpectralAnalysis,
    adjoint_channel_on_observable,
    apply_channel,
    apply_convex_channel,
    channel_superoperators,
    dissipator_superoperator,
    jump_operator,
    recommended_dt,
    spectral_analysis,
)
from .training import (
    CostEngine,
    ModelSpec,
    TrainConfig,
    TrainTrace,
    cost,
    grad_sigma,
    grad_theta,
    gradient_descent,
)
from .variance import (
    GradientSampleConfig,
    VarianceExperiment,
    VariancePoint,
    run_experiment,
    sample_gradient,
)
