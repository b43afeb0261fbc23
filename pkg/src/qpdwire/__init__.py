"""Quasiprobability simulation of ideal state transfer over noisy channels."""

from .calibration import CalibrationResult, calibrate, calibrate_exact
from .channels import (
    Channel,
    LinearMap,
    choi_state,
    coherent_offdiag_sum,
    depolarizing,
    entanglement_fidelity,
    from_chi,
    pauli_channel,
    ptm_rank,
    to_chi,
)
from .noise import (
    NoiseModelParams,
    ResourceState,
    combes_channel,
    random_channel_targeting,
    swap_degraded_resource,
    teleportation_channel,
)
from .pauli import (
    CommutingPartition,
    PauliOperator,
    commuting_partition,
    full_pauli_average,
    hs_inner,
    pauli_product,
    z_average,
)
from .qpd import (
    QpdPlan,
    ShotRecord,
    bias_bound,
    build_d0,
    build_plan,
    estimate_expectation,
    exact_implemented_channel,
    hoeffding_shots,
    mp_channel,
)
from .states import DensityMatrix, haar_pure_state, max_entangled
from .twirling import (
    UnitaryEnsemble,
    single_qubit_pauli_mixing,
    single_qubit_two_design,
    twirl,
    verify_pauli_mixing,
)

__version__ = "0.1.0"
