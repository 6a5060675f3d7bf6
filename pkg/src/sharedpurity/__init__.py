"""Shared purity of multipartite quantum states."""
from .states import (
    DensityOperator,
    PureState,
    StateError,
    eig_hermitian,
    haar_random_pure,
    partial_trace,
    random_density,
    tensor,
)
from .fidelity import (
    OptimizerConfig,
    SharedPurityResult,
    global_fidelity,
    local_fidelity,
    pure_state_shared_purity,
    schmidt,
    shared_purity,
)

__version__ = "0.1.0"
