"""Routing games assisted by classical, quantum and no-signaling correlations."""

from .bell import (
    Behavior,
    CorrelationParams,
    DeterministicStrategy,
    LocalModel,
    Locality,
    behavior_from_params,
    certify_local,
    check_no_signaling,
    chsh_value,
    lhv_decomposition,
    local_deterministic_vertices,
    ns_extremal_vertices,
    params_from_behavior,
    pr_box,
    tilted_value,
)
from .errors import (
    CapExceeded,
    DomainError,
    EmptyRegion,
    InvalidParams,
    NotAProbabilityTable,
    NotLocal,
    SignalingInput,
    SolverError,
)
from .game import (
    GeneralVrp,
    PayoffTable,
    TiltedVrpParams,
    TypePrior,
    VrpParams,
    build_payoff_table,
    build_tilted_payoff_table,
    earnings,
    earnings_closed_form,
    optimal_path_configuration,
    tilted_earnings,
    validate_params,
)
from .montecarlo import SimulationReport, simulate_rounds
from .optimize import (
    OptimizationOutcome,
    SearchSettings,
    StrategyClass,
    advantage_scan,
    classical_optimum,
    ns_optimum,
    quantum_optimum,
)
from .quantum import (
    QuantumStrategy,
    behavior_from_quantum,
    canonical_chsh_strategy,
    tilted_optimal_strategy,
)

__version__ = "0.1.0"
