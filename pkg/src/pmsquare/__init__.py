"""Peres-Mermin square state-recycling simulator and analysis toolkit.

Builds the nine-observable measurement square and its 24 joint eigenstates,
derives the Markov chain induced by recycling post-measurement states
(with and without misaligned measurements), runs seeded Monte Carlo
experiments in both chain and density-matrix modes, and evaluates the
noncontextuality inequality with its noise threshold.
"""

__version__ = "0.1.0"

from .analysis import (
    CLASSICAL_BOUND,
    QUANTUM_VALUE,
    CorrelatorEstimate,
    CorrelatorSet,
    InequalityReport,
    SweepPoint,
    coupon_expectation,
    estimate_correlators,
    evaluate_inequality,
    noisy_inequality_value,
    sweep_noise,
)
from .chain import (
    SpectralSummary,
    TransitionMatrix,
    build_error_chain,
    build_perfect_chain,
    effective_state,
    mixing_time_bound,
    spectrum,
    stationary,
    step,
    tv_distance,
    worst_case_distance,
)
from .errors import (
    AlgebraViolation,
    ConfigError,
    DimensionMismatch,
    DomainError,
    InsufficientData,
    InvalidState,
    NoConvergence,
    PMSquareError,
)
from .experiment import (
    DEFAULT_BURN_IN,
    ExperimentConfig,
    MeasurementRecord,
    Trajectory,
    coupon_time,
    recurrence_times,
    run,
    state_occupancy,
)
from .operators import (
    CONTEXT_OBSERVABLES,
    CONTEXT_SIGNS,
    SquareOperators,
    TripleState,
    all_triple_states,
    born_probability,
    build_square,
    pauli,
    tensor,
    triple_eigenbasis,
)

__all__ = [
    "AlgebraViolation",
    "CLASSICAL_BOUND",
    "CONTEXT_OBSERVABLES",
    "CONTEXT_SIGNS",
    "ConfigError",
    "CorrelatorEstimate",
    "CorrelatorSet",
    "DEFAULT_BURN_IN",
    "DimensionMismatch",
    "DomainError",
    "ExperimentConfig",
    "InequalityReport",
    "InsufficientData",
    "InvalidState",
    "MeasurementRecord",
    "NoConvergence",
    "PMSquareError",
    "QUANTUM_VALUE",
    "SpectralSummary",
    "SquareOperators",
    "SweepPoint",
    "Trajectory",
    "TransitionMatrix",
    "TripleState",
    "all_triple_states",
    "born_probability",
    "build_error_chain",
    "build_perfect_chain",
    "build_square",
    "coupon_expectation",
    "coupon_time",
    "effective_state",
    "estimate_correlators",
    "evaluate_inequality",
    "mixing_time_bound",
    "noisy_inequality_value",
    "pauli",
    "recurrence_times",
    "run",
    "spectrum",
    "state_occupancy",
    "stationary",
    "step",
    "sweep_noise",
    "tensor",
    "triple_eigenbasis",
    "tv_distance",
    "worst_case_distance",
]
