"""Simulator and security-analysis toolkit for a single-state semi-quantum
key distribution protocol with B92-style sifting."""

from .channels import (
    AttackVectors,
    DepolarizingChannel,
    ForwardAttack,
    ReverseAttack,
    apply_depolarizing,
    depolarizing_dilation,
    derive_vectors,
    induced_transit_channel,
    random_attack,
    random_symmetric_attack,
)
from .protocol import (
    IterationRecord,
    ObservedStats,
    ProtocolConfig,
    Transcript,
    estimate_stats,
    run,
    run_test_round,
    sift,
)
from .qmath import (
    DensityOperator,
    DimensionMismatch,
    DomainError,
    InvariantViolation,
    ProbDist,
    PureState,
    binary_entropy,
    born_probability,
    partial_trace,
    shannon_entropy,
    von_neumann_entropy,
)
from .security import (
    DegenerateChannelError,
    ExactAttackState,
    JointDistribution,
    JointWeights,
    KeyRateReport,
    NoThresholdError,
    Observables,
    attack_key_rate_report,
    channel_observables,
    depolarizing_key_rate,
    depolarizing_overlap_bound,
    depolarizing_report,
    depolarizing_statistics,
    exact_attack_state,
    exact_key_rate,
    joint_distribution,
    joint_weights,
    key_rate_lower,
    lambda_bound,
    overlap_lower_bound,
    sweep,
    threshold_p,
)

__version__ = "0.1.0"
