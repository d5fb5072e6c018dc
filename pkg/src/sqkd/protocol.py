"""Seeded Monte Carlo execution of the single-state two-way protocol.

One iteration: Alice sends |+>, the forward channel replaces it with the
biased state |e(b)>, Bob either reflects (CTRL, key bit 0) or discards and
sends |0> (SIFT, key bit 1), the reverse channel acts, and Alice measures in
a random basis.  Alice keeps the iteration only on the two conclusive
outcomes: Z-outcome 1 (key bit 0) or X-outcome minus (key bit 1), each of
which rules out one of Bob's two possible states.

Sampling uses the transit qubit's reduced state with any eavesdropper
ancilla traced out; only Alice's outcome statistics feed the analysis, so
the ancilla never needs to be simulated.  Random draws happen in a fixed
order (Bob's choices, Alice's bases, outcome uniforms, then test positions),
so a seed pins the entire transcript.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import DepolarizingChannel, ForwardAttack, ReverseAttack, induced_transit_channel
from .qmath import DensityOperator, DomainError, InvariantViolation, MINUS, ONE, born_probability

SIZING_PAPER = "paper_literal"
SIZING_REALIZED = "realized_l"

CTRL = "CTRL"
SIFT = "SIFT"

ABORT_SIZING = "sizing_shortfall"
ABORT_TEST = "test_error_rate"


@dataclass(frozen=True)
class ProtocolConfig:
    """Run parameters.

    reverse selects the reverse-channel model: None for an ideal channel, a
    DepolarizingChannel, or an explicit ReverseAttack probe.  test_threshold
    defaults to 1.0, which records the test error rate without ever aborting
    on it.  sizing_mode picks how the test-bit count n is fixed: the literal
    protocol rule n = floor(N / (4 (1 + delta))) with an abort when fewer
    than 2n bits survive sifting, or the realized rule n = floor(l / 2).
    """

    n_iterations: int
    b: float = 0.0
    reverse: DepolarizingChannel | ReverseAttack | None = None
    seed: int = 0
    delta: float = 0.1
    test_threshold: float = 1.0
    sizing_mode: str = SIZING_REALIZED

    def __post_init__(self):
        if int(self.n_iterations) < 8:
            raise InvariantViolation(f"n_iterations = {self.n_iterations} must be >= 8")
        if not abs(self.b) < 0.5:
            raise InvariantViolation(f"bias b = {self.b} must satisfy |b| < 1/2")
        if self.reverse is not None and not isinstance(
            self.reverse, (DepolarizingChannel, ReverseAttack)
        ):
            raise InvariantViolation(f"unsupported reverse channel {self.reverse!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvariantViolation(f"seed {self.seed} is not a 64-bit unsigned integer")
        if not self.delta > 0.0:
            raise InvariantViolation(f"delta = {self.delta} must be positive")
        if not 0.0 <= self.test_threshold <= 1.0:
            raise InvariantViolation(f"test threshold {self.test_threshold} outside [0, 1]")
        if self.sizing_mode not in (SIZING_PAPER, SIZING_REALIZED):
            raise InvariantViolation(f"unknown sizing mode {self.sizing_mode!r}")


@dataclass(frozen=True)
class IterationRecord:
    """One protocol iteration.

    alice_outcome is 0 or 1; in the X basis, 1 encodes the minus outcome.
    k_a is Alice's candidate key bit, -1 when the outcome was inconclusive.
    """

    bob_choice: str
    alice_basis: str
    alice_outcome: int
    kept: bool
    k_a: int
    k_b: int

    def __post_init__(self):
        conclusive = self.alice_outcome == 1
        if self.kept != conclusive:
            raise InvariantViolation("kept flag disagrees with the outcome")
        if (self.k_b == 0) != (self.bob_choice == CTRL):
            raise InvariantViolation("k_b disagrees with Bob's choice")
        expected_ka = -1 if not conclusive else (0 if self.alice_basis == "Z" else 1)
        if self.k_a != expected_ka:
            raise InvariantViolation("k_a disagrees with basis and outcome")


@dataclass(frozen=True)
class RatioEstimate:
    """An empirical ratio with its sample counts; value is None when the
    denominator is empty (the estimate is flagged missing)."""

    successes: int
    trials: int

    @property
    def value(self) -> float | None:
        if self.trials == 0:
            return None
        return self.successes / self.trials

    def sigma(self, p_true: float) -> float:
        """Binomial standard deviation around a hypothesized probability."""
        if self.trials == 0:
            raise DomainError("no trials recorded")
        return float(np.sqrt(p_true * (1.0 - p_true) / self.trials))


@dataclass(frozen=True)
class ObservedStats:
    """Empirical channel statistics gathered from a full run, including the
    discarded iterations."""

    e_z_hat: RatioEstimate
    e_x_hat: RatioEstimate
    p00_ctrl_hat: RatioEstimate
    p10_ctrl_hat: RatioEstimate
    joint_hat: np.ndarray
    kept: int


@dataclass(frozen=True)
class SiftResult:
    sifted_a: np.ndarray
    sifted_b: np.ndarray
    n_target: int
    abort: bool


@dataclass(frozen=True)
class TestRoundResult:
    error_rate: float
    abort: bool
    info_a: np.ndarray
    info_b: np.ndarray
    positions: list[int]


@dataclass(frozen=True)
class Transcript:
    """Full record of one seeded run."""

    config: ProtocolConfig
    records: list[IterationRecord]
    sifted_a: str
    sifted_b: str
    n_target: int
    test_positions: list[int]
    test_error_rate: float | None
    info_a: str
    info_b: str
    aborted: bool
    abort_reason: str | None
    stats: ObservedStats
    keep_rate: float
    efficiency: float

    @property
    def sifted_length(self) -> int:
        return len(self.sifted_a)


def _bits_to_str(bits: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in bits)


def transit_states(config: ProtocolConfig) -> tuple[DensityOperator, DensityOperator]:
    """Post-reverse-channel transit states for the CTRL and SIFT branches."""
    fwd = ForwardAttack(config.b)
    ctrl = fwd.state().projector()
    sift_state = np.zeros((2, 2), dtype=np.complex128)
    sift_state[0, 0] = 1.0
    sift_rho = DensityOperator(sift_state)
    if isinstance(config.reverse, DepolarizingChannel):
        return config.reverse.apply(ctrl), config.reverse.apply(sift_rho)
    if isinstance(config.reverse, ReverseAttack):
        return (
            induced_transit_channel(config.reverse, ctrl),
            induced_transit_channel(config.reverse, sift_rho),
        )
    return ctrl, sift_rho


def sift(records: list[IterationRecord], sizing_mode: str, delta: float) -> SiftResult:
    """Drop inconclusive iterations and fix the test-bit count n.

    paper_literal mode sizes n from the configured run length and aborts on
    a shortfall; realized_l mode sizes n from the bits actually kept and
    aborts only when fewer than 2 bits survive.
    """
    k_a = np.array([r.k_a for r in records], dtype=np.int8)
    k_b = np.array([r.k_b for r in records], dtype=np.int8)
    kept = k_a >= 0
    sifted_a = k_a[kept].astype(np.int8)
    sifted_b = k_b[kept]
    l = int(sifted_a.shape[0])
    if sizing_mode == SIZING_PAPER:
        n = int(len(records) // (4.0 * (1.0 + delta)))
        abort = l < 2 * n
    elif sizing_mode == SIZING_REALIZED:
        n = l // 2
        abort = l < 2
    else:
        raise DomainError(f"unknown sizing mode {sizing_mode!r}")
    return SiftResult(sifted_a=sifted_a, sifted_b=sifted_b, n_target=n, abort=abort)


def run_test_round(
    sifted_a: np.ndarray,
    sifted_b: np.ndarray,
    n: int,
    test_threshold: float,
    rng: np.random.Generator,
) -> TestRoundResult:
    """Sample n test positions, compare, and cut the INFO strings.

    The INFO strings are the first n bits left after removing the test
    positions.  Aborts when the observed mismatch rate exceeds the
    threshold.
    """
    l = int(len(sifted_a))
    if len(sifted_b) != l:
        raise DomainError("sifted keys differ in length")
    if 2 * n > l:
        raise DomainError(f"test size n = {n} exceeds half of {l} sifted bits")
    positions = np.sort(rng.choice(l, size=n, replace=False)) if n > 0 else np.array([], dtype=int)
    if n > 0:
        error_rate = float(np.mean(sifted_a[positions] != sifted_b[positions]))
    else:
        error_rate = 0.0
    abort = error_rate > test_threshold
    mask = np.ones(l, dtype=bool)
    mask[positions] = False
    info_a = sifted_a[mask][:n]
    info_b = sifted_b[mask][:n]
    if abort:
        info_a = info_a[:0]
        info_b = info_b[:0]
    return TestRoundResult(
        error_rate=error_rate,
        abort=abort,
        info_a=info_a,
        info_b=info_b,
        positions=[int(i) for i in positions],
    )


def estimate_stats(records: list[IterationRecord]) -> ObservedStats:
    """Empirical error rates and conditional statistics from all iterations.

    Alice's basis/outcome tallies for the discarded iterations enter the
    conditional estimates; the joint distribution uses kept iterations only.
    Empty denominators leave the corresponding estimate flagged missing.
    """
    sz_num = sz_den = cx_num = cx_den = cz_num = cz_den = 0
    joint_counts = np.zeros((2, 2), dtype=np.int64)
    kept = 0
    for r in records:
        is_ctrl = r.bob_choice == CTRL
        if r.alice_basis == "Z":
            if is_ctrl:
                cz_den += 1
                cz_num += r.alice_outcome
            else:
                sz_den += 1
                sz_num += r.alice_outcome
        elif is_ctrl:
            cx_den += 1
            cx_num += r.alice_outcome
        if r.kept:
            kept += 1
            joint_counts[r.k_a, r.k_b] += 1
    joint_hat = joint_counts / kept if kept > 0 else np.zeros((2, 2))
    e_x_hat = RatioEstimate(cx_num, cx_den)
    return ObservedStats(
        e_z_hat=RatioEstimate(sz_num, sz_den),
        e_x_hat=e_x_hat,
        p00_ctrl_hat=RatioEstimate(cz_num, cz_den),
        p10_ctrl_hat=e_x_hat,
        joint_hat=joint_hat,
        kept=kept,
    )


def run(config: ProtocolConfig) -> Transcript:
    """Execute the protocol once.  Deterministic for a fixed config.

    Aborts are recorded in the transcript, never raised: a sizing shortfall
    (per sizing_mode) or a test error rate above the threshold.
    """
    rng = np.random.default_rng(config.seed)
    n_iter = int(config.n_iterations)
    ctrl_rho, sift_rho = transit_states(config)
    one_proj = ONE.projector()
    minus_proj = MINUS.projector()
    # Conclusive-outcome probabilities indexed by [is_sift][is_x_basis].
    p_conclusive = np.array(
        [
            [born_probability(ctrl_rho, one_proj), born_probability(ctrl_rho, minus_proj)],
            [born_probability(sift_rho, one_proj), born_probability(sift_rho, minus_proj)],
        ]
    )

    is_sift = rng.random(n_iter) < 0.5
    is_x = rng.random(n_iter) < 0.5
    outcome = rng.random(n_iter) < p_conclusive[is_sift.astype(int), is_x.astype(int)]

    records = [
        IterationRecord(
            bob_choice=SIFT if s else CTRL,
            alice_basis="X" if x else "Z",
            alice_outcome=int(o),
            kept=bool(o),
            k_a=(1 if x else 0) if o else -1,
            k_b=1 if s else 0,
        )
        for s, x, o in zip(is_sift, is_x, outcome)
    ]

    sifted = sift(records, config.sizing_mode, config.delta)
    stats = estimate_stats(records)
    keep_rate = sifted.sifted_a.shape[0] / n_iter

    aborted = sifted.abort
    abort_reason = ABORT_SIZING if aborted else None
    test_error_rate = None
    test_positions: list[int] = []
    info_a = info_b = ""
    if not aborted:
        tested = run_test_round(
            sifted.sifted_a, sifted.sifted_b, sifted.n_target, config.test_threshold, rng
        )
        test_error_rate = tested.error_rate
        test_positions = tested.positions
        if tested.abort:
            aborted = True
            abort_reason = ABORT_TEST
        else:
            info_a = _bits_to_str(tested.info_a)
            info_b = _bits_to_str(tested.info_b)

    return Transcript(
        config=config,
        records=records,
        sifted_a=_bits_to_str(sifted.sifted_a),
        sifted_b=_bits_to_str(sifted.sifted_b),
        n_target=sifted.n_target,
        test_positions=test_positions,
        test_error_rate=test_error_rate,
        info_a=info_a,
        info_b=info_b,
        aborted=aborted,
        abort_reason=abort_reason,
        stats=stats,
        keep_rate=keep_rate,
        efficiency=len(info_a) / (2.0 * n_iter),
    )
