"""Key-rate machinery: joint statistics of an attack, the entropy-chain
lower bound, the observable-only overlap bound, an exact conditional-entropy
evaluation, depolarizing closed forms, and threshold search.

The chain runs: an attack pair determines four unnormalized cell weights
q(i, j) for the conclusive outcomes; normalizing gives the sifted joint
distribution P(i, j).  Eve's conditional state attached to matching key bits
is rank two, its top eigenvalue is controlled by the overlap of the vectors
l1 and l2, and a lower bound on that overlap built from observable error
rates yields

    r >= h(P(0,0)+P(0,1)) - h(k1) - k2 - k1 * h(lambda),

with k1 = P(0,0)+P(1,1) and k2 = 1 - k1.  The depolarizing-channel closed
forms of the same quantities reproduce the reference threshold curves.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channels import AttackVectors, ForwardAttack, ReverseAttack, derive_vectors
from .qmath import (
    DensityOperator,
    DomainError,
    InvariantViolation,
    ProbDist,
    binary_entropy,
    partial_trace,
    shannon_entropy,
    von_neumann_entropy,
)

DEGENERATE_TOL = 1e-12
LAMBDA_SLACK = 1e-12

# Coarse scan step for the threshold search; bisection refines afterwards.
THRESHOLD_SCAN_STEP = 0.005


class DegenerateChannelError(ValueError):
    """The channel never yields a conclusive outcome (total weight ~ 0)."""


class NoThresholdError(ValueError):
    """The key-rate bound has no sign change on the closed-form domain."""


def _norm_sq(v: np.ndarray) -> float:
    return float(np.vdot(v, v).real)


@dataclass(frozen=True)
class JointWeights:
    """Unnormalized probabilities of the four conclusive (alice, bob) cells.

    Twice the total is the per-iteration probability of keeping a bit.
    """

    q00: float
    q01: float
    q10: float
    q11: float

    def __post_init__(self):
        for name in ("q00", "q01", "q10", "q11"):
            value = float(getattr(self, name))
            if value < -DEGENERATE_TOL:
                raise InvariantViolation(f"{name} = {value} is negative")
            object.__setattr__(self, name, max(value, 0.0))

    @property
    def total(self) -> float:
        return self.q00 + self.q01 + self.q10 + self.q11


@dataclass(frozen=True)
class JointDistribution:
    """P(i, j) over Alice bit i, Bob bit j, as a 2x2 matrix."""

    p: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.p, dtype=np.float64)
        if mat.shape != (2, 2):
            raise InvariantViolation(f"expected 2x2 matrix, got {mat.shape}")
        if np.any(mat < -DEGENERATE_TOL):
            raise InvariantViolation("negative probability entry")
        if abs(float(mat.sum()) - 1.0) > 1e-10:
            raise InvariantViolation(f"entries sum to {mat.sum()}, expected 1")
        object.__setattr__(self, "p", np.clip(mat, 0.0, 1.0))

    @property
    def k1(self) -> float:
        """Probability the raw key bits agree."""
        return float(self.p[0, 0] + self.p[1, 1])

    @property
    def k2(self) -> float:
        """Probability the raw key bits disagree."""
        return float(self.p[0, 1] + self.p[1, 0])

    @property
    def alice_marginal_0(self) -> float:
        return float(self.p[0, 0] + self.p[0, 1])


@dataclass(frozen=True)
class Observables:
    """Error rates and conditional statistics the legitimate users can see.

    e_z: probability Alice reads 1 in the Z basis on a substituted round.
    e_x: probability Alice reads minus in the X basis on a reflected round.
    p0_given_0 / p1_given_0: Z-outcome-1 and X-outcome-minus probabilities
    conditioned on reflection; the latter equals e_x by definition.
    q11 is the matching-ones cell weight, announced during reconciliation.
    """

    e_z: float
    e_x: float
    p0_given_0: float
    p1_given_0: float
    q11: float

    def __post_init__(self):
        for name in ("e_z", "e_x", "p0_given_0", "p1_given_0", "q11"):
            value = float(getattr(self, name))
            if not -DEGENERATE_TOL <= value <= 1.0 + DEGENERATE_TOL:
                raise InvariantViolation(f"{name} = {value} outside [0, 1]")
            object.__setattr__(self, name, min(max(value, 0.0), 1.0))


@dataclass(frozen=True)
class KeyRateReport:
    """All intermediates of the lower-bound chain plus the bound itself."""

    bound: float
    lam: float
    k1: float
    k2: float
    h_b_given_a: float
    r_lower: float

    def __post_init__(self):
        if abs(self.k1 + self.k2 - 1.0) > 1e-10:
            raise InvariantViolation(f"k1 + k2 = {self.k1 + self.k2}, expected 1")
        if not 0.5 - LAMBDA_SLACK <= self.lam <= 1.0 + LAMBDA_SLACK:
            raise InvariantViolation(f"lambda = {self.lam} outside [1/2, 1]")


def joint_weights(fwd: ForwardAttack, attack: ReverseAttack) -> JointWeights:
    """Conclusive cell weights of an attack pair."""
    v = derive_vectors(fwd, attack)
    q00 = 0.25 * (1.0 - 2.0 * float(np.vdot(v.g_plus, v.g_minus).real))
    q01 = 0.5 * _norm_sq(attack.e01)
    q10 = 0.5 * _norm_sq(v.g_minus)
    q11 = 0.25 * (1.0 - 2.0 * float(np.vdot(attack.e00, attack.e01).real))
    return JointWeights(q00, q01, q10, q11)


def joint_distribution(weights: JointWeights) -> JointDistribution:
    """Normalize cell weights into the sifted joint distribution."""
    total = weights.total
    if total <= DEGENERATE_TOL:
        raise DegenerateChannelError(f"total conclusive weight {total} is degenerate")
    return JointDistribution(
        np.array(
            [
                [weights.q00 / total, weights.q01 / total],
                [weights.q10 / total, weights.q11 / total],
            ]
        )
    )


def channel_observables(fwd: ForwardAttack, attack: ReverseAttack) -> Observables:
    """The observable statistics an attack pair produces."""
    v = derive_vectors(fwd, attack)
    e_z = _norm_sq(attack.e01)
    e_x = _norm_sq(v.g_minus)
    p0_given_0 = _norm_sq(fwd.alpha * attack.e01 + fwd.beta * attack.e11)
    q11 = joint_weights(fwd, attack).q11
    return Observables(e_z=e_z, e_x=e_x, p0_given_0=p0_given_0, p1_given_0=e_x, q11=q11)


def overlap_lower_bound(fwd: ForwardAttack, obs: Observables) -> float:
    """Lower bound on |<l1|l2>| from observable statistics, clamped at 0.

    Valid whenever the probe disturbs |0> and |1> symmetrically; the
    Cauchy-Schwarz steps replacing the unobservable cross terms rely on it.
    """
    a, b = fwd.alpha, fwd.beta
    e_z = min(max(obs.e_z, 0.0), 1.0)
    root2 = np.sqrt(2.0)
    value = (
        root2 * a / 2.0
        - 2.0 * root2 * a * obs.q11
        - root2 * a * e_z
        - (root2 / (2.0 * a)) * (obs.p0_given_0 - (a * a - b * b) * e_z - b * b)
        + (root2 / a)
        * (
            0.5
            - obs.p1_given_0
            - a * a * (0.5 - 2.0 * obs.q11)
            - a * b * e_z
            - b * b * np.sqrt(e_z * (1.0 - e_z))
        )
    )
    return max(float(value), 0.0)


def eve_eigenvalues(q00: float, q11: float, overlap: float) -> tuple[float, float]:
    """Eigenvalue pair of Eve's matching-bits conditional state.

    The state is rank two; with cell weights q00, q11 and overlap
    |<l1|l2>| its spectrum is 1/2 +- sqrt(4 (q00-q11)^2 + overlap^2)
    / (4 (q00+q11)).
    """
    total = q00 + q11
    if total <= DEGENERATE_TOL:
        raise DegenerateChannelError("q00 + q11 is degenerate")
    spread = np.sqrt(4.0 * (q00 - q11) ** 2 + overlap * overlap) / (4.0 * total)
    return 0.5 + float(spread), 0.5 - float(spread)


def lambda_bound(q00: float, q11: float, overlap_bound: float) -> float:
    """Top-eigenvalue bound fed to the final entropy estimate, in [1/2, 1]."""
    if overlap_bound < 0.0:
        raise DomainError(f"overlap bound {overlap_bound} is negative")
    lam_plus, _ = eve_eigenvalues(q00, q11, overlap_bound)
    return min(max(lam_plus, 0.5), 1.0)


def h_b_given_a(joint: JointDistribution) -> float:
    """Conditional Shannon entropy H(B|A) of the sifted joint distribution."""
    joint_entropy = shannon_entropy(ProbDist(joint.p.reshape(4)))
    return joint_entropy - binary_entropy(joint.alice_marginal_0)


def key_rate_lower(
    joint: JointDistribution, lam: float, overlap_bound: float = float("nan")
) -> KeyRateReport:
    """Asymptotic key-rate lower bound for a given joint distribution and
    eigenvalue bound.  overlap_bound is only echoed into the report."""
    if not 0.5 - LAMBDA_SLACK <= lam <= 1.0 + LAMBDA_SLACK:
        raise DomainError(f"lambda = {lam} outside [1/2, 1]")
    lam = min(max(lam, 0.5), 1.0)
    k1, k2 = joint.k1, joint.k2
    r_lower = (
        binary_entropy(joint.alice_marginal_0)
        - binary_entropy(k1)
        - k2
        - k1 * binary_entropy(lam)
    )
    return KeyRateReport(
        bound=float(overlap_bound),
        lam=lam,
        k1=k1,
        k2=k2,
        h_b_given_a=float(h_b_given_a(joint)),
        r_lower=float(r_lower),
    )


def overlap_exact(vectors: AttackVectors) -> float:
    """|<l1|l2>| computed directly from the derived vectors."""
    return float(abs(np.vdot(vectors.l1, vectors.l2)))


def eve_conditional_matrix(vectors: AttackVectors) -> np.ndarray:
    """Eve's matching-bits conditional state as a 2x2 matrix in the
    orthonormal basis spanned by l1 and the residual of l2."""
    l1, l2 = vectors.l1, vectors.l2
    x_sq = _norm_sq(l1)
    if x_sq <= DEGENERATE_TOL:
        raise DegenerateChannelError("l1 is null; two-dimensional reduction undefined")
    xi = l1 / np.sqrt(x_sq)
    y = complex(np.vdot(xi, l2))
    residual = l2 - y * xi
    z = float(np.linalg.norm(residual))
    total = x_sq + abs(y) ** 2 + z * z
    return (
        np.array(
            [[x_sq + abs(y) ** 2, y * z], [np.conj(y) * z, z * z]],
            dtype=np.complex128,
        )
        / total
    )


def eve_conditional_density(vectors: AttackVectors) -> DensityOperator:
    """The same conditional state on the full ancilla space."""
    l1, l2 = vectors.l1, vectors.l2
    total = _norm_sq(l1) + _norm_sq(l2)
    if total <= DEGENERATE_TOL:
        raise DegenerateChannelError("conditional state has no weight")
    mat = (np.outer(l1, l1.conj()) + np.outer(l2, l2.conj())) / total
    return DensityOperator(mat)


@dataclass(frozen=True)
class ExactAttackState:
    """Joint classical-quantum states of one conclusive iteration.

    rho_abe lives on A (2) x B (2) x E; rho_bme on B (2) x M (2) x E, with
    M recording the xor of the two raw key bits.  The reduced states are
    derived from them by partial traces.
    """

    weights: JointWeights
    joint: JointDistribution
    rho_abe: DensityOperator
    rho_bme: DensityOperator
    rho_be: DensityOperator
    rho_e: DensityOperator
    rho_me: DensityOperator

    def entropy_b_given_e(self) -> float:
        return von_neumann_entropy(self.rho_be) - von_neumann_entropy(self.rho_e)

    def entropy_b_given_me(self) -> float:
        return von_neumann_entropy(self.rho_bme) - von_neumann_entropy(self.rho_me)


def exact_attack_state(fwd: ForwardAttack, attack: ReverseAttack) -> ExactAttackState:
    """Build the exact post-iteration states of an attack pair."""
    v = derive_vectors(fwd, attack)
    weights = joint_weights(fwd, attack)
    total = weights.total
    if total <= DEGENERATE_TOL:
        raise DegenerateChannelError(f"total conclusive weight {total} is degenerate")
    d = attack.eve_dim

    def pure_block(vec: np.ndarray, scale: float) -> np.ndarray:
        return scale * np.outer(vec, vec.conj())

    # Eve blocks keyed by (alice bit, bob bit), unnormalized.
    blocks = {
        (0, 0): pure_block(v.l1, 0.25),
        (0, 1): pure_block(attack.e01, 0.5),
        (1, 0): pure_block(v.g_minus, 0.5),
        (1, 1): pure_block(v.l2, 0.25),
    }

    abe = np.zeros((4 * d, 4 * d), dtype=np.complex128)
    bme = np.zeros((4 * d, 4 * d), dtype=np.complex128)
    for (i, j), block in blocks.items():
        lo = (2 * i + j) * d
        abe[lo : lo + d, lo : lo + d] = block / total
        m = i ^ j
        lo = (2 * j + m) * d
        bme[lo : lo + d, lo : lo + d] += block / total

    rho_abe = DensityOperator(abe)
    rho_bme = DensityOperator(bme)
    return ExactAttackState(
        weights=weights,
        joint=joint_distribution(weights),
        rho_abe=rho_abe,
        rho_bme=rho_bme,
        rho_be=partial_trace(rho_abe, [2, 2, d], keep={1, 2}),
        rho_e=partial_trace(rho_abe, [2, 2, d], keep={2}),
        rho_me=partial_trace(rho_bme, [2, 2, d], keep={1, 2}),
    )


def exact_key_rate(fwd: ForwardAttack, attack: ReverseAttack) -> float:
    """S(B|E) - H(B|A) evaluated exactly for one attack pair."""
    state = exact_attack_state(fwd, attack)
    return state.entropy_b_given_e() - h_b_given_a(state.joint)


def attack_key_rate_report(fwd: ForwardAttack, attack: ReverseAttack) -> KeyRateReport:
    """The full lower-bound chain evaluated on an attack pair."""
    weights = joint_weights(fwd, attack)
    joint = joint_distribution(weights)
    bound = overlap_lower_bound(fwd, channel_observables(fwd, attack))
    lam = lambda_bound(weights.q00, weights.q11, bound)
    return key_rate_lower(joint, lam, overlap_bound=bound)


# ---------------------------------------------------------------------------
# Depolarizing reverse channel: closed forms.
# ---------------------------------------------------------------------------


def _check_dep_domain(b: float, p: float, p_max: float) -> None:
    if not abs(b) < 0.5:
        raise DomainError(f"bias b = {b} must satisfy |b| < 1/2")
    if not 0.0 <= p <= p_max:
        raise DomainError(f"depolarizing parameter p = {p} outside [0, {p_max}]")


def depolarizing_statistics(b: float, p: float) -> tuple[JointWeights, JointDistribution, Observables]:
    """Closed-form cell weights, joint distribution and observables when the
    reverse channel depolarizes with parameter p and the forward bias is b."""
    _check_dep_domain(b, p, 1.0)
    root = np.sqrt(1.0 - 4.0 * b * b)
    weights = JointWeights(
        q00=0.25 - b / 2.0 + p * b / 2.0,
        q01=p / 4.0,
        q10=0.25 - (1.0 - p) * root / 4.0,
        q11=0.25,
    )
    obs = Observables(
        e_z=p / 2.0,
        e_x=0.5 - (1.0 - p) * root / 2.0,
        p0_given_0=0.5 - b + p * b,
        p1_given_0=0.5 - (1.0 - p) * root / 2.0,
        q11=0.25,
    )
    return weights, joint_distribution(weights), obs


def depolarizing_overlap_bound(b: float, p: float) -> float:
    """Closed-form overlap bound for the depolarizing channel, clamped at 0.

    Restricted to p <= 1/2 where its last radical stays real.  Note this
    closed form is not identical to feeding the closed-form observables
    through overlap_lower_bound: the two differ by exactly
    (p/2) * (sqrt(1+2b) - sqrt(1-2p)); see depolarizing_bound_gap.
    """
    _check_dep_domain(b, p, 0.5)
    value = (2.0 / np.sqrt(1.0 + 2.0 * b)) * (
        np.sqrt(1.0 - 4.0 * b * b) * (0.5 - 0.75 * p)
        - 0.5 * (0.5 - b) * np.sqrt(2.0 * p - p * p)
    ) - (p / 2.0) * np.sqrt(1.0 - 2.0 * p)
    return max(float(value), 0.0)


def depolarizing_bound_gap(b: float, p: float) -> float:
    """Unclamped difference between the closed-form overlap bound and the
    observable-route bound: (p/2) * (sqrt(1+2b) - sqrt(1-2p)).

    A nonzero gap is expected; it is surfaced rather than hidden so the two
    routes can be reconciled by inspection.
    """
    _check_dep_domain(b, p, 0.5)
    return float((p / 2.0) * (np.sqrt(1.0 + 2.0 * b) - np.sqrt(1.0 - 2.0 * p)))


def depolarizing_report(b: float, p: float) -> KeyRateReport:
    """Key-rate report for the depolarizing channel via the closed forms."""
    weights, joint, _ = depolarizing_statistics(b, p)
    bound = depolarizing_overlap_bound(b, p)
    lam = lambda_bound(weights.q00, weights.q11, bound)
    return key_rate_lower(joint, lam, overlap_bound=bound)


def depolarizing_key_rate(b: float, p: float) -> float:
    """The key-rate lower bound as a closed-form function of (b, p)."""
    _check_dep_domain(b, p, 0.5)
    root = np.sqrt(1.0 - 4.0 * b * b)
    k_prime = 3.0 + p + (p - 1.0) * root + 2.0 * b * (p - 1.0)
    bound = depolarizing_overlap_bound(b, p)
    lam = 0.5 + np.sqrt((p * b - b) ** 2 + bound * bound) / (2.0 - 2.0 * b + 2.0 * p * b)
    lam = min(max(float(lam), 0.5), 1.0)
    return float(
        binary_entropy((1.0 - 2.0 * b + 2.0 * p * b + p) / k_prime)
        - binary_entropy((2.0 - 2.0 * b + 2.0 * p * b) / k_prime)
        - (1.0 + p - (1.0 - p) * root) / k_prime
        - ((2.0 - 2.0 * b + 2.0 * p * b) / k_prime) * binary_entropy(lam)
    )


def threshold_p(b: float, tol: float = 1e-5) -> float:
    """Smallest depolarizing parameter where the key-rate bound hits zero.

    Scans [0, 1/2] in steps of 0.005, then bisects the first bracketing
    interval down to tol.  Warns if the scan sees more than one sign change.
    """
    if tol <= 0.0:
        raise DomainError(f"tolerance {tol} must be positive")
    f0 = depolarizing_key_rate(b, 0.0)
    if f0 <= 0.0:
        raise NoThresholdError(f"bound is nonpositive already at p = 0 (f = {f0})")
    steps = int(round(0.5 / THRESHOLD_SCAN_STEP))
    bracket = None
    crossings = 0
    prev_p, prev_f = 0.0, f0
    for k in range(1, steps + 1):
        p = min(k * THRESHOLD_SCAN_STEP, 0.5)
        f = depolarizing_key_rate(b, p)
        if (prev_f > 0.0) != (f > 0.0):
            crossings += 1
            if bracket is None:
                bracket = (prev_p, p)
        prev_p, prev_f = p, f
    if bracket is None:
        raise NoThresholdError(f"no sign change of the bound on [0, 1/2] at b = {b}")
    if crossings > 1:
        warnings.warn(
            f"bound changes sign {crossings} times on [0, 1/2] at b = {b}; "
            "reporting the first crossing",
            stacklevel=2,
        )
    lo, hi = bracket
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if depolarizing_key_rate(b, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sweep(b_values, p_values) -> list[tuple[float, float, float]]:
    """Key-rate bound over a (b, p) grid, row-major in the given order.

    Out-of-domain grid points are kept in the table with a NaN bound.
    """
    rows = []
    for b in b_values:
        for p in p_values:
            try:
                r = depolarizing_key_rate(float(b), float(p))
            except DomainError:
                r = float("nan")
            rows.append((float(b), float(p), r))
    return rows
