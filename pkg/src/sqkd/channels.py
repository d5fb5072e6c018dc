"""Channel and attack models for the two-way protocol.

The forward channel is summarized by a single bias parameter: whatever the
eavesdropper does on the way in, the state Bob receives can be taken to be
``sqrt(1/2 + b)|0> + sqrt(1/2 - b)|1>`` with ``|b| < 1/2``.  The reverse
channel is a unitary probe acting on the transit qubit and a private ancilla
prepared in its first basis state.  The probe is fully described by four
ancilla vectors ``e00, e01, e10, e11``:

    U|0, 0> = |0, e00> + |1, e01>
    U|1, 0> = |0, e10> + |1, e11>

Unitarity forces ``<e00|e10> + <e01|e11> = 0`` and both column norms to 1.
All the statistics the security analysis consumes are inner products of
these vectors (and of a handful of derived combinations).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qmath import (
    DensityOperator,
    DomainError,
    InvariantViolation,
    PureState,
    _as_complex_vector,
)

UNITARITY_TOL = 1e-9
SYMMETRY_TOL = 1e-6

_PAULI_I = np.eye(2, dtype=np.complex128)
_PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


@dataclass(frozen=True)
class ForwardAttack:
    """Forward-channel substitution with bias b, |b| < 1/2 strictly."""

    b: float = 0.0

    def __post_init__(self):
        if not abs(self.b) < 0.5:
            raise InvariantViolation(f"bias b = {self.b} must satisfy |b| < 1/2")

    @property
    def alpha(self) -> float:
        return float(np.sqrt(0.5 + self.b))

    @property
    def beta(self) -> float:
        return float(np.sqrt(0.5 - self.b))

    def state(self) -> PureState:
        """The substituted transit state with amplitudes (alpha, beta)."""
        return PureState(np.array([self.alpha, self.beta]))

    def orthogonal_state(self) -> PureState:
        """The qubit state orthogonal to state(): amplitudes (beta, -alpha)."""
        return PureState(np.array([self.beta, -self.alpha]))


@dataclass(frozen=True)
class DepolarizingChannel:
    """rho -> (1-p) rho + (p/2) I on a single qubit."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InvariantViolation(f"depolarizing parameter p = {self.p} outside [0, 1]")

    def apply(self, rho: DensityOperator) -> DensityOperator:
        if rho.dim != 2:
            raise DomainError("depolarizing channel acts on qubits only")
        mixed = (1.0 - self.p) * rho.matrix + (self.p / 2.0) * np.eye(2)
        return DensityOperator(mixed)


def apply_depolarizing(rho: DensityOperator, channel: DepolarizingChannel) -> DensityOperator:
    return channel.apply(rho)


@dataclass(frozen=True)
class ReverseAttack:
    """A unitary probe on transit qubit + ancilla, stored as its four
    ancilla vectors.  The vectors are unnormalized in general; only the
    unitarity constraints tie them together."""

    e00: np.ndarray
    e01: np.ndarray
    e10: np.ndarray
    e11: np.ndarray

    def __post_init__(self):
        vecs = tuple(_as_complex_vector(v) for v in (self.e00, self.e01, self.e10, self.e11))
        d = vecs[0].shape[0]
        if any(v.shape[0] != d for v in vecs):
            raise InvariantViolation("ancilla vectors must share one dimension")
        e00, e01, e10, e11 = vecs
        cross = np.vdot(e00, e10) + np.vdot(e01, e11)
        col0 = np.vdot(e00, e00).real + np.vdot(e01, e01).real
        col1 = np.vdot(e10, e10).real + np.vdot(e11, e11).real
        if abs(cross) > UNITARITY_TOL:
            raise InvariantViolation(f"columns not orthogonal: residual {abs(cross)}")
        if abs(col0 - 1.0) > UNITARITY_TOL or abs(col1 - 1.0) > UNITARITY_TOL:
            raise InvariantViolation(f"column norms {col0}, {col1} differ from 1")
        for name, v in zip(("e00", "e01", "e10", "e11"), vecs):
            object.__setattr__(self, name, v)

    @property
    def eve_dim(self) -> int:
        return self.e00.shape[0]

    @property
    def is_symmetric(self) -> bool:
        """Whether the probe disturbs |0> and |1> with equal weight."""
        return abs(np.vdot(self.e10, self.e10).real - np.vdot(self.e01, self.e01).real) < SYMMETRY_TOL

    @classmethod
    def identity(cls, eve_dim: int = 1) -> "ReverseAttack":
        """The do-nothing probe: ancilla untouched, transit untouched."""
        unit = np.zeros(eve_dim, dtype=np.complex128)
        unit[0] = 1.0
        zero = np.zeros(eve_dim, dtype=np.complex128)
        return cls(unit, zero, zero, unit)

    @classmethod
    def from_unitary(cls, unitary: np.ndarray, eve_dim: int) -> "ReverseAttack":
        """Extract the ancilla vectors from a unitary on the 2 * eve_dim
        joint space, basis ordered transit-major (|t, k> at index t*d + k)."""
        u = np.asarray(unitary, dtype=np.complex128)
        d = int(eve_dim)
        if u.shape != (2 * d, 2 * d):
            raise DomainError(f"unitary shape {u.shape} incompatible with eve_dim {d}")
        if not np.allclose(u.conj().T @ u, np.eye(2 * d), rtol=0.0, atol=UNITARITY_TOL):
            raise DomainError("matrix is not unitary within tolerance")
        col0 = u[:, 0]
        col1 = u[:, d]
        return cls(col0[:d], col0[d:], col1[:d], col1[d:])

    @classmethod
    def from_kraus(cls, kraus_ops) -> "ReverseAttack":
        """Stinespring-style probe for a qubit channel given by Kraus
        operators: ancilla dimension is the number of operators and
        e_{tj}[k] = <t|A_k|j> reading off each operator's matrix elements."""
        ops = [np.asarray(a, dtype=np.complex128) for a in kraus_ops]
        if not ops or any(a.shape != (2, 2) for a in ops):
            raise DomainError("expected a nonempty list of 2x2 Kraus operators")
        total = sum(a.conj().T @ a for a in ops)
        if not np.allclose(total, np.eye(2), rtol=0.0, atol=UNITARITY_TOL):
            raise DomainError("Kraus operators do not sum to the identity")
        e00 = np.array([a[0, 0] for a in ops])
        e01 = np.array([a[1, 0] for a in ops])
        e10 = np.array([a[0, 1] for a in ops])
        e11 = np.array([a[1, 1] for a in ops])
        return cls(e00, e01, e10, e11)


def depolarizing_dilation(p: float) -> ReverseAttack:
    """Probe whose induced transit channel is exactly the depolarizing map.

    Branch order is fixed: identity, bit flip, phase flip, combined flip,
    with weights sqrt(1 - 3p/4) and sqrt(p/4) each.  Any ordering induces
    the same channel; this one is the documented convention.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"depolarizing parameter p = {p} outside [0, 1]")
    w0 = np.sqrt(max(1.0 - 0.75 * p, 0.0))
    w = np.sqrt(p / 4.0)
    return ReverseAttack.from_kraus(
        [w0 * _PAULI_I, w * _PAULI_X, w * _PAULI_Z, w * _PAULI_Y]
    )


def induced_transit_matrix(attack: ReverseAttack, mat: np.ndarray) -> np.ndarray:
    """Action of the probe on a raw 2x2 transit operator, ancilla traced out.

    The (t, t') element of the output is sum_{i,j} mat[i, j] <e_{j t'}|e_{i t}>.
    """
    mat = np.asarray(mat, dtype=np.complex128)
    if mat.shape != (2, 2):
        raise DomainError("transit operators are 2x2")
    e = ((attack.e00, attack.e01), (attack.e10, attack.e11))
    out = np.zeros((2, 2), dtype=np.complex128)
    for t in range(2):
        for t2 in range(2):
            out[t, t2] = sum(
                mat[i, j] * np.vdot(e[j][t2], e[i][t]) for i in range(2) for j in range(2)
            )
    return out


def induced_transit_channel(attack: ReverseAttack, rho: DensityOperator) -> DensityOperator:
    """The qubit channel the probe induces once the ancilla is discarded."""
    return DensityOperator(induced_transit_matrix(attack, rho.matrix))


@dataclass(frozen=True)
class AttackVectors:
    """Ancilla vectors describing the probe in the Hadamard basis and on the
    substituted state.

    f_plus0/f_plus1 (f_minus0/f_minus1) accompany transit outcomes |+>/|->
    when the probe input is |+> (|->).  g_plus/g_minus accompany |+>/|->
    when the input is the forward-substituted state.  l1 = g_plus - g_minus
    and l2 = e00 - e01 are the vectors attached to Alice's two conclusive
    outcomes; their overlap drives the key-rate bound.
    """

    f_plus0: np.ndarray
    f_plus1: np.ndarray
    f_minus0: np.ndarray
    f_minus1: np.ndarray
    g_plus: np.ndarray
    g_minus: np.ndarray
    l1: np.ndarray
    l2: np.ndarray


def derive_vectors(fwd: ForwardAttack, attack: ReverseAttack) -> AttackVectors:
    """All derived ancilla vectors for a (forward, reverse) attack pair."""
    e00, e01, e10, e11 = attack.e00, attack.e01, attack.e10, attack.e11
    a, b = fwd.alpha, fwd.beta
    f_plus0 = 0.5 * (e00 + e01 + e10 + e11)
    f_plus1 = 0.5 * (e00 - e01 + e10 - e11)
    f_minus0 = 0.5 * (e00 + e01 - e10 - e11)
    f_minus1 = 0.5 * (e00 - e01 - e10 + e11)
    g_plus = (a * (e00 + e01) + b * (e10 + e11)) / np.sqrt(2.0)
    g_minus = (a * (e00 - e01) + b * (e10 - e11)) / np.sqrt(2.0)
    l1 = g_plus - g_minus
    l2 = e00 - e01
    vectors = AttackVectors(f_plus0, f_plus1, f_minus0, f_minus1, g_plus, g_minus, l1, l2)
    # Consistency of the two expressions for l1; an identity, so any drift
    # here signals a construction bug rather than noise.
    alt = np.sqrt(2.0) * (a * e01 + b * e11)
    if not np.allclose(l1, alt, rtol=0.0, atol=1e-10):
        raise InvariantViolation("l1 reconstructions disagree")
    return vectors


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_attack(rng: np.random.Generator, eve_dim: int) -> ReverseAttack:
    """A Haar-random probe on a 2 * eve_dim joint space."""
    return ReverseAttack.from_unitary(random_unitary(rng, 2 * eve_dim), eve_dim)


def random_symmetric_attack(rng: np.random.Generator, eve_dim: int) -> ReverseAttack:
    """A random probe disturbing |0> and |1> with equal weight.

    Samples a Haar-random probe and post-composes it with a partial bit
    flip exp(i theta X) on the transit qubit; the flip angle is bisected
    until the |0>- and |1>-disturbance weights balance.  The imbalance flips
    sign between theta = 0 and theta = pi/2, so a root always exists.
    Samples are rejected if the residual imbalance somehow survives.
    """
    d = int(eve_dim)
    while True:
        base = random_attack(rng, d)

        def imbalance(theta: float) -> float:
            c, s = np.cos(theta), 1j * np.sin(theta)
            e01 = c * base.e01 + s * base.e00
            e10 = c * base.e10 + s * base.e11
            return float(np.vdot(e01, e01).real - np.vdot(e10, e10).real)

        lo, hi = 0.0, np.pi / 2.0
        f_lo = imbalance(lo)
        if f_lo * imbalance(hi) > 0.0:
            continue
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if f_lo * imbalance(mid) <= 0.0:
                hi = mid
            else:
                lo, f_lo = mid, imbalance(mid)
        theta = 0.5 * (lo + hi)
        c, s = np.cos(theta), 1j * np.sin(theta)
        attack = ReverseAttack(
            c * base.e00 + s * base.e01,
            c * base.e01 + s * base.e00,
            c * base.e10 + s * base.e11,
            c * base.e11 + s * base.e10,
        )
        if attack.is_symmetric:
            return attack
