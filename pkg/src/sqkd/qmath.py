"""Complex linear algebra on small Hilbert spaces and entropy primitives.

Everything here operates on plain numpy arrays wrapped in lightweight
validated containers.  Dimensions stay tiny (a two-way qubit protocol with a
small eavesdropper ancilla never needs more than dim 16), so dense
eigendecompositions are always acceptable.

All entropies are in bits (log base 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Tolerances used by the validated containers below.
HERMITIAN_TOL = 1e-9
TRACE_TOL = 1e-9
NORM_TOL = 1e-9
# Eigenvalues in [-EIG_CLAMP_TOL, 0) are floating-point dust and are clamped
# to zero; anything below -EIG_CLAMP_TOL is a genuinely invalid state.
EIG_CLAMP_TOL = 1e-9
DOMAIN_SLACK = 1e-12

LOG2 = np.log(2.0)


class InvariantViolation(ValueError):
    """A validated container received data breaking its invariants."""


class DomainError(ValueError):
    """An argument lies outside the operation's domain."""


class DimensionMismatch(ValueError):
    """Operands with incompatible Hilbert-space dimensions."""


def _as_complex_vector(values) -> np.ndarray:
    vec = np.asarray(values, dtype=np.complex128)
    if vec.ndim != 1:
        raise InvariantViolation(f"expected a vector, got shape {vec.shape}")
    return vec


def _as_complex_matrix(values) -> np.ndarray:
    mat = np.asarray(values, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvariantViolation(f"expected a square matrix, got shape {mat.shape}")
    return mat


@dataclass(frozen=True)
class PureState:
    """A normalized state vector on a dim-dimensional Hilbert space."""

    amplitudes: np.ndarray

    def __post_init__(self):
        vec = _as_complex_vector(self.amplitudes)
        norm_sq = float(np.vdot(vec, vec).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise InvariantViolation(f"state vector norm^2 = {norm_sq}, expected 1")
        object.__setattr__(self, "amplitudes", vec)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def inner(self, other: "PureState") -> complex:
        """<self|other>."""
        if self.dim != other.dim:
            raise DimensionMismatch(f"dims {self.dim} and {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()))


def ket(index: int, dim: int) -> PureState:
    """Computational-basis state |index> in dimension dim."""
    vec = np.zeros(dim, dtype=np.complex128)
    vec[index] = 1.0
    return PureState(vec)


ZERO = ket(0, 2)
ONE = ket(1, 2)
PLUS = PureState(np.array([1.0, 1.0]) / np.sqrt(2.0))
MINUS = PureState(np.array([1.0, -1.0]) / np.sqrt(2.0))


@dataclass(frozen=True)
class DensityOperator:
    """A Hermitian, unit-trace, positive-semidefinite matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = _as_complex_matrix(self.matrix)
        if not np.allclose(mat, mat.conj().T, rtol=0.0, atol=HERMITIAN_TOL):
            raise InvariantViolation("matrix is not Hermitian within tolerance")
        tr = float(np.trace(mat).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvariantViolation(f"trace = {tr}, expected 1")
        smallest = float(np.linalg.eigvalsh(mat)[0])
        if smallest < -EIG_CLAMP_TOL:
            raise InvariantViolation(f"negative eigenvalue {smallest}")
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Real spectrum, ascending, with negative dust clamped to zero."""
        vals = np.linalg.eigvalsh(self.matrix)
        return np.where(vals < 0.0, 0.0, vals)


@dataclass(frozen=True)
class ProbDist:
    """A finite probability distribution."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1:
            raise InvariantViolation(f"expected a weight vector, got shape {w.shape}")
        if np.any(w < -DOMAIN_SLACK) or np.any(w > 1.0 + DOMAIN_SLACK):
            raise InvariantViolation("weights must lie in [0, 1]")
        total = float(w.sum())
        if abs(total - 1.0) > NORM_TOL:
            raise InvariantViolation(f"weights sum to {total}, expected 1")
        object.__setattr__(self, "weights", np.clip(w, 0.0, 1.0))


def binary_entropy(x: float) -> float:
    """h(x) = -x log2 x - (1-x) log2 (1-x), with 0 log 0 = 0."""
    if x < -DOMAIN_SLACK or x > 1.0 + DOMAIN_SLACK:
        raise DomainError(f"binary_entropy argument {x} outside [0, 1]")
    x = min(max(x, 0.0), 1.0)
    total = 0.0
    if x > 0.0:
        total -= x * np.log(x) / LOG2
    if x < 1.0:
        total -= (1.0 - x) * np.log(1.0 - x) / LOG2
    return max(total, 0.0)


def shannon_entropy(dist: ProbDist) -> float:
    """H(p) in bits; zero-probability terms are skipped."""
    w = dist.weights
    nz = w[w > 0.0]
    return max(float(-(nz * np.log(nz) / LOG2).sum()), 0.0)


def von_neumann_entropy(rho: DensityOperator) -> float:
    """Shannon entropy of the spectrum of rho, in bits."""
    vals = rho.eigenvalues()
    nz = vals[vals > 0.0]
    return max(float(-(nz * np.log(nz) / LOG2).sum()), 0.0)


def partial_trace(rho: DensityOperator, dims, keep) -> DensityOperator:
    """Reduced state on the subsystems listed in keep.

    dims gives the dimension of every tensor factor in order; keep is a set
    of factor indices to retain.  The returned operator carries the kept
    factors in their original order.
    """
    dims = [int(d) for d in dims]
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if int(np.prod(dims)) != rho.dim:
        raise DimensionMismatch(f"prod({dims}) != {rho.dim}")
    if not keep or any(k < 0 or k >= n for k in keep):
        raise DimensionMismatch(f"keep={keep} invalid for {n} subsystems")
    tensor = rho.matrix.reshape(dims + dims)
    row = [chr(ord("a") + i) for i in range(n)]
    col = [row[i] if i not in keep else chr(ord("a") + n + i) for i in range(n)]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, tensor)
    d_keep = int(np.prod([dims[i] for i in keep]))
    return DensityOperator(reduced.reshape(d_keep, d_keep))


def _projector_matrix(projector) -> np.ndarray:
    if isinstance(projector, DensityOperator):
        return projector.matrix
    if isinstance(projector, PureState):
        return projector.projector().matrix
    return _as_complex_matrix(projector)


def born_probability(rho: DensityOperator, projector) -> float:
    """tr(projector . rho) for a Hermitian idempotent projector."""
    proj = _projector_matrix(projector)
    if proj.shape[0] != rho.dim:
        raise DimensionMismatch(f"projector dim {proj.shape[0]} != state dim {rho.dim}")
    if not np.allclose(proj, proj.conj().T, rtol=0.0, atol=HERMITIAN_TOL):
        raise DomainError("projector is not Hermitian")
    if not np.allclose(proj @ proj, proj, rtol=0.0, atol=HERMITIAN_TOL):
        raise DomainError("projector is not idempotent")
    value = float(np.trace(proj @ rho.matrix).real)
    if value < -DOMAIN_SLACK or value > 1.0 + DOMAIN_SLACK:
        raise DomainError(f"Born probability {value} outside [0, 1]")
    return min(max(value, 0.0), 1.0)
