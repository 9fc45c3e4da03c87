"""Density operators, pure states, purifications and extensions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import (
    TOL_HERM,
    TOL_PSD,
    DimensionError,
    ValidationError,
    as_matrix,
    clamp_spectrum,
    herm_eig,
    max_abs,
    numerical_rank,
    partial_trace,
)

TOL_TRACE = 1e-9
TOL_NORM = 1e-9
TOL_EXTENSION = 1e-8


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rephase ``v`` so that its first nonzero component is real positive."""
    v = np.asarray(v, dtype=complex)
    nz = np.flatnonzero(np.abs(v) > 1e-14)
    if nz.size == 0:
        return v.copy()
    c = v[nz[0]]
    out = v * (abs(c) / c)
    out[nz[0]] = abs(c)
    return out


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, square=True)
        if max_abs(m - m.conj().T) > TOL_HERM:
            raise ValidationError("density matrix is not Hermitian", field="hermiticity")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TOL_TRACE:
            raise ValidationError(f"density matrix trace is {tr:.12g}, expected 1", field="trace")
        w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        if w[0] < -TOL_PSD:
            raise ValidationError(
                f"density matrix has negative eigenvalue {w[0]:.3e}", field="eigenvalues"
            )
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim) / dim)

    @classmethod
    def basis(cls, dim: int, k: int) -> "DensityOperator":
        return density_from_pure(PureState.basis(dim, k))

    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        w, v = herm_eig(self.matrix)
        return clamp_spectrum(w), v

    @property
    def rank(self) -> int:
        return numerical_rank(self.eig()[0])


@dataclass(frozen=True)
class PureState:
    """Unit vector in a ``dim``-dimensional Hilbert space."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex)
        if v.ndim != 1 or v.size < 1:
            raise DimensionError("pure state amplitudes must be a nonempty vector")
        if not np.all(np.isfinite(v)):
            raise ValidationError("pure state has non-finite amplitudes", field="amplitudes")
        n = np.linalg.norm(v)
        if abs(n - 1.0) > TOL_NORM:
            raise ValidationError(f"pure state norm is {n:.12g}, expected 1", field="norm")
        object.__setattr__(self, "amplitudes", _frozen(v))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def basis(cls, dim: int, k: int) -> "PureState":
        if not 0 <= k < dim:
            raise DimensionError(f"basis index {k} out of range for dim {dim}")
        v = np.zeros(dim, dtype=complex)
        v[k] = 1.0
        return cls(v)

    @classmethod
    def normalized(cls, v) -> "PureState":
        v = np.asarray(v, dtype=complex)
        return cls(v / np.linalg.norm(v))


@dataclass(frozen=True)
class Extension:
    """State on S⊗T together with the factor dimensions ``(d_S, d_T)``."""

    joint: DensityOperator
    shape: tuple[int, int]

    def __post_init__(self):
        shape = tuple(int(d) for d in self.shape)
        if len(shape) != 2:
            raise DimensionError("an extension has exactly two factors (S, T)")
        if shape[0] * shape[1] != self.joint.dim:
            raise DimensionError(f"shape {shape} does not match joint dimension {self.joint.dim}")
        object.__setattr__(self, "shape", shape)

    def reduced(self) -> np.ndarray:
        return partial_trace(self.joint.matrix, self.shape, keep=0)


@dataclass(frozen=True)
class ExtensionCheck:
    ok: bool
    residual: float


def density_from_pure(psi: PureState) -> DensityOperator:
    v = psi.amplitudes
    return DensityOperator(np.outer(v, v.conj()))


def epr_state() -> PureState:
    """Singlet (|01> - |10>)/sqrt(2) on two qubits."""
    return PureState(np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2))


def probability_correct(psi: PureState, rho: DensityOperator) -> float:
    """Probability ``<psi|rho|psi>`` that ``psi`` was stored correctly."""
    if psi.dim != rho.dim:
        raise DimensionError(f"state dim {psi.dim} != density dim {rho.dim}")
    v = psi.amplitudes
    return float(np.clip((v.conj() @ rho.matrix @ v).real, 0.0, 1.0))


def probability_error(psi: PureState, rho: DensityOperator) -> float:
    return 1.0 - probability_correct(psi, rho)


def purification_matrix(rho: DensityOperator) -> np.ndarray:
    """Amplitude matrix ``Psi[s, k]`` of the canonical purification.

    ``|psi> = sum_k sqrt(lambda_k) |e_k> ⊗ |k>`` over the eigenpairs with
    ``lambda_k > TOL_PSD``; the purifier dimension equals the rank.
    """
    w, v = rho.eig()
    r = max(numerical_rank(w), 1)
    v = np.column_stack([fix_phase(v[:, k]) for k in range(r)])
    return v * np.sqrt(w[:r])


def canonical_purification(rho: DensityOperator) -> tuple[PureState, tuple[int, int]]:
    """Canonical purification of ``rho`` and its shape ``(d_S, rank)``.

    Each eigenvector is rephased so its first nonzero entry is real
    positive, which makes the construction deterministic.
    """
    psi = purification_matrix(rho)
    vec = fix_phase(psi.reshape(-1))
    vec = vec / np.linalg.norm(vec)
    return PureState(vec), (psi.shape[0], psi.shape[1])


def is_extension(candidate: Extension, base: DensityOperator, tol: float = TOL_EXTENSION) -> ExtensionCheck:
    """Check that tracing ``candidate`` over T gives ``base``."""
    if candidate.shape[0] != base.dim:
        raise DimensionError(
            f"extension S-factor {candidate.shape[0]} != base dim {base.dim}"
        )
    residual = max_abs(candidate.reduced() - base.matrix)
    return ExtensionCheck(residual <= tol, residual)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_pure(dim: int, seed) -> PureState:
    """Haar-random pure state; normalized complex Gaussian vector.

    ``seed`` may be an int or an explicit ``numpy.random.Generator``.
    """
    if dim < 1:
        raise DimensionError("dim must be positive")
    rng = _rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v = fix_phase(v / np.linalg.norm(v))
    return PureState(v)


def random_density(dim: int, rank: int, seed) -> DensityOperator:
    """Random density matrix ``G G† / tr(G G†)`` with ``G`` complex Gaussian of shape ``(dim, rank)``."""
    if dim < 1:
        raise DimensionError("dim must be positive")
    if not 1 <= rank <= dim:
        raise ValidationError(f"rank {rank} out of range 1..{dim}", field="rank")
    rng = _rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(m / np.trace(m).real)
