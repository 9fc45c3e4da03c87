"""Trace-preserving quantum operations in operator-sum form.

A channel is stored as its list of Kraus operators ``A_i`` (each
``dim_out x dim_in``) obeying ``sum_i A_i† A_i = I``. The unitary-with-ancilla
form is derived on demand by :func:`stinespring_dilation` and converted back
with :func:`channel_from_unitary_rep`. Composite spaces are ordered
system-first, so ``S⊗E`` has index ``s * d_E + e``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numerics import (
    DimensionError,
    ValidationError,
    as_matrix,
    complete_to_unitary,
    haar_isometry,
    is_unitary,
    max_abs,
)
from .states import DensityOperator, purification_matrix

TOL_COMPLETENESS = 1e-8

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class NotTracePreservingError(ValidationError):
    """Raised when Kraus operators violate the completeness relation."""


def completeness_residual(kraus: Sequence[np.ndarray]) -> float:
    d_in = kraus[0].shape[1]
    total = sum(a.conj().T @ a for a in kraus)
    return max_abs(total - np.eye(d_in))


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """CPTP map given by Kraus operators.

    Construct through :func:`make_channel` unless validation has to be
    skipped on purpose (fault-injection tests do this).
    """

    kraus: tuple
    dim_in: int
    dim_out: int

    @property
    def is_square(self) -> bool:
        return self.dim_in == self.dim_out

    def __len__(self) -> int:
        return len(self.kraus)

    def residual(self) -> float:
        return completeness_residual(self.kraus)

    def __call__(self, rho: DensityOperator) -> DensityOperator:
        return apply(self, rho)

    def apply_matrix(self, m: np.ndarray) -> np.ndarray:
        """Kraus sum on a bare matrix, no validation."""
        return sum(a @ m @ a.conj().T for a in self.kraus)


@dataclass(frozen=True, eq=False)
class UnitaryRep:
    """Unitary ``u`` on ``S⊗E`` with initial ancilla state on ``E``."""

    u: np.ndarray
    ancilla_state: DensityOperator
    shape: tuple[int, int]

    def __post_init__(self):
        u = as_matrix(self.u, square=True)
        d_s, d_e = (int(d) for d in self.shape)
        if u.shape[0] != d_s * d_e:
            raise DimensionError(f"unitary dimension {u.shape[0]} != {d_s}*{d_e}")
        if self.ancilla_state.dim != d_e:
            raise DimensionError(f"ancilla state dim {self.ancilla_state.dim} != {d_e}")
        if not is_unitary(u):
            raise ValidationError("operator is not unitary", field="u")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "shape", (d_s, d_e))


def make_channel(kraus, *, tol: float = TOL_COMPLETENESS, validate: bool = True) -> QuantumChannel:
    """Build a channel from Kraus operators.

    Raises:
        DimensionError: if the operators do not share one shape.
        NotTracePreservingError: if ``sum A_i† A_i`` differs from the
            identity by more than ``tol`` in any entry.
    """
    ops = [as_matrix(a) for a in kraus]
    if not ops:
        raise ValidationError("a channel needs at least one Kraus operator", field="kraus")
    shape = ops[0].shape
    if any(a.shape != shape for a in ops):
        raise DimensionError("Kraus operators have differing shapes")
    for a in ops:
        a.setflags(write=False)
    if validate:
        res = completeness_residual(ops)
        if res > tol:
            raise NotTracePreservingError(
                f"Kraus operators are not trace preserving (residual {res:.3e})",
                field="kraus",
            )
    return QuantumChannel(tuple(ops), shape[1], shape[0])


def apply(e: QuantumChannel, rho: DensityOperator) -> DensityOperator:
    """``E(rho) = sum_i A_i rho A_i†``."""
    if rho.dim != e.dim_in:
        raise DimensionError(f"state dim {rho.dim} != channel input dim {e.dim_in}")
    out = e.apply_matrix(rho.matrix)
    return DensityOperator(0.5 * (out + out.conj().T))


def identity_channel(dim: int) -> QuantumChannel:
    return make_channel([np.eye(dim)])


def extend_with_identity(e: QuantumChannel, d_t: int, side: str = "right") -> QuantumChannel:
    """``E ⊗ I_T`` (``side="right"``) or ``I_T ⊗ E`` (``side="left"``)."""
    eye = np.eye(d_t)
    if side == "right":
        ops = [np.kron(a, eye) for a in e.kraus]
    elif side == "left":
        ops = [np.kron(eye, a) for a in e.kraus]
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return QuantumChannel(tuple(ops), e.dim_in * d_t, e.dim_out * d_t)


def tensor_channels(e: QuantumChannel, f: QuantumChannel) -> QuantumChannel:
    """``E ⊗ F`` with Kraus operators ``A_i ⊗ B_j`` (``i`` major)."""
    ops = [np.kron(a, b) for a in e.kraus for b in f.kraus]
    return QuantumChannel(tuple(ops), e.dim_in * f.dim_in, e.dim_out * f.dim_out)


def stinespring_dilation(e: QuantumChannel) -> UnitaryRep:
    """Unitary on ``S⊗E`` with ``E`` started in ``|0><0|``.

    The ancilla has one level per Kraus operator and
    ``(I ⊗ <i|) U (I ⊗ |0>) = A_i``. Columns not fixed by that condition are
    completed by Gram-Schmidt over the canonical basis.
    """
    if not e.is_square:
        raise DimensionError("dilation is only defined for square channels")
    d, k = e.dim_in, len(e.kraus)
    # Isometry V|s> = sum_i A_i|s> ⊗ |i>, rows indexed s_out * k + i.
    v = np.stack(e.kraus, axis=1).reshape(d * k, d)
    positions = [s * k for s in range(d)]
    u = complete_to_unitary(v, positions, d * k)
    sigma = np.zeros((k, k), dtype=complex)
    sigma[0, 0] = 1.0
    return UnitaryRep(u, DensityOperator(sigma), (d, k))


def channel_from_unitary_rep(rep: UnitaryRep, drop_tol: float = 1e-14) -> QuantumChannel:
    """Kraus operators of ``rho -> tr_E(U (rho ⊗ sigma) U†)``.

    A mixed ancilla state is first purified onto ``E⊗R``; the Kraus operators
    are ``A_(e,r) = sum_f U[(s,e),(s',f)] phi[f,r]`` with ``phi`` the
    purification's amplitude matrix. Operators that vanish are dropped.
    """
    d_s, d_e = rep.shape
    phi = purification_matrix(rep.ancilla_state)
    u4 = rep.u.reshape(d_s, d_e, d_s, d_e)
    a = np.einsum("aebf,fr->erab", u4, phi).reshape(-1, d_s, d_s)
    ops = [m for m in a if max_abs(m) > drop_tol] or [a[0]]
    return make_channel(ops)


def _weyl_operators(d: int) -> list[np.ndarray]:
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return [
        np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
        for a in range(d)
        for b in range(d)
    ]


def _check_param(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name}={value} is outside [0, 1]", field=name)
    return value


def depolarizing(p: float, dim: int = 2) -> QuantumChannel:
    """Depolarizing channel ``rho -> (1-p) rho + p I/d``.

    For qubits the Kraus set is ``sqrt(1-3p/4) I, sqrt(p/4) X, sqrt(p/4) Y,
    sqrt(p/4) Z``; other dimensions use the Weyl clock-and-shift basis.
    """
    p = _check_param("p", p)
    if dim == 2:
        paulis = [PAULI_X, PAULI_Y, PAULI_Z]
        ops = [np.sqrt(1 - 3 * p / 4) * PAULI_I] + [np.sqrt(p / 4) * s for s in paulis]
    else:
        w = _weyl_operators(dim)
        d2 = dim * dim
        ops = [np.sqrt(1 - p + p / d2) * w[0]] + [np.sqrt(p / d2) * x for x in w[1:]]
    return make_channel(ops)


def dephasing(p: float, dim: int = 2) -> QuantumChannel:
    """``rho -> (1-p) rho + p diag(rho)``."""
    p = _check_param("p", p)
    ops = [np.sqrt(1 - p) * np.eye(dim)]
    for k in range(dim):
        proj = np.zeros((dim, dim), dtype=complex)
        proj[k, k] = 1.0
        ops.append(np.sqrt(p) * proj)
    return make_channel(ops)


def amplitude_damping(gamma: float, dim: int = 2) -> QuantumChannel:
    gamma = _check_param("gamma", gamma)
    if dim != 2:
        raise DimensionError("amplitude damping is defined for qubits only")
    a0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    a1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return make_channel([a0, a1])


def replace_with(sigma: DensityOperator, dim_in: int | None = None) -> QuantumChannel:
    """Channel discarding its input and preparing ``sigma``.

    Kraus operators ``sqrt(mu_k) |v_k><j|`` over the spectral decomposition
    of ``sigma`` and the input basis ``j``.
    """
    dim_in = sigma.dim if dim_in is None else dim_in
    w, v = sigma.eig()
    ops = []
    for mu, vec in zip(w, v.T):
        if mu <= 0:
            continue
        for j in range(dim_in):
            op = np.zeros((sigma.dim, dim_in), dtype=complex)
            op[:, j] = np.sqrt(mu) * vec
            ops.append(op)
    return make_channel(ops)


def standard_channel(kind: str, dim: int = 2, **params) -> QuantumChannel:
    """Factory for the named channel families.

    ``kind`` is one of ``identity``, ``depolarizing`` (``p``), ``dephasing``
    (``p``), ``amplitude_damping`` (``gamma``) or ``replace_with``
    (``sigma``, default the maximally mixed state).
    """
    if kind == "identity":
        return identity_channel(dim)
    if kind == "depolarizing":
        return depolarizing(params["p"], dim)
    if kind == "dephasing":
        return dephasing(params["p"], dim)
    if kind == "amplitude_damping":
        return amplitude_damping(params["gamma"], dim)
    if kind == "replace_with":
        sigma = params.get("sigma") or DensityOperator.maximally_mixed(dim)
        return replace_with(sigma, dim)
    raise ValidationError(f"unknown channel kind {kind!r}", field="kind")


def random_channel(dim: int, kraus_count: int, seed, dim_out: int | None = None) -> QuantumChannel:
    """Channel from a Haar-random isometry ``dim -> dim_out * kraus_count``.

    Kraus operator ``i`` is row block ``i`` of the isometry.
    """
    if kraus_count < 1:
        raise ValidationError("kraus_count must be at least 1", field="kraus_count")
    dim_out = dim if dim_out is None else dim_out
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    v = haar_isometry(dim_out * kraus_count, dim, rng)
    return make_channel(v.reshape(kraus_count, dim_out, dim))
