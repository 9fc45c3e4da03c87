"""State fidelity and entanglement fidelity.

Fidelities use the squared convention: for pure states ``F = |<a|b>|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import QuantumChannel, apply, extend_with_identity
from .numerics import DimensionError, sqrt_psd
from .states import (
    DensityOperator,
    PureState,
    canonical_purification,
    density_from_pure,
)

TOL_RANGE = 1e-9


@dataclass(frozen=True)
class FidelityValue:
    value: float
    method: str

    def __float__(self) -> float:
        return self.value


def _clamp(x: float) -> float:
    return float(min(max(x, 0.0), 1.0))


def fidelity_matrices(a: np.ndarray, b: np.ndarray) -> float:
    """Unclamped ``(tr |sqrt(a) sqrt(b)|)^2`` for bare PSD matrices."""
    s = np.linalg.svd(sqrt_psd(a) @ sqrt_psd(b), compute_uv=False)
    return float(np.sum(s)) ** 2


def uhlmann_fidelity(rho1: DensityOperator, rho2: DensityOperator) -> FidelityValue:
    """Fidelity ``(tr |sqrt(rho1) sqrt(rho2)|)^2``.

    This is the maximum of ``|<psi1|psi2>|^2`` over purifications of the two
    states, and reduces to ``<psi|rho2|psi>`` when ``rho1 = |psi><psi|``.
    """
    if rho1.dim != rho2.dim:
        raise DimensionError(f"dimension mismatch: {rho1.dim} vs {rho2.dim}")
    return FidelityValue(_clamp(fidelity_matrices(rho1.matrix, rho2.matrix)), "uhlmann")


def _check_dims(rho: DensityOperator, e: QuantumChannel):
    if not e.is_square or e.dim_in != rho.dim:
        raise DimensionError(
            f"channel {e.dim_in}->{e.dim_out} does not act on a {rho.dim}-dim state"
        )


def entanglement_fidelity_from_purification(
    psi: PureState, shape: tuple[int, int], e: QuantumChannel
) -> float:
    """``<psi| (E ⊗ I_P)(|psi><psi|) |psi>`` for a purification on ``S⊗P``."""
    d_s, d_p = shape
    if d_s * d_p != psi.dim or e.dim_in != d_s:
        raise DimensionError(f"purification shape {shape} incompatible with channel")
    joint = density_from_pure(psi)
    out = apply(extend_with_identity(e, d_p), joint).matrix
    v = psi.amplitudes
    return float((v.conj() @ out @ v).real)


def entanglement_fidelity_purification(rho: DensityOperator, e: QuantumChannel) -> FidelityValue:
    """Entanglement fidelity evaluated on the canonical purification of ``rho``."""
    _check_dims(rho, e)
    psi, shape = canonical_purification(rho)
    return FidelityValue(
        _clamp(entanglement_fidelity_from_purification(psi, shape, e)), "purification"
    )


def entanglement_fidelity_kraus(rho: DensityOperator, e: QuantumChannel) -> FidelityValue:
    """Entanglement fidelity as ``sum_i |tr(A_i rho)|^2``."""
    _check_dims(rho, e)
    return FidelityValue(_clamp(kraus_sum(rho.matrix, e)), "kraus_sum")


def kraus_sum(rho: np.ndarray, e: QuantumChannel) -> float:
    return float(sum(abs(np.trace(a @ rho)) ** 2 for a in e.kraus))


@dataclass(frozen=True)
class Inequality:
    name: str
    lhs: float
    rhs: float
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "pass": self.passed}


@dataclass(frozen=True)
class FidelityReport:
    fidelity: float
    fe_purification: float
    fe_kraus: float
    inequalities: list[Inequality] = field(default_factory=list)

    @property
    def fe_delta(self) -> float:
        return abs(self.fe_purification - self.fe_kraus)

    @property
    def passed(self) -> bool:
        return all(q.passed for q in self.inequalities)

    def to_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "fe_purification": self.fe_purification,
            "fe_kraus": self.fe_kraus,
            "fe_delta": self.fe_delta,
            "inequalities": [q.to_dict() for q in self.inequalities],
        }


TOL_AGREE = 1e-10


def fidelity_report(
    rho: DensityOperator, e: QuantumChannel, tol: float = TOL_RANGE, agree_tol: float = TOL_AGREE
) -> FidelityReport:
    """Fidelity of ``rho`` with ``E(rho)``, both entanglement fidelities and
    the inequality ``F_e <= F``."""
    _check_dims(rho, e)
    f = uhlmann_fidelity(rho, apply(e, rho)).value
    fe_p = entanglement_fidelity_purification(rho, e).value
    fe_k = entanglement_fidelity_kraus(rho, e).value
    ineqs = [
        Inequality("fe_le_fidelity", fe_k, f, fe_k <= f + tol),
        Inequality("fe_formulas_agree", abs(fe_p - fe_k), agree_tol, abs(fe_p - fe_k) <= agree_tol),
    ]
    return FidelityReport(f, fe_p, fe_k, ineqs)
