"""Seeded property suites.

Each suite draws ``samples`` random instances, measures how far a stated
inequality or identity is violated, and returns one :class:`PropertyRow`.
A raised exception counts as an infinite violation. ``cmd_verify`` and the
acceptance tests both run these.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .channels import (
    QuantumChannel,
    apply,
    channel_from_unitary_rep,
    random_channel,
    stinespring_dilation,
)
from .extremal import f2_objective, sample_extension
from .fidelity import (
    entanglement_fidelity_from_purification,
    entanglement_fidelity_kraus,
    entanglement_fidelity_purification,
    uhlmann_fidelity,
)
from .numerics import haar_isometry, herm_eig, max_abs, partial_trace
from .states import (
    DensityOperator,
    PureState,
    canonical_purification,
    density_from_pure,
    is_extension,
    purification_matrix,
    random_density,
    random_pure,
)


@dataclass(frozen=True)
class PropertyRow:
    name: str
    samples: int
    max_violation: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.max_violation <= self.tol)


def _run(name: str, samples: int, seed: int, tol: float, check: Callable[[np.random.Generator], float]) -> PropertyRow:
    worst = 0.0
    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        try:
            v = float(check(rng))
        except (ValueError, np.linalg.LinAlgError):
            v = np.inf
        worst = max(worst, v)
    return PropertyRow(name, samples, worst, tol)


def faulty_channel(dim: int, seed) -> QuantumChannel:
    """Kraus set scaled so completeness fails; bypasses validation."""
    good = random_channel(dim, 2, seed)
    ops = tuple(np.sqrt(1.2) * a for a in good.kraus)
    return QuantumChannel(ops, dim, dim)


class Sampler:
    """Random instances with dimension in ``dims`` and Kraus count 1..4."""

    def __init__(self, dims=(2, 3, 4), max_kraus: int = 4, fault: bool = False):
        self.dims = tuple(dims)
        self.max_kraus = max_kraus
        self.fault = fault

    def dim(self, rng) -> int:
        return int(rng.choice(self.dims))

    def state(self, rng, d: int) -> DensityOperator:
        return random_density(d, int(rng.integers(1, d + 1)), rng)

    def channel(self, rng, d: int) -> QuantumChannel:
        if self.fault:
            return faulty_channel(d, rng)
        return random_channel(d, int(rng.integers(1, self.max_kraus + 1)), rng)

    def pair(self, rng):
        d = self.dim(rng)
        return self.state(rng, d), self.channel(rng, d)


def partial_trace_preserves_trace(samples, seed, sampler: Sampler) -> PropertyRow:
    def check(rng):
        dims = [sampler.dim(rng), int(rng.integers(1, 4))]
        n = dims[0] * dims[1]
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        h = g + g.conj().T
        return max(
            abs(np.trace(partial_trace(h, dims, keep=k)) - np.trace(h)) for k in (0, 1)
        )

    return _run("partial_trace_trace_preserving", samples, seed, 1e-12, check)


def eig_reconstruction(samples, seed, sampler: Sampler) -> PropertyRow:
    def check(rng):
        n = int(rng.integers(1, 17))
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        h = (g + g.conj().T) / 2
        w, v = herm_eig(h)
        return max(max_abs((v * w) @ v.conj().T - h), max_abs(v.conj().T @ v - np.eye(n)))

    return _run("herm_eig_reconstruction", samples, seed, 1e-10, check)


def purification_recovers_state(samples, seed, sampler: Sampler) -> PropertyRow:
    def check(rng):
        rho = sampler.state(rng, sampler.dim(rng))
        psi, shape = canonical_purification(rho)
        joint = np.outer(psi.amplitudes, psi.amplitudes.conj())
        return max_abs(partial_trace(joint, shape, keep=0) - rho.matrix)

    return _run("purification_recovers_state", samples, seed, 1e-10, check)


def channel_completeness(samples, seed, sampler: Sampler) -> PropertyRow:
    def check(rng):
        rho, e = sampler.pair(rng)
        apply(e, rho)  # raises if the output is not a density operator
        return e.residual()

    return _run("channel_completeness", samples, seed, 1e-10, check)


def dilation_round_trip(samples, seed, sampler: Sampler) -> PropertyRow:
    def check(rng):
        d = sampler.dim(rng)
        e = sampler.channel(rng, d)
        back = channel_from_unitary_rep(stinespring_dilation(e))
        worst = 0.0
        for i in range(d):
            for j in range(d):
                m = np.zeros((d, d), dtype=complex)
                m[i, j] = 1.0
                worst = max(worst, max_abs(back.apply_matrix(m) - e.apply_matrix(m)))
        return worst

    return _run("dilation_round_trip", samples, seed, 1e-8, check)


def fidelity_symmetry(samples, seed, sampler: Sampler) -> PropertyRow:
    def check(rng):
        d = sampler.dim(rng)
        a, b = sampler.state(rng, d), sampler.state(rng, d)
        return abs(uhlmann_fidelity(a, b).value - uhlmann_fidelity(b, a).value)

    return _run("fidelity_symmetry", samples, seed, 1e-10, check)


def monotonicity_partial_trace(samples, seed, sampler: Sampler) -> PropertyRow:
    """``F(joint1, joint2) <= F(tr_T joint1, tr_T joint2)``."""

    def check(rng):
        dims = [sampler.dim(rng), int(rng.integers(2, 4))]
        n = dims[0] * dims[1]
        a = random_density(n, int(rng.integers(1, n + 1)), rng)
        b = random_density(n, int(rng.integers(1, n + 1)), rng)
        whole = uhlmann_fidelity(a, b).value
        part = uhlmann_fidelity(
            DensityOperator(partial_trace(a.matrix, dims, keep=0)),
            DensityOperator(partial_trace(b.matrix, dims, keep=0)),
        ).value
        return max(0.0, whole - part)

    return _run("monotonicity_partial_trace", samples, seed, 1e-9, check)


def monotonicity_operation(samples, seed, sampler: Sampler) -> PropertyRow:
    """``F(E(rho1), E(rho2)) >= F(rho1, rho2)``."""

    def check(rng):
        d = sampler.dim(rng)
        a, b = sampler.state(rng, d), sampler.state(rng, d)
        e = sampler.channel(rng, d)
        return max(0.0, uhlmann_fidelity(a, b).value - uhlmann_fidelity(apply(e, a), apply(e, b)).value)

    return _run("monotonicity_operation", samples, seed, 1e-9, check)


def fe_formula_agreement(samples, seed, sampler: Sampler) -> PropertyRow:
    def check(rng):
        rho, e = sampler.pair(rng)
        return abs(
            entanglement_fidelity_purification(rho, e).value - entanglement_fidelity_kraus(rho, e).value
        )

    return _run("fe_formula_agreement", samples, seed, 1e-10, check)


def fe_le_fidelity(samples, seed, sampler: Sampler) -> PropertyRow:
    """``F_e(rho, E) <= F(rho, E(rho))``."""

    def check(rng):
        rho, e = sampler.pair(rng)
        return max(0.0, entanglement_fidelity_kraus(rho, e).value - uhlmann_fidelity(rho, apply(e, rho)).value)

    return _run("fe_le_fidelity", samples, seed, 1e-9, check)


def pure_state_equality(samples, seed, sampler: Sampler) -> PropertyRow:
    """``F_e = F`` when the input is pure."""

    def check(rng):
        d = sampler.dim(rng)
        rho = density_from_pure(random_pure(d, rng))
        e = sampler.channel(rng, d)
        return abs(entanglement_fidelity_kraus(rho, e).value - uhlmann_fidelity(rho, apply(e, rho)).value)

    return _run("pure_state_equality", samples, seed, 1e-9, check)


def purification_independence(samples, seed, sampler: Sampler, isometries: int = 20) -> PropertyRow:
    """``F_e`` is the same for purifications related by purifier isometries."""

    def check(rng):
        rho, e = sampler.pair(rng)
        base = entanglement_fidelity_purification(rho, e).value
        psi = purification_matrix(rho)
        d_s, d_p = psi.shape
        worst = 0.0
        for _ in range(isometries):
            d_big = d_p + int(rng.integers(0, 3))
            w = haar_isometry(d_big, d_p, rng)
            vec = (psi @ w.T).reshape(-1)
            other = entanglement_fidelity_from_purification(
                PureState(vec / np.linalg.norm(vec)), (d_s, d_big), e
            )
            worst = max(worst, abs(other - base))
        return worst

    return _run("purification_independence", samples, seed, 1e-9, check)


def extension_sampling(samples, seed, sampler: Sampler) -> PropertyRow:
    def check(rng):
        rho = sampler.state(rng, sampler.dim(rng))
        ext = sample_extension(rho, int(rng.integers(1, 4)), rng)
        return is_extension(ext, rho).residual

    return _run("extension_is_valid", samples, seed, 1e-8, check)


def pointwise_extension_bound(samples, seed, sampler: Sampler) -> PropertyRow:
    """``F(rho~, (E ⊗ I)(rho~)) >= F_e(rho, E)`` for sampled extensions."""

    def check(rng):
        rho, e = sampler.pair(rng)
        ext = sample_extension(rho, int(rng.integers(1, 4)), rng)
        return max(0.0, entanglement_fidelity_kraus(rho, e).value - f2_objective(ext, e))

    return _run("pointwise_extension_bound", samples, seed, 1e-9, check)


ALL_SUITES = (
    partial_trace_preserves_trace,
    eig_reconstruction,
    purification_recovers_state,
    channel_completeness,
    dilation_round_trip,
    fidelity_symmetry,
    monotonicity_partial_trace,
    monotonicity_operation,
    fe_formula_agreement,
    fe_le_fidelity,
    pure_state_equality,
    purification_independence,
    extension_sampling,
    pointwise_extension_bound,
)


SUITE_NAMES = (
    "partial_trace_trace_preserving",
    "herm_eig_reconstruction",
    "purification_recovers_state",
    "channel_completeness",
    "dilation_round_trip",
    "fidelity_symmetry",
    "monotonicity_partial_trace",
    "monotonicity_operation",
    "fe_formula_agreement",
    "fe_le_fidelity",
    "pure_state_equality",
    "purification_independence",
    "extension_is_valid",
    "pointwise_extension_bound",
)


def run_all(
    samples: int = 200, seed: int = 0, dims=(2, 3, 4), fault: bool = False, tol_overrides: dict | None = None
) -> list[PropertyRow]:
    """Run every suite; ``tol_overrides`` maps a property name to a new tolerance."""
    tol_overrides = tol_overrides or {}
    unknown = set(tol_overrides) - set(SUITE_NAMES)
    if unknown:
        raise ValueError(f"unknown properties: {sorted(unknown)}")
    sampler = Sampler(dims, fault=fault)
    rows = [suite(samples, seed, sampler) for suite in ALL_SUITES]
    return [replace(r, tol=tol_overrides[r.name]) if r.name in tol_overrides else r for r in rows]
