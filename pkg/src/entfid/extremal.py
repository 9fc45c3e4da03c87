"""Minimization over extensions and auxiliary dynamics.

Every extension of ``rho`` on ``S⊗T`` (``d_T`` fixed) is ``(I ⊗ L)(|psi><psi|)``
for the canonical purification ``|psi>`` on ``S⊗P`` and some channel
``L: P -> T``. The searches parametrize ``L`` by the Stinespring isometry
``V: P -> T⊗K`` (real vector -> complex matrix -> polar factor), so every
point visited is an exact extension.

States of the form ``X X†`` are kept as their factor ``X``; the fidelity of
``X X†`` and ``Y Y†`` is then ``||X† Y||_1^2`` (trace norm), which avoids
matrix square roots inside the optimizer loop.

Local refinement uses scipy's Powell and Nelder-Mead direct searches;
restarts draw their starting points from ``seed + restart_index``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .channels import (
    QuantumChannel,
    apply,
    extend_with_identity,
    make_channel,
    random_channel,
)
from .fidelity import entanglement_fidelity_kraus, uhlmann_fidelity
from .numerics import DimensionError, ValidationError, haar_isometry, max_abs, polar_isometry
from .states import (
    DensityOperator,
    Extension,
    PureState,
    density_from_pure,
    purification_matrix,
    random_density,
)

TOL_THEOREM = 1e-6
KL_SLACK = 1e-4


@dataclass(frozen=True)
class SearchBudget:
    restarts: int = 6
    iterations_per_restart: int = 3000
    seed: int = 0
    d_t: int | None = None
    polish: int = 2

    def __post_init__(self):
        if self.restarts < 1 or self.iterations_per_restart < 1:
            raise ValidationError("restarts and iterations must be at least 1", field="budget")
        if self.d_t is not None and self.d_t < 1:
            raise ValidationError("d_T must be at least 1", field="d_t")


@dataclass
class SearchResult:
    """Outcome of one minimization.

    ``min_value`` includes the known feasible anchor point (the canonical
    purification with identity auxiliary dynamics); ``search_value`` is the
    best value reached from the random restarts alone.
    """

    min_value: float
    argmin_extension: Extension | None
    argmin_aux_channel: QuantumChannel | None
    evaluations: int
    converged: bool
    search_value: float
    anchor_value: float | None = None
    restart_values: list[float] = field(default_factory=list)
    lowest_evaluated: float = 1.0
    max_extension_residual: float = 0.0

    @property
    def gap(self) -> float:
        """Second-best minus best restart value."""
        v = sorted(self.restart_values)
        return v[1] - v[0] if len(v) > 1 else 0.0

    def to_dict(self) -> dict:
        from .serialization import channel_to_dict, matrix_to_json

        ext = self.argmin_extension
        return {
            "min_value": self.min_value,
            "search_value": self.search_value,
            "anchor_value": self.anchor_value,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "restart_values": list(self.restart_values),
            "lowest_evaluated": self.lowest_evaluated,
            "max_extension_residual": self.max_extension_residual,
            "argmin_extension": None
            if ext is None
            else {"shape": list(ext.shape), **matrix_to_json(ext.joint.matrix)},
            "argmin_aux_channel": None
            if self.argmin_aux_channel is None
            else channel_to_dict(self.argmin_aux_channel),
        }


def trace_norm_fidelity(x: np.ndarray, y: np.ndarray) -> float:
    """Fidelity of ``x x†`` and ``y y†`` from their factors."""
    s = np.linalg.svd(x.conj().T @ y, compute_uv=False)
    return float(np.sum(s)) ** 2


def _params_to_isometry(p: np.ndarray, rows: int, cols: int) -> np.ndarray:
    n = rows * cols
    return polar_isometry((p[:n] + 1j * p[n:]).reshape(rows, cols))


def _isometry_to_params(v: np.ndarray) -> np.ndarray:
    return np.concatenate([v.real.ravel(), v.imag.ravel()])


def _extension_factor(psi: np.ndarray, v: np.ndarray, d_t: int) -> np.ndarray:
    """Factor ``X`` with ``X X† = (I ⊗ L)(|psi><psi|)``.

    ``psi`` is the ``d_S x d_P`` amplitude matrix; row block ``k`` of the
    isometry ``v`` is Kraus operator ``k`` of ``L``.
    """
    d_s = psi.shape[0]
    m = v.shape[0] // d_t
    x = (psi @ v.T).reshape(d_s, m, d_t)
    return x.transpose(0, 2, 1).reshape(d_s * d_t, m)


def _apply_factor(kraus: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Factor of ``sum_i A_i (x x†) A_i†``, Kraus stacked as ``(K, d, d)``."""
    return np.concatenate([a @ x for a in kraus], axis=1)


def _reduced_from_factor(x: np.ndarray, d_s: int, d_t: int) -> np.ndarray:
    xs = x.reshape(d_s, d_t, -1)
    return np.einsum("atk,btk->ab", xs, xs.conj())


def _joint_from_factor(x: np.ndarray) -> DensityOperator:
    m = x @ x.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(m / np.trace(m).real)


def _check_square(rho: DensityOperator, e: QuantumChannel):
    if not e.is_square or e.dim_in != rho.dim:
        raise DimensionError(f"channel {e.dim_in}->{e.dim_out} does not act on dim {rho.dim}")


class _Tracker:
    """Counts evaluations and remembers the best point seen."""

    def __init__(self, fn: Callable[[np.ndarray], float]):
        self.fn = fn
        self.count = 0
        self.lowest = np.inf
        self.best_x = None

    def __call__(self, p: np.ndarray) -> float:
        self.count += 1
        val = self.fn(p)
        if val < self.lowest:
            self.lowest = val
            self.best_x = np.array(p, copy=True)
        return val


def _multistart(tracker: _Tracker, n: int, budget: SearchBudget, sampler=None):
    """Powell from each restart, then Nelder-Mead on the best few.

    Returns ``(best_x, best_value, restart_values, converged)``.
    """
    cands = []
    for r in range(budget.restarts):
        rng = np.random.default_rng(budget.seed + r)
        x0 = sampler(rng) if sampler is not None else rng.standard_normal(n)
        res = minimize(
            tracker,
            x0,
            method="Powell",
            options={"maxfev": budget.iterations_per_restart, "xtol": 1e-3, "ftol": 1e-6},
        )
        cands.append([float(res.fun), res.x, bool(res.success)])
    cands.sort(key=lambda c: c[0])
    for c in cands[: budget.polish]:
        res = minimize(
            tracker,
            c[1],
            method="Nelder-Mead",
            options={
                "maxfev": 2 * budget.iterations_per_restart,
                "adaptive": True,
                "xatol": 1e-7,
                "fatol": 1e-11,
            },
        )
        if res.fun <= c[0]:
            c[0], c[1] = float(res.fun), res.x
        c[2] = bool(res.success)
    cands.sort(key=lambda c: c[0])
    return cands[0][1], cands[0][0], [c[0] for c in cands], cands[0][2]


def extension_from_channel(rho: DensityOperator, lam: QuantumChannel) -> Extension:
    """``(I_S ⊗ L)(|psi><psi|)`` for the canonical purification ``|psi>``."""
    psi = purification_matrix(rho)
    d_s, d_p = psi.shape
    if lam.dim_in != d_p:
        raise DimensionError(f"purifier dimension is {d_p}, channel acts on {lam.dim_in}")
    joint = DensityOperator(np.outer(psi.ravel(), psi.ravel().conj()))
    out = apply(extend_with_identity(lam, d_s, side="left"), joint)
    return Extension(out, (d_s, lam.dim_out))


def sample_extension(rho: DensityOperator, d_t: int, seed) -> Extension:
    """Random extension of ``rho`` on ``S⊗T``.

    Applies a random channel ``P -> T`` with ``d_P * d_T`` Kraus operators to
    the purifier of the canonical purification; that Kraus count suffices to
    reach every extension with this ``d_T``.
    """
    if d_t < 1:
        raise ValidationError("d_T must be at least 1", field="d_t")
    d_p = purification_matrix(rho).shape[1]
    lam = random_channel(d_p, d_p * d_t, seed, dim_out=d_t)
    return extension_from_channel(rho, lam)


def f2_objective(ext: Extension, e: QuantumChannel) -> float:
    """``F(rho~, (E ⊗ I_T)(rho~))`` by the closed form."""
    out = apply(extend_with_identity(e, ext.shape[1]), ext.joint)
    return uhlmann_fidelity(ext.joint, out).value


def f1_objective(ext: Extension, e: QuantumChannel, aux: QuantumChannel) -> float:
    """``F((I ⊗ E')(rho~), (E ⊗ E')(rho~))`` by the closed form."""
    d_s, d_t = ext.shape
    if aux.dim_in != d_t or not aux.is_square:
        raise DimensionError(f"auxiliary channel must act on T (dim {d_t})")
    left = apply(extend_with_identity(aux, d_s, side="left"), ext.joint)
    right = apply(extend_with_identity(e, d_t), left)
    return uhlmann_fidelity(left, right).value


class _ExtensionSpace:
    """Parameter space of extensions of ``rho`` with a given ``d_T``."""

    def __init__(self, rho: DensityOperator, d_t: int, kraus_count: int | None = None):
        self.rho = rho
        self.psi = purification_matrix(rho)
        self.d_s, self.d_p = self.psi.shape
        self.d_t = d_t
        self.m = kraus_count or self.d_p * d_t
        self.rows = self.m * d_t
        self.n = 2 * self.rows * self.d_p
        self.max_residual = 0.0

    def factor(self, p: np.ndarray) -> np.ndarray:
        v = _params_to_isometry(p[: self.n], self.rows, self.d_p)
        x = _extension_factor(self.psi, v, self.d_t)
        res = max_abs(_reduced_from_factor(x, self.d_s, self.d_t) - self.rho.matrix)
        if res > self.max_residual:
            self.max_residual = res
        return x

    def anchor_params(self) -> np.ndarray:
        """Isometry sending basis state ``p`` to row ``p``.

        For ``d_T >= d_P`` this is ``|p> -> |p>_T ⊗ |0>_K``, i.e. the
        canonical purification itself.
        """
        v = np.eye(self.rows, self.d_p, dtype=complex)
        return _isometry_to_params(v)

    def extension(self, p: np.ndarray) -> Extension:
        return Extension(_joint_from_factor(self.factor(p)), (self.d_s, self.d_t))


class _AuxSpace:
    """Channels ``T -> T`` with a fixed number of Kraus operators."""

    def __init__(self, d_t: int, kraus_count: int | None = None):
        self.d_t = d_t
        self.k = kraus_count or d_t
        self.rows = self.k * d_t
        self.n = 2 * self.rows * d_t

    def kraus(self, p: np.ndarray) -> np.ndarray:
        v = _params_to_isometry(p, self.rows, self.d_t)
        return v.reshape(self.k, self.d_t, self.d_t)

    def identity_params(self) -> np.ndarray:
        v = np.zeros((self.rows, self.d_t), dtype=complex)
        v[: self.d_t] = np.eye(self.d_t)
        return _isometry_to_params(v)

    def channel(self, p: np.ndarray) -> QuantumChannel:
        return make_channel(list(self.kraus(p)))


def _default_d_t(rho: DensityOperator, budget: SearchBudget) -> int:
    if budget.d_t is not None:
        return budget.d_t
    return purification_matrix(rho).shape[1]


def f2_search(rho: DensityOperator, e: QuantumChannel, budget: SearchBudget = SearchBudget()) -> SearchResult:
    """Minimize ``F(rho~, (E ⊗ I_T)(rho~))`` over extensions ``rho~`` of ``rho``.

    ``d_T`` defaults to the rank of ``rho``. Non-convergence is reported
    through ``converged``; it never raises.
    """
    _check_square(rho, e)
    space = _ExtensionSpace(rho, _default_d_t(rho, budget))
    kraus = np.array([np.kron(a, np.eye(space.d_t)) for a in e.kraus])

    def objective(p):
        x = space.factor(p)
        return trace_norm_fidelity(x, _apply_factor(kraus, x))

    tracker = _Tracker(objective)
    best_x, best, restart_values, converged = _multistart(tracker, space.n, budget)
    search_lowest = tracker.lowest

    anchor = space.anchor_params()
    anchor_value = tracker(anchor)
    if anchor_value < best:
        best_x, best_value = anchor, anchor_value
    else:
        best_value = best
    return SearchResult(
        min_value=float(np.clip(best_value, 0.0, 1.0)),
        argmin_extension=space.extension(best_x),
        argmin_aux_channel=None,
        evaluations=tracker.count,
        converged=converged,
        search_value=float(np.clip(min(best, search_lowest), 0.0, 1.0)),
        anchor_value=float(anchor_value),
        restart_values=restart_values,
        lowest_evaluated=float(tracker.lowest),
        max_extension_residual=space.max_residual,
    )


def f1_search(
    rho: DensityOperator,
    e: QuantumChannel,
    budget: SearchBudget = SearchBudget(),
    aux_kraus: int | None = None,
) -> SearchResult:
    """Jointly minimize ``F((I ⊗ E')(rho~), (E ⊗ E')(rho~))`` over extensions
    ``rho~`` and channels ``E'`` on T.

    The extension channel gets ``d_T`` Kraus operators and ``E'`` gets
    ``aux_kraus`` (default ``d_P``), so the composite ``E' o L`` still reaches
    Kraus rank ``d_P * d_T`` while the parameter count stays small.
    """
    _check_square(rho, e)
    d_t = _default_d_t(rho, budget)
    d_p = purification_matrix(rho).shape[1]
    space = _ExtensionSpace(rho, d_t, kraus_count=max(d_t, -(-d_p // d_t)))
    aux = _AuxSpace(d_t, aux_kraus or d_p)
    d_s, d_t = space.d_s, space.d_t
    kraus = np.array([np.kron(a, np.eye(d_t)) for a in e.kraus])

    def objective(p):
        x = space.factor(p[: space.n]).reshape(d_s, d_t, -1)
        c = aux.kraus(p[space.n :])
        left = np.einsum("jtu,sum->stjm", c, x).reshape(d_s * d_t, -1)
        # Only left @ left† matters; shrink the factor to a square one.
        left = np.linalg.qr(left.conj().T, mode="r").conj().T
        return trace_norm_fidelity(left, _apply_factor(kraus, left))

    tracker = _Tracker(objective)
    n = space.n + aux.n
    best_x, best, restart_values, converged = _multistart(tracker, n, budget)
    search_lowest = tracker.lowest

    anchor = np.concatenate([space.anchor_params(), aux.identity_params()])
    anchor_value = tracker(anchor)
    if anchor_value < best:
        best_x, best_value = anchor, anchor_value
    else:
        best_value = best
    return SearchResult(
        min_value=float(np.clip(best_value, 0.0, 1.0)),
        argmin_extension=space.extension(best_x[: space.n]),
        argmin_aux_channel=aux.channel(best_x[space.n :]),
        evaluations=tracker.count,
        converged=converged,
        search_value=float(np.clip(min(best, search_lowest), 0.0, 1.0)),
        anchor_value=float(anchor_value),
        restart_values=restart_values,
        lowest_evaluated=float(tracker.lowest),
        max_extension_residual=space.max_residual,
    )


def _pure_factor(psi1: np.ndarray, psi2: np.ndarray) -> float:
    return abs(np.vdot(psi1, psi2)) ** 2


@dataclass
class DefinitionalReport:
    closed_form: float
    max_sampled: float
    max_refined: float
    max_excess: float
    samples: int
    tol: float = 1e-9

    @property
    def gap(self) -> float:
        return self.closed_form - self.max_refined

    @property
    def passed(self) -> bool:
        return self.max_excess <= self.tol

    def to_dict(self) -> dict:
        return {
            "closed_form": self.closed_form,
            "max_sampled": self.max_sampled,
            "max_refined": self.max_refined,
            "gap": self.gap,
            "max_excess": self.max_excess,
            "samples": self.samples,
            "pass": self.passed,
        }


def verify_definitional_fidelity(
    rho1: DensityOperator, rho2: DensityOperator, samples: int = 1000, seed: int = 0, refine: int = 3
) -> DefinitionalReport:
    """Compare sampled purification overlaps with the closed-form fidelity.

    Both states are purified onto a purifier of dimension ``d``; the
    purification of ``rho1`` is held fixed and that of ``rho2`` is rotated
    by Haar-random unitaries on the purifier. The best ``refine`` samples
    are then refined by Nelder-Mead over the unitary.
    """
    if rho1.dim != rho2.dim:
        raise DimensionError(f"dimension mismatch: {rho1.dim} vs {rho2.dim}")
    d = rho1.dim
    closed = uhlmann_fidelity(rho1, rho2).value

    def padded(rho):
        p = purification_matrix(rho)
        out = np.zeros((d, d), dtype=complex)
        out[:, : p.shape[1]] = p
        return out

    p1, p2 = padded(rho1), padded(rho2)

    def overlap(w):
        return abs(np.sum(p1.conj() * (p2 @ w.T))) ** 2

    rng = np.random.default_rng(seed)
    scored = []
    excess = -np.inf
    for _ in range(samples):
        w = haar_isometry(d, d, rng)
        val = overlap(w)
        excess = max(excess, val - closed)
        scored.append((val, w))
    scored.sort(key=lambda s: -s[0])
    max_sampled = scored[0][0] if scored else 0.0

    best = max_sampled
    for val, w in scored[:refine]:
        res = minimize(
            lambda p: -overlap(_params_to_isometry(p, d, d)),
            _isometry_to_params(w),
            method="Nelder-Mead",
            options={"maxfev": 4000, "adaptive": True, "xatol": 1e-9, "fatol": 1e-13},
        )
        refined = -float(res.fun)
        excess = max(excess, refined - closed)
        best = max(best, refined)
    return DefinitionalReport(closed, float(max_sampled), float(best), float(excess), samples)


def min_pure_fidelity(e: QuantumChannel, budget: SearchBudget = SearchBudget(), samples: int | None = None) -> SearchResult:
    """Estimate ``min_psi <psi|E(|psi><psi|)|psi>`` over pure states on S.

    Dense Haar sampling picks the starting points; each is refined by
    Nelder-Mead on the unnormalized amplitude vector. The returned value is
    an upper bound on the true minimum.
    """
    if not e.is_square:
        raise DimensionError("pure-state fidelity needs a square channel")
    d = e.dim_in
    ops = np.array(e.kraus)

    def objective(p):
        v = p[:d] + 1j * p[d:]
        v = v / np.linalg.norm(v)
        return float(np.sum(np.abs(np.einsum("a,iab,b->i", v.conj(), ops, v)) ** 2))

    tracker = _Tracker(objective)
    rng = np.random.default_rng(budget.seed)
    n_samples = samples if samples is not None else 200 * budget.restarts
    pts = rng.standard_normal((max(n_samples, budget.restarts), 2 * d))
    vals = np.array([tracker(p) for p in pts])
    order = np.argsort(vals)[: budget.restarts]
    restart_values = []
    converged = True
    for i in order:
        res = minimize(
            tracker,
            pts[i],
            method="Nelder-Mead",
            options={"maxfev": budget.iterations_per_restart, "adaptive": True, "xatol": 1e-9, "fatol": 1e-13},
        )
        restart_values.append(float(res.fun))
        converged = converged and bool(res.success)
    v = tracker.best_x[:d] + 1j * tracker.best_x[d:]
    psi = PureState(v / np.linalg.norm(v))
    best = float(np.clip(tracker.lowest, 0.0, 1.0))
    return SearchResult(
        min_value=best,
        argmin_extension=Extension(density_from_pure(psi), (d, 1)),
        argmin_aux_channel=None,
        evaluations=tracker.count,
        converged=converged,
        search_value=best,
        restart_values=sorted(restart_values),
        lowest_evaluated=float(tracker.lowest),
    )


@dataclass
class KnillLaflammeReport:
    eps_hat: float
    bound: float
    min_fe: float
    fe_values: list[float]
    gap: float
    slack: float = KL_SLACK

    @property
    def passed(self) -> bool:
        return self.min_fe >= self.bound - self.slack

    def to_dict(self) -> dict:
        return {
            "eps_hat": self.eps_hat,
            "bound": self.bound,
            "min_fe": self.min_fe,
            "n_states": len(self.fe_values),
            "refinement_gap": self.gap,
            "slack": self.slack,
            "pass": self.passed,
        }


def knill_laflamme_check(
    e: QuantumChannel,
    n_states: int = 50,
    budget: SearchBudget = SearchBudget(),
    include_mixed: bool = True,
    slack: float = KL_SLACK,
) -> KnillLaflammeReport:
    """Empirical check of ``F_e(rho, E) >= 1 - 3 eps / 2``.

    ``eps`` is estimated as one minus :func:`min_pure_fidelity`; ``F_e`` is
    evaluated for ``n_states`` random states of random rank (plus the
    maximally mixed state when ``include_mixed``).
    """
    if not e.is_square:
        raise DimensionError("Knill-Laflamme check needs a square channel")
    d = e.dim_in
    pure = min_pure_fidelity(e, budget)
    eps_hat = 1.0 - pure.min_value
    bound = 1.0 - 1.5 * eps_hat
    rng = np.random.default_rng(budget.seed + 1_000_003)
    states = [DensityOperator.maximally_mixed(d)] if include_mixed else []
    for _ in range(n_states):
        states.append(random_density(d, int(rng.integers(1, d + 1)), rng))
    fe = [entanglement_fidelity_kraus(rho, e).value for rho in states]
    return KnillLaflammeReport(eps_hat, bound, float(min(fe)), fe, pure.gap, slack)
