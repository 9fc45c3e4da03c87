"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that the terminal summary prints (see
``conftest.py``); running this file directly prints the same lines.
"""

import time

import numpy as np
import pytest

from entfid import suites
from entfid.channels import apply, depolarizing, identity_channel, random_channel, replace_with
from entfid.extremal import SearchBudget, f1_search, f2_search, knill_laflamme_check, verify_definitional_fidelity
from entfid.fidelity import (
    entanglement_fidelity_kraus,
    entanglement_fidelity_purification,
    uhlmann_fidelity,
)
from entfid.numerics import partial_trace
from entfid.states import DensityOperator, density_from_pure, epr_state, random_density

RESULTS: dict[int, str] = {}
SAMPLER = suites.Sampler(dims=(2, 3, 4), max_kraus=4)


def record(n: int, title: str, ok: bool, detail: str):
    RESULTS[n] = f"criterion {n} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    print(RESULTS[n])
    assert ok, RESULTS[n]


def test_criterion_1_epr_demo():
    start = time.perf_counter()
    rho_a = DensityOperator(partial_trace(density_from_pure(epr_state()).matrix, [2, 2], keep=0))
    e1, e2 = identity_channel(2), replace_with(DensityOperator.maximally_mixed(2))
    values = {
        "F(E1)": (uhlmann_fidelity(rho_a, apply(e1, rho_a)).value, 1.0),
        "F(E2)": (uhlmann_fidelity(rho_a, apply(e2, rho_a)).value, 1.0),
        "Fe(E1)": (entanglement_fidelity_kraus(rho_a, e1).value, 1.0),
        "Fe(E2)": (entanglement_fidelity_kraus(rho_a, e2).value, 0.25),
        "Fe_pur(E1)": (entanglement_fidelity_purification(rho_a, e1).value, 1.0),
        "Fe_pur(E2)": (entanglement_fidelity_purification(rho_a, e2).value, 0.25),
    }
    elapsed = time.perf_counter() - start
    worst = max(abs(v - t) for v, t in values.values())
    record(1, "EPR demo", worst <= 1e-9 and elapsed < 1.0, f"max error {worst:.2e}, {elapsed:.3f}s")


def test_criterion_2_formula_agreement():
    start = time.perf_counter()
    row = suites.fe_formula_agreement(500, 2, SAMPLER)
    elapsed = time.perf_counter() - start
    ok = row.max_violation <= 1e-10 and elapsed < 30
    record(2, "F_e formula agreement", ok, f"{row.samples} pairs, max |diff| {row.max_violation:.2e}, {elapsed:.1f}s")


@pytest.mark.slow
def test_criterion_3_search_matches_kraus_formula():
    start = time.perf_counter()
    worst_value, worst_bound, worst_residual = 0.0, 0.0, 0.0
    n_pairs = 50
    for i in range(n_pairs):
        rng = np.random.default_rng([3, i])
        rho = random_density(2, int(rng.integers(1, 3)), rng)
        e = random_channel(2, int(rng.integers(1, 5)), rng)
        d_t = 2 + i % 2
        fe = entanglement_fidelity_kraus(rho, e).value
        r2 = f2_search(rho, e, SearchBudget(restarts=6, iterations_per_restart=2000, seed=i, d_t=d_t))
        r1 = f1_search(rho, e, SearchBudget(restarts=10, iterations_per_restart=4000, seed=i, d_t=d_t))
        for r in (r2, r1):
            worst_value = max(worst_value, abs(r.search_value - fe))
            worst_bound = max(worst_bound, fe - r.lowest_evaluated)
            worst_residual = max(worst_residual, r.max_extension_residual)
    elapsed = time.perf_counter() - start
    ok = worst_value <= 1e-3 and worst_bound <= 1e-9 and worst_residual <= 1e-8 and elapsed < 300
    record(
        3,
        "search agrees with F_e",
        ok,
        f"{n_pairs} pairs, max |search - F_e| {worst_value:.2e}, "
        f"max bound violation {max(worst_bound, 0):.2e}, max extension residual {worst_residual:.2e}, {elapsed:.0f}s",
    )


def test_criterion_4_monotonicity():
    start = time.perf_counter()
    rows = [suites.monotonicity_partial_trace(500, 4, SAMPLER), suites.monotonicity_operation(500, 4, SAMPLER)]
    elapsed = time.perf_counter() - start
    worst = max(r.max_violation for r in rows)
    record(4, "monotonicity", worst <= 1e-9 and elapsed < 60, f"2x500 instances, max violation {worst:.2e}, {elapsed:.1f}s")


def test_criterion_5_pure_state_equality():
    row = suites.pure_state_equality(200, 5, SAMPLER)
    record(5, "pure-state F = F_e", row.max_violation <= 1e-9, f"{row.samples} states, max |F - F_e| {row.max_violation:.2e}")


def test_criterion_6_fe_le_fidelity():
    pure = suites.fe_le_fidelity(200, 5, SAMPLER)
    mixed = suites.fe_le_fidelity(500, 2, SAMPLER)
    worst = max(pure.max_violation, mixed.max_violation)
    record(6, "F_e <= F", worst <= 1e-9, f"700 pairs, max excess {worst:.2e}")


def test_criterion_7_definitional_fidelity():
    worst_excess, worst_gap = -np.inf, 0.0
    for i in range(20):
        rng = np.random.default_rng([7, i])
        a = random_density(2, int(rng.integers(1, 3)), rng)
        b = random_density(2, int(rng.integers(1, 3)), rng)
        rep = verify_definitional_fidelity(a, b, samples=1000, seed=i)
        worst_excess = max(worst_excess, rep.max_excess)
        worst_gap = max(worst_gap, abs(rep.gap))
    ok = worst_excess <= 1e-9 and worst_gap <= 1e-3
    record(7, "sampled overlaps vs closed form", ok, f"20 pairs, max excess {worst_excess:.2e}, max refined gap {worst_gap:.2e}")


def test_criterion_8_knill_laflamme():
    budget = SearchBudget(restarts=4, iterations_per_restart=2000)
    margins = []
    for p in (0.05, 0.1, 0.2):
        rep = knill_laflamme_check(depolarizing(p), n_states=50, budget=budget)
        margins.append(rep.min_fe - rep.bound)
    sat = knill_laflamme_check(replace_with(DensityOperator.maximally_mixed(2)), n_states=50, budget=budget)
    fe_mixed = entanglement_fidelity_kraus(DensityOperator.maximally_mixed(2), replace_with(DensityOperator.maximally_mixed(2))).value
    sat_err = abs(fe_mixed - sat.bound)
    ok = min(margins) >= -1e-4 and sat_err <= 1e-9
    record(8, "Knill-Laflamme bound", ok, f"min (F_e - bound) {min(margins):.2e}, saturation error {sat_err:.2e}")


def test_criterion_9_purification_independence():
    row = suites.purification_independence(100, 9, SAMPLER, isometries=20)
    record(9, "purification independence", row.max_violation <= 1e-9, f"100 instances x 20 isometries, max diff {row.max_violation:.2e}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
