"""Acceptance gate: one test and one printed pass/fail line per criterion.

Run with `pytest -s tests/test_acceptance.py` to see the lines inline; they
are also shown in captured output on failure.
"""

import dataclasses
import math
import time

import numpy as np
import pytest
from scipy.stats import unitary_group

from specden.fields import (almost_kahler_field, kahler_field,
                            parallel_j_field, random_field)
from specden.frame import build_frame, q_coefficients, rotate_frame
from specden.geometry import covariant_jet, endos_at
from specden.oracle import a2_a3_cross_term, a2_closed, rho_oracle
from specden.rho import rho_almost_kahler, rho_closed, rho_kahler_case, rho_polar
from specden.selfcheck import run_checks
from specden.torus import (TorusConfig, assemble, density_compare,
                           detect_cluster, flux_field, low_spectrum,
                           mu0_on_grid, sweep_grid)

BATTERY = {1: 20, 2: 20, 3: 20}


def report(num, ok, detail):
    print(f"CRITERION {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def battery():
    rng = np.random.default_rng(2024)
    rows = []
    for n, count in BATTERY.items():
        for _ in range(count):
            field = random_field(n, rng)
            jet = covariant_jet(field, build_frame(endos_at(field, field.x0)))
            q = q_coefficients(jet)
            rows.append((jet, q, rho_closed(jet), rho_oracle(jet, q)))
    return rows


def test_criterion_1_closed_vs_oracle(battery):
    t0 = time.time()
    worst = {"rho": 0.0, "A0": 0.0, "A1": 0.0, "A2": 0.0, "A2-A3": 0.0}
    for jet, q, closed, oracle in battery:
        s = 1.0 + abs(oracle.rho)
        worst["rho"] = max(worst["rho"], abs(closed.rho - oracle.rho) / s)
        worst["A0"] = max(worst["A0"], abs(closed.A0 - oracle.A0) / s)
        worst["A1"] = max(worst["A1"], abs(closed.A1 - oracle.A1) / s)
        cross = a2_a3_cross_term(q, jet.a)
        worst["A2"] = max(worst["A2"],
                          abs(oracle.A2 - (a2_closed(q, jet.a) + cross)) / s)
        worst["A2-A3"] = max(worst["A2-A3"],
                             abs((closed.J1 + closed.J2)
                                 - (oracle.A2 - oracle.A3)) / s)
    elapsed = time.time() - t0
    ok = max(worst.values()) <= 1e-6
    report(1, ok, f"closed vs oracle on {len(battery)} fields, "
           f"worst rel {max(worst.values()):.2e} (per-term "
           + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
           + f"), check time {elapsed:.1f}s")


def test_criterion_2_polar_form(battery):
    worst = 0.0
    for jet, _, closed, _ in battery:
        polar = rho_polar(jet)
        worst = max(worst, abs(polar.rho - closed.rho) / (1.0 + abs(closed.rho)))
    ok = worst <= 1e-7
    report(2, ok, f"polar vs closed on {len(battery)} fields, "
           f"worst rel {worst:.2e}")


def test_criterion_3_identity_suite():
    t0 = time.time()
    results = run_checks(seed=0)
    elapsed = time.time() - t0
    worst = max(r.residual / (1.0 + r.scale) for r in results)
    ok = all(r.passed(1e-9) for r in results) and elapsed < 10.0
    report(3, ok, f"{len(results)} identities, worst scaled residual "
           f"{worst:.2e}, {elapsed:.1f}s")


def test_criterion_4_example_reproduction():
    worst_ak, worst_pj = 0.0, 0.0
    for seed in range(8):
        rng = np.random.default_rng(300 + seed)
        field = almost_kahler_field(2 + seed % 2, rng)
        jet = covariant_jet(field, build_frame(endos_at(field, field.x0)))
        ref = rho_almost_kahler(jet)      # (1/24) |grad J|^2 route
        got = rho_closed(jet).rho
        worst_ak = max(worst_ak, abs(got - ref) / (1e-30 + abs(ref)))
    for seed, kind in [(s, k) for s in range(4)
                       for k in (parallel_j_field, kahler_field)]:
        rng = np.random.default_rng(400 + seed)
        field = kind(2, rng)
        jet = covariant_jet(field, build_frame(endos_at(field, field.x0)))
        ref = rho_kahler_case(jet)
        got = rho_closed(jet).rho
        worst_pj = max(worst_pj, abs(got - ref) / (1.0 + abs(ref)))
    ok = worst_ak <= 1e-7 and worst_pj <= 1e-7
    report(4, ok, f"uniform-field example rel {worst_ak:.2e}, "
           f"parallel-J example rel {worst_pj:.2e}")


def test_criterion_5_torus_constant_field():
    t0 = time.time()
    failures = []
    b0 = 1.0
    for n_flux in (1, 2):
        L = math.sqrt(2.0 * math.pi * n_flux / b0)
        config = TorusConfig(N=96, L=(L, L), b=flux_field((L, L), n_flux),
                             n_flux=n_flux, p_list=(4, 8, 12, 16, 20, 24),
                             k_extra=10)
        mu0 = mu0_on_grid(config)
        h = L / config.N
        for p in config.p_list:
            op = assemble(config, p)
            evals = low_spectrum(op, p * n_flux + config.k_extra)
            d_p, (lo, hi) = detect_cluster(evals, p, mu0)
            if d_p != p * n_flux:
                failures.append(f"nf={n_flux} p={p}: d_p={d_p}")
            if np.max(np.abs(evals[:d_p])) > 5.0 * (p * b0) ** 2 * h * h:
                failures.append(f"nf={n_flux} p={p}: cluster too wide")
            if abs(hi - 2.0 * p * mu0) > 0.1 * 2.0 * p * mu0:
                failures.append(f"nf={n_flux} p={p}: gap edge {hi:.3f}")
    elapsed = time.time() - t0
    ok = not failures and elapsed < 300.0
    report(5, ok, f"constant-field clusters exact for n_flux in (1, 2), "
           f"p up to 24 at N=96, {elapsed:.0f}s"
           + (f"; failures: {failures}" if failures else ""))


def test_criterion_6_torus_density_convergence():
    t0 = time.time()
    b0, eps, n_flux = 2.0, 0.5, 2
    L = math.sqrt(2.0 * math.pi * n_flux / b0)
    b = flux_field((L, L), n_flux, modes=[(eps, 1, 0, 0.0)])
    p_list = (6, 10, 14, 18, 22, 26, 30)
    schedule = {p: sweep_grid(p, n_flux) for p in p_list}
    config = TorusConfig(N=schedule[p_list[-1]], L=(L, L), b=b,
                         n_flux=n_flux, p_list=p_list, k_extra=10)
    reports = density_compare(config, seed=0, n_schedule=schedule)
    elapsed = time.time() - t0
    msgs = []
    for tag, series in (("lambda", [r.discrepancy for r in reports]),
                        ("lambda^2", [r.discrepancy_sq for r in reports])):
        inversions = sum(1 for x, y in zip(series, series[1:]) if y > x)
        # the density integrates to zero here, so the absolute target of the
        # limit is zero and the budget is measured against the starting error
        decayed = series[-1] <= 0.25 * series[0]
        if inversions > 1:
            msgs.append(f"{tag}: {inversions} inversions")
        if not decayed:
            msgs.append(f"{tag}: final {series[-1]:.3f} vs start {series[0]:.3f}")
    ok = not msgs and elapsed < 900.0
    d0 = [r.discrepancy for r in reports]
    report(6, ok, f"mean-level discrepancy {d0[0]:.4f} -> {d0[-1]:.4f} over "
           f"p={p_list[0]}..{p_list[-1]}, {elapsed:.0f}s"
           + (f"; failures: {msgs}" if msgs else ""))


def test_criterion_7_frame_gauge_invariance():
    rng = np.random.default_rng(777)
    worst = 0.0
    for trial in range(50):
        n = 2 + trial % 2
        field = random_field(n, rng) if trial % 3 else almost_kahler_field(n, rng)
        en = endos_at(field, field.x0)
        fr = build_frame(en)
        ref = rho_closed(covariant_jet(field, fr)).rho
        groups = [hi - lo for lo, hi in _degenerate_groups(fr.a)]
        block_us = [unitary_group(k, seed=int(rng.integers(1 << 30))).rvs()
                    for k in groups if k > 1]
        rot = rotate_frame(fr, phases=rng.uniform(0, 2 * np.pi, fr.n),
                           block_unitaries=block_us or None)
        got = rho_closed(covariant_jet(field, rot)).rho
        worst = max(worst, abs(got - ref) / (1.0 + abs(ref)))
    ok = worst <= 1e-9
    report(7, ok, f"50 re-gauging trials, worst rel change {worst:.2e}")


def _degenerate_groups(a, rtol=1e-6):
    groups, lo = [], 0
    for i in range(1, len(a) + 1):
        if i == len(a) or abs(a[i] - a[i - 1]) > rtol * (1.0 + abs(a[i])):
            groups.append((lo, i))
            lo = i
    return groups


def test_criterion_8_truncation_independence(battery):
    worst = 0.0
    for jet, q, _, o6 in battery[::6]:
        o8 = rho_oracle(jet, q, D=8)
        for x, y in ((o6.A0, o8.A0), (o6.A1, o8.A1), (o6.A2, o8.A2),
                     (o6.A3, o8.A3), (o6.rho, o8.rho)):
            worst = max(worst, abs(x - y))
    ok = worst <= 1e-10
    report(8, ok, f"degree cap 6 vs 8, worst term difference {worst:.2e}")
