"""Acceptance suite: one test per criterion, each printing a single verdict line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline;
they are also echoed through ``capsys.disabled`` so plain ``-v`` shows them.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from driftheat import GaussianProfile, Schedule, check_identities, cli, make_model, perturb_potential, tables
from driftheat.bounds import (
    ansatz_coefficients,
    critical_bound,
    default_times,
    euclidean_constant,
    holder_constant_quadrature,
    sharpness_L,
)
from driftheat.checks import hand_anchor
from driftheat.identities import random_divergence_sweep
from driftheat.spectral import (
    constant_field,
    linear_field,
    normalized_random_field,
    oracle_discrepancy,
    potential_field,
    random_field,
)
from driftheat.transfer import expected_row_constants, flow_norm_identity, schur_identity_residual, schur_row_constant

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
SEED = 20240611


def battery():
    """Rows 1-4, reverse profiles and 50 random fields (n <= 3, N <= 8).

    Accumulators below use np.maximum so a NaN anywhere fails the criterion.
    """
    items = []
    for n in (1, 2, 3):
        m = make_model("euclidean", n)
        items += [
            (f"row1 n={n}", constant_field(m)),
            (f"row2 n={n}", linear_field(m, np.linspace(1.0, -0.5, n))),
            (f"row3/4 n={n}", potential_field(m)),
        ]
        for c in (1.1, 1.5, 2.0, 3.0):
            items.append((f"reverse c={c} n={n}", GaussianProfile("reverse", c, n)))
    rng = np.random.default_rng(SEED)
    for i in range(50):
        n = int(rng.integers(1, 4))
        degree = int(rng.integers(0, 9))
        items.append((f"random#{i} n={n} N={degree}", random_field(make_model("euclidean", n), degree, rng)))
    return items


def report(capsys, number, title, ok, detail, elapsed, budget):
    ok = ok and elapsed < budget
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail} ({elapsed:.1f}s / {budget:.0f}s)"
    with capsys.disabled():
        print("\n" + line)
    return ok


def test_criterion_1_critical_monitor(capsys):
    t0 = time.perf_counter()
    times = default_times(5.0, 40)
    worst, all_monotone, failures = 0.0, True, []
    for label, v in battery():
        rep = critical_bound(v, times, tolerance=1e-8)
        worst = float(np.maximum(worst, rep.max_ratio))
        all_monotone &= rep.monotone
        if not rep.passed or not rep.monotone:
            failures.append(label)
    ok = worst <= 1 + 1e-8 and all_monotone and not failures
    detail = f"max r = {worst:.12f}, monotone = {all_monotone}, failures = {failures or 'none'}"
    assert report(capsys, 1, "critical-weight monitor over the battery", ok, detail, time.perf_counter() - t0, 60)


def test_criterion_2_sharpness(capsys):
    t0 = time.perf_counter()
    cs = (2.0, 1.5, 1.1, 1.01)
    worst_closed = worst_limit = 0.0
    monotone = True
    for n in (1, 2, 4):
        values = []
        for c in cs:
            s = sharpness_L(GaussianProfile("reverse", c, n))
            worst_closed = np.maximum(worst_closed, abs(s.closed_form - ((c + 1) / (2 * c)) ** (n / 4)))
            worst_limit = np.maximum(worst_limit, s.limit_agreement)
            values.append(s.closed_form)
        monotone &= all(a < b for a, b in zip(values, values[1:])) and values[-1] < 1
    ok = worst_closed <= 1e-6 and worst_limit <= 1e-4 and monotone
    detail = f"closed-form gap {worst_closed:.1e}, t=20 gap {worst_limit:.1e}, L increases to 1 as c decreases: {monotone}"
    assert report(capsys, 2, "sharpness of the reverse profiles", ok, detail, time.perf_counter() - t0, 30)


def test_criterion_3_divergence_identity(capsys):
    t0 = time.perf_counter()
    sweep = random_divergence_sweep(SEED, 1000)
    lhs, rhs, expect = hand_anchor()
    anchor = max(abs(lhs - expect), abs(rhs - expect))
    ok = sweep.max_residual < 1e-9 and anchor < 1e-12
    detail = f"1000 jets max residual {sweep.max_residual:.1e}, anchor {lhs:.12f} vs {expect:.12f} (gap {anchor:.1e})"
    assert report(capsys, 3, "divergence identity", ok, detail, time.perf_counter() - t0, 10)


def test_criterion_4_ansatz(capsys):
    t0 = time.perf_counter()
    schedules = {
        "gamma=1, mu=1, alpha=0": Schedule("constant", "constant", 0.0, gamma0=1.0),
        "critical, mu=e^-t, alpha=1": Schedule.critical(),
    }
    worst = {}
    for name, sched in schedules.items():
        worst[name] = float(np.max([np.abs(ansatz_coefficients(sched, t)) for t in default_times()]))
    ok = all(w < 1e-14 for w in worst.values())
    detail = ", ".join(f"{k}: {v:.1e}" for k, v in worst.items())
    assert report(capsys, 4, "ansatz coefficients vanish", ok, detail, time.perf_counter() - t0, 5)


def test_criterion_5_tables(capsys):
    t0 = time.perf_counter()
    entries = tables.all_entries((1, 2))
    bad = [e for e in entries if not e.passed]
    closed = np.max([e.rel_error for e in entries if e.path == "closed"])
    quad = np.max([e.rel_error for e in entries if e.path != "closed"])
    ok = not bad
    detail = f"{len(entries)} entries, {len(bad)} off; worst closed {closed:.1e}, worst quadrature {quad:.1e}"
    assert report(capsys, 5, "explicit tables", ok, detail, time.perf_counter() - t0, 60)


def test_criterion_6_bakry_emery_constant(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 6)
    worst = 0.0
    for _ in range(20):
        t = rng.uniform(0.05, 5.0)
        n = int(rng.integers(1, 4))
        gamma = rng.uniform(0.02, 0.98) * (1 + math.exp(t)) / 2
        q = 1 + math.exp(t)
        a = euclidean_constant(t, gamma, n)
        b = holder_constant_quadrature(q, gamma, n)
        worst = np.maximum(worst, abs(a - b) / b)
    eps, t = 0.1, 15.0
    sched = Schedule("subcritical", "exp_decay", 1.0, epsilon=eps)
    target = 2 * math.pi * (1 - eps) / eps
    scaled = [math.exp(-t) * euclidean_constant(t, sched.gamma(t), n) ** (4 / n) for n in (1, 2, 3)]
    asym = np.max([abs(x - target) / target for x in scaled])
    ok = worst <= 1e-8 and asym <= 0.01
    detail = f"20 triples worst rel gap {worst:.1e}; t=15 asymptotic rel gap {asym:.1e} (target {target:.4f})"
    assert report(capsys, 6, "Holder constant", ok, detail, time.perf_counter() - t0, 30)


def test_criterion_7_oracle_equivalence(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 7)
    m = make_model("euclidean", 1)
    worst, min_ratio = 0.0, math.inf
    for i in range(20):
        v = normalized_random_field(m, int(rng.integers(1, 7)), rng)
        for t in (0.5, 1.0):
            cmp = oracle_discrepancy(v, t)
            worst = np.maximum(worst, cmp.sup_error)
            min_ratio = np.minimum(min_ratio, cmp.ratio)
    ok = worst < 1e-3 and min_ratio >= 3
    detail = f"20 fields x 2 times: worst sup error {worst:.2e}, smallest refinement ratio {min_ratio:.2f}"
    assert report(capsys, 7, "spectral vs finite-difference oracle", ok, detail, time.perf_counter() - t0, 120)


def test_criterion_8_flow_and_schur(capsys):
    t0 = time.perf_counter()
    flow = 0.0
    for _, v in battery():
        for t in (0.5, 1.0, 3.0):
            flow = np.maximum(flow, flow_norm_identity(v, t).residual)

    rng = np.random.default_rng(SEED + 8)
    schur = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 4))
        schur = np.maximum(schur, schur_identity_residual(rng.uniform(-3, 3, n), rng.uniform(-3, 3, n), rng.uniform(0, 0.99)))

    const, var = 0.0, 0.0
    for tau in (0.0, 0.25, 0.5, 0.9):
        for n in (1, 2, 3):
            row = schur_row_constant(tau, n, rng.uniform(-3, 3, size=(20, n)))
            cx, _ = expected_row_constants(tau, n)
            const = np.maximum(const, abs(row.C_X - cx) / cx)
            var = np.maximum(var, row.x_variance)
    ok = flow < 1e-8 and schur < 1e-10 and const <= 1e-6 and var < 1e-16
    detail = (
        f"flow-norm residual {flow:.1e}, Schur identity {schur:.1e}, "
        f"row constant gap {const:.1e}, row variance {var:.1e}"
    )
    assert report(capsys, 8, "change of variables and Schur test", ok, detail, time.perf_counter() - t0, 60)


def test_criterion_9_negative_controls(capsys, tmp_path):
    t0 = time.perf_counter()
    pts = np.linspace(-3, 3, 25)[:, None]
    rep = check_identities(perturb_potential(make_model("euclidean", 1), 0.1), pts)
    residual = rep.max_residual
    with capsys.disabled():
        code = cli.run(["verify", "--config", str(CONFIGS / "negative_mu_constant.ini"), "--out", str(tmp_path)])
    ok = abs(residual - 0.1) < 1e-15 and code == cli.EXIT_VIOLATION
    detail = f"perturbed residual {residual!r}, mu=1 critical run exit code {code}"
    assert report(capsys, 9, "negative controls", ok, detail, time.perf_counter() - t0, 10)
