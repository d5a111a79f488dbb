"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one pass/fail line.  Wall-clock budgets assume the stated
reference hardware (the census targets 8 worker threads); on smaller boxes
the budget scales by the missing parallelism.
"""

import os
import time

import numpy as np
import pytest

from fixture_config14 import A_REAL, GAMMA14, GAMMA_SNF, P_BLOCK, SKEW7, WITNESS_DIAG
from mukailift import (
    grassmann as gr,
    lifting,
    linalg,
    selfdual as sd,
    slicing,
)

RNG = np.random.default_rng(20240814)


def report(n, ok, detail):
    line = f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line, flush=True)
    from conftest import record_acceptance

    record_acceptance(line)
    assert ok, line


def test_criterion_1_golden_witness():
    t0 = time.perf_counter()
    lam = sd.self_dual_witness(GAMMA14)
    j = int(np.argmax(np.abs(WITNESS_DIAG)))
    scale = lam[j] / WITNESS_DIAG[j]
    prop_err = float(np.abs(lam - scale * WITNESS_DIAG).max())
    residual = sd.witness_residual(GAMMA14, lam)
    elapsed = time.perf_counter() - t0
    report(
        1,
        prop_err < 1e-8 and residual < 1e-10 and elapsed < 1.0,
        f"witness proportionality {prop_err:.2e}, residual {residual:.2e}, "
        f"{elapsed:.3f}s",
    )


def test_criterion_2_golden_normal_forms():
    t0 = time.perf_counter()
    cert = sd.orthogonal_normal_form(GAMMA14)
    # P up to even-parity column sign flips against the 4-decimal display
    flips = np.ones(7)
    p_err = 0.0
    for col in range(7):
        plus = np.abs(cert.p[:, col].real - P_BLOCK[:, col]).max()
        minus = np.abs(cert.p[:, col].real + P_BLOCK[:, col]).max()
        flips[col] = 1.0 if plus <= minus else -1.0
        p_err = max(p_err, min(plus, minus))
    parity_ok = float(np.prod(flips)) == 1.0
    ref_a = 1j * A_REAL
    j = np.unravel_index(np.argmax(np.abs(ref_a)), ref_a.shape)
    scalar = cert.a[j] / ref_a[j]
    a_err = float(np.abs(cert.a - scalar * ref_a).max() / np.abs(scalar))
    s_params, _ = sd.skew_normal_form(GAMMA14)
    s_err = float(np.abs(sd.skew_from_params(s_params) - SKEW7).max())
    rebuilt = sd.config_from_skew(sd.params_from_skew(SKEW7))
    snf_exact = bool(np.array_equal(np.round(rebuilt.real), GAMMA_SNF.real)
                     and np.abs(rebuilt.imag).max() == 0.0)
    elapsed = time.perf_counter() - t0
    report(
        2,
        p_err < 1e-3 and parity_ok and a_err < 1e-3 and s_err < 1e-3
        and snf_exact and elapsed < 1.0,
        f"P err {p_err:.2e} (parity {'even' if parity_ok else 'odd'}), "
        f"A err {a_err:.2e}, S err {s_err:.2e}, integer rebuild "
        f"{'exact' if snf_exact else 'off'}, {elapsed:.3f}s",
    )


def test_criterion_3_fifty_complex_slices():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2718)
    start = slicing.prepare_start(rng)
    worst_relation = 0.0
    worst_witness = 0.0
    for _ in range(50):
        a_target = rng.standard_normal((8, 15)) + 1j * rng.standard_normal((8, 15))
        res = slicing.slice_section(a_target, start=start, rng=rng)
        worst_relation = max(worst_relation, res.max_relation_residual)
        worst_witness = max(worst_witness, res.witness_residual)
        dists = np.linalg.norm(
            res.chart_points[:, None] - res.chart_points[None, :], axis=2
        ) + np.eye(14)
        assert dists.min() > 1e-6
    elapsed = time.perf_counter() - t0
    report(
        3,
        worst_relation < 1e-10 and worst_witness < 1e-9 and elapsed < 120.0,
        f"50/50 sections gave 14 distinct self-dual points, relation residual "
        f"<= {worst_relation:.2e}, witness residual <= {worst_witness:.2e}, "
        f"{elapsed:.1f}s",
    )


TABLE_PROPORTIONS = {0: 0.0178, 2: 0.2278, 4: 0.4080, 6: 0.2547, 8: 0.0790}


def test_criterion_4_census_desk_scale():
    t0 = time.perf_counter()
    samples = 10_000
    table = slicing.census(samples, seed=1)
    elapsed = time.perf_counter() - t0
    cores = os.cpu_count() or 1
    budget = 900.0 * max(1.0, 8.0 / min(8, cores))
    props = table.histogram / samples
    sigmas = {}
    for k, ref in TABLE_PROPORTIONS.items():
        sigma = np.sqrt(ref * (1.0 - ref) / samples)
        sigmas[k] = abs(props[k] - ref) / sigma
    odd_zero = int(table.histogram[1::2].sum()) == 0
    ok = (
        max(sigmas.values()) <= 3.0
        and odd_zero
        and table.failures <= 5
        and elapsed < budget
    )
    detail = ", ".join(
        f"bin{k}={props[k]:.4f} ({sigmas[k]:.2f} sigma)" for k in sorted(sigmas)
    )
    report(
        4,
        ok,
        f"{detail}, odd bins {'empty' if odd_zero else 'POPULATED'}, "
        f"failures {table.failures}, {elapsed:.0f}s (budget {budget:.0f}s "
        f"on {cores} cores)",
    )


def test_criterion_5_identity_lift():
    t0 = time.perf_counter()
    problem, gamma_start, _ = lifting.make_start_pair(seed=21)
    out = lifting.lift(gamma_start, problem, seed=22)
    norm_ell = float(np.linalg.norm(out.ell))
    elapsed = time.perf_counter() - t0
    report(
        5,
        norm_ell < 1e-8 and elapsed < 60.0,
        f"|ell| = {norm_ell:.2e} lifting the start configuration, {elapsed:.1f}s",
    )


@pytest.mark.nightly
def test_criterion_6_round_trip():
    t0 = time.perf_counter()
    rng = np.random.default_rng(31415)
    a_target = rng.standard_normal((8, 15)) + 1j * rng.standard_normal((8, 15))
    gamma = slicing.slice_section(a_target, rng=rng).gamma
    problem, _, _ = lifting.make_start_pair(seed=23)
    out = lifting.lift(gamma, problem, seed=24)
    report_data = lifting.verify_lift(gamma, out.l_hat)
    elapsed = time.perf_counter() - t0
    report(
        6,
        report_data.max_residual < 1e-8 and report_data.rank == 7
        and elapsed < 3600.0,
        f"slice -> lift round trip residual {report_data.max_residual:.2e}, "
        f"rank {report_data.rank}, {elapsed:.0f}s",
    )


@pytest.mark.nightly
def test_criterion_7_golden_lift():
    t0 = time.perf_counter()
    problem, _, _ = lifting.make_start_pair(seed=25)
    out = lifting.lift(GAMMA14, problem, seed=26)
    elapsed = time.perf_counter() - t0
    report(
        7,
        out.max_plucker_residual < 1e-8,
        f"integer configuration lifted with residual "
        f"{out.max_plucker_residual:.2e} (reference headroom 1.28e-11), "
        f"{elapsed:.0f}s",
    )


def test_criterion_8_property_battery(slice_start):
    t0 = time.perf_counter()
    failures = []

    # Cayley involution
    for _ in range(20):
        m = RNG.standard_normal((7, 7)) + 1j * RNG.standard_normal((7, 7))
        m *= 0.45 / max(1.0, np.abs(m).max())
        if np.abs(sd.cayley(sd.cayley(m)) - m).max() >= 1e-10:
            failures.append("cayley involution")
            break

    # Gale double transform
    for _ in range(20):
        g = RNG.standard_normal((7, 14)) + 1j * RNG.standard_normal((7, 14))
        ok, _ = sd.projective_equivalent(sd.gale_transform(sd.gale_transform(g)), g)
        if not ok:
            failures.append("gale involution")
            break

    # Orthogonal normal form certificate identities
    for _ in range(5):
        g = sd.config_from_skew(RNG.standard_normal(21) + 1j * RNG.standard_normal(21))
        cert = sd.orthogonal_normal_form(g)
        eye = np.eye(7)
        lhs = cert.a @ np.concatenate([eye, cert.p], axis=1)
        rhs = g * cert.lambda_scale
        if np.abs(lhs - rhs).max() >= 1e-9 * np.abs(g).max():
            failures.append("onf certificate")
        if np.abs(cert.p @ cert.p.T - eye).max() >= 1e-9:
            failures.append("onf orthogonality")
        if abs(linalg.lu_det(cert.p) - 1.0) >= 1e-9:
            failures.append("onf determinant")

    # Jacobians versus central finite differences (1e-6 relative)
    h = 1e-5

    def fd_ok(fun, jac, x, rel=1e-6):
        n = len(x)
        cols = []
        for i in range(n):
            e = np.zeros(n, dtype=complex)
            e[i] = h
            cols.append((fun(x + e) - fun(x - e)) / (2 * h))
        fd = np.array(cols).T
        return np.abs(jac - fd).max() < rel * max(1.0, np.abs(jac).max())

    t = RNG.standard_normal(8) + 1j * RNG.standard_normal(8)
    u0 = 0.6 + 0.3j
    jt, ju = gr.pluecker_embed_jacobian(t, u0)
    if not fd_ok(lambda v: gr.pluecker_embed_u(v, u0), jt, t):
        failures.append("embedding jacobian")
    p = RNG.standard_normal(15) + 1j * RNG.standard_normal(15)
    if not fd_ok(gr.pluecker_relations, gr.pluecker_relations_jacobian(p), p):
        failures.append("relations jacobian")

    a_sec = RNG.standard_normal((8, 15)) + 1j * RNG.standard_normal((8, 15))
    sys_slice = slicing.SlicingSystem()
    params = slicing.pack_params(u0, a_sec)
    _, jx, _ = sys_slice.evaluate(t, params)
    if not fd_ok(lambda v: sys_slice.evaluate(v, params)[0], jx, t):
        failures.append("slicing jacobian")

    problem = lifting.LiftProblem(
        l_start=RNG.standard_normal((15, 7)) + 1j * RNG.standard_normal((15, 7)),
        directions=RNG.standard_normal((69, 15, 7))
        + 1j * RNG.standard_normal((69, 15, 7)),
        s_start=RNG.standard_normal(21) + 1j * RNG.standard_normal(21),
    )
    sys_lift = lifting.LiftSystem(problem)
    ell = 0.2 * (RNG.standard_normal(69) + 1j * RNG.standard_normal(69))
    _, j_ell, j_s = sys_lift.evaluate(ell, problem.s_start)
    for i in RNG.choice(69, 4, replace=False):
        e = np.zeros(69, dtype=complex)
        e[i] = h
        fd = (
            sys_lift.evaluate(ell + e, problem.s_start)[0]
            - sys_lift.evaluate(ell - e, problem.s_start)[0]
        ) / (2 * h)
        if np.abs(j_ell[:, i] - fd).max() >= 1e-6 * max(1.0, np.abs(j_ell).max()):
            failures.append("lifting jacobian")
            break

    # bit-identical u = 1 specialization; u = 0 single monomials
    for _ in range(5):
        tt = RNG.standard_normal(8) + 1j * RNG.standard_normal(8)
        if not np.array_equal(gr.pluecker_embed(tt), gr.pluecker_embed_u(tt, 1.0)):
            failures.append("u=1 specialization")
            break
    tt = RNG.standard_normal(8) + 1j * RNG.standard_normal(8)
    p0 = gr.pluecker_embed_u(tt, 0.0)
    row1 = np.array([1, 0, tt[0], tt[1], tt[2], tt[3]], dtype=complex)
    row2 = np.array([0, 1, tt[4], tt[5], tt[6], tt[7]], dtype=complex)
    for k, (a, b) in enumerate(gr.PAIRS):
        expected = (
            row1[a - 1] * row2[b - 1] if a != 2 else -row1[b - 1] * row2[a - 1]
        )
        if abs(p0[k] - expected) >= 1e-12:
            failures.append("u=0 monomials")
            break

    # conjugation symmetry for a real section
    a_real = RNG.standard_normal((8, 15)).astype(complex)
    res = slicing.slice_section(a_real, start=slice_start)
    pts = res.chart_points
    d = np.linalg.norm(pts.conj()[:, None] - pts[None, :], axis=2)
    if d.min(axis=1).max() >= 1e-8:
        failures.append("conjugation symmetry")

    elapsed = time.perf_counter() - t0
    report(
        8,
        not failures and elapsed < 60.0,
        f"property battery clean, {elapsed:.1f}s"
        if not failures
        else f"failing: {sorted(set(failures))}",
    )
