"""End-to-end acceptance suite.

Each test prints a single PASS/FAIL line (visible because capture is off) and
then asserts, so a red run still reports every criterion's verdict.
"""

import time

import numpy as np
import pytest

from crossres.actions import _power_integral, sqrt_integral
from crossres.harness import ExperimentConfig, convergence_fit, ecs_resonances, \
    run_compare, wronskian_resonances
from crossres.microlocal import monodromy_residual, width_from_green
from crossres.model import CouplingSpec, PotentialSpec, ProblemSpec
from crossres.oracle import build_contour, discretize, resonances_in_window
from crossres.semiclassics import bohr_grid, predict, width_coefficient, \
    width_zero_loci


def _report(num: int, ok: bool, detail: str):
    print(f"\n[criterion {num}] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_1_quadrature_closed_forms():
    V = PotentialSpec("polynomial", {"coeffs": [0.0, 0.0, 1.0]})
    t0 = time.time()
    worst_A = worst_dA = 0.0
    for E in (0.5, 1.0, 2.0):
        r = np.sqrt(E)
        A = sqrt_integral(V, -r, r, E, True, True)
        dA = 0.5 * _power_integral(V, -r, r, E, -0.5, True, True)
        worst_A = max(worst_A, abs(A - np.pi * E / 2))
        worst_dA = max(worst_dA, abs(dA - np.pi / 2))
    elapsed = time.time() - t0
    ok = worst_A < 1e-10 and worst_dA < 1e-9 and elapsed < 1.0
    _report(1, ok, f"|A err|={worst_A:.2e} (<1e-10), "
                   f"|dA/dE err|={worst_dA:.2e} (<1e-9), {elapsed:.2f}s (<1s)")


def test_criterion_2_width_consistency_identity(reference_problem):
    rng = np.random.default_rng(20240824)
    t0 = time.time()
    worst = 0.0
    for _ in range(200):
        E = 0.9 + 0.2 * rng.random()
        h = 0.005 + 0.095 * rng.random()
        r0, r1 = 0.0, 0.0
        while r0 == 0.0 and r1 == 0.0:
            r0, r1 = rng.uniform(-2, 2, 2)
        p = reference_problem.with_coupling(CouplingSpec.constant(r0, r1))
        C = width_coefficient(p, E, h)
        w = width_from_green(p, E, h)
        worst = max(worst, abs(w - C * h * h) / (C * h * h + 1e-30))
    elapsed = time.time() - t0
    ok = worst < 1e-10 and elapsed < 10.0
    _report(2, ok, f"200 draws, worst rel err={worst:.2e} (<1e-10), "
                   f"{elapsed:.1f}s (<10s)")


def test_criterion_3_decoupled_realness_and_slope(reference_problem):
    prob = reference_problem.with_coupling(
        CouplingSpec.constant(0.0, 0.0, allow_degenerate=True))
    cfg = ExperimentConfig(problem=prob, h_values=[0.08, 0.04, 0.02],
                           N=8192, theta_values=[0.3], degenerate=True)
    rows = run_compare(cfg, methods=("ecs",))
    worst_im = max(abs(r.orc_im) for r in rows)
    fit = convergence_fit(rows)
    ok = worst_im < 1e-8 and fit["slope_re"] >= 1.8
    _report(3, ok, f"max|Im E|={worst_im:.2e} (<1e-8), "
                   f"slope_re={fit['slope_re']:.3f} (>=1.8), {len(rows)} rows")


def test_criterion_4_coupled_width_reproduction(reference_problem):
    cfg = ExperimentConfig(problem=reference_problem,
                           h_values=[0.08, 0.04, 0.02, 0.01],
                           N=16384, theta_values=[0.3])
    rows = run_compare(cfg, methods=("ecs",))
    fit = convergence_fit(rows)
    finest = [r for r in rows if r.h == 0.01]
    Cmax = max(r.C for r in finest)
    ratios = [(-r.orc_im / r.h ** 2 / r.C) for r in finest if r.C > 0.1 * Cmax]
    ratio_ok = all(abs(q - 1.0) <= 0.15 for q in ratios)
    ok = ratio_ok and fit["slope_im"] >= 2.1
    _report(4, ok,
            f"h=0.01 ratios in [{min(ratios):.3f}, {max(ratios):.3f}] "
            f"(within 15%), slope_im={fit['slope_im']:.3f} (>=2.1)")


def test_criterion_5_vanishing_width_dip(reference_problem):
    h = 0.02
    # wider window: whether a quantization point lands on a width-zero locus
    # is a coincidence of the two action integrals, so scan a larger range
    prob = ProblemSpec(reference_problem.V1, reference_problem.V2,
                       CouplingSpec.constant(1.0, 0.0), E0=1.0, delta0=0.2,
                       C0=1.0, theta=0.3, x_infty=3.0,
                       box=reference_problem.box)
    loci = width_zero_loci(prob, h)
    preds = predict(prob, h)
    # the locus with the closest quantization point
    best = min(((min(abs(p.e_k - L) for L in loci), p) for p in preds),
               key=lambda t: t[0])
    E_star_dist, target = best
    cfg = ExperimentConfig(problem=prob, h_values=[h], N=16384,
                           theta_values=[0.3, 0.35])
    found = ecs_resonances(cfg, h)
    width = {}
    for p in preds:
        near = min(found, key=lambda r: abs(r.E.real - p.e_k))
        if abs(near.E.real - p.e_k) < 0.01:
            width[p.k] = -near.E.imag
    neighbors = [width[target.k - 1], width[target.k + 1]]
    ratio = width[target.k] / np.median(neighbors)
    ok = ratio <= 0.15
    _report(5, ok, f"E*~{target.e_k:.4f} (locus offset {E_star_dist:.1e}), "
                   f"width ratio to k-neighbors={ratio:.3f} (<=0.15)")


def test_criterion_6_dual_oracle_agreement(reference_config):
    h = 0.05
    cfg = ExperimentConfig(problem=reference_config.problem, h_values=[h],
                           N=8192, theta_values=[0.3, 0.35])
    t0 = time.time()
    ecs = ecs_resonances(cfg, h)
    wro = wronskian_resonances(cfg, h)
    elapsed = time.time() - t0
    worst = 0.0
    ok = bool(ecs) and len(ecs) == len(wro)
    for a in ecs:
        d = min(abs(a.E - b.E) for b in wro)
        worst = max(worst, d)
    for b in wro:
        d = min(abs(a.E - b.E) for a in ecs)
        worst = max(worst, d)
    ok = ok and worst < 1e-4 and elapsed < 300
    _report(6, ok, f"{len(ecs)} ECS vs {len(wro)} Wronskian roots, "
                   f"worst |dE|={worst:.2e} (<1e-4), {elapsed:.0f}s (<300s)")


def test_criterion_7_monodromy_residual(reference_problem):
    t0 = time.time()
    worst = 0.0
    n = 0
    for h in (0.05, 0.02):
        for k, e_k in bohr_grid(reference_problem, h):
            worst = max(worst, abs(monodromy_residual(reference_problem, e_k, h)))
            n += 1
    elapsed = time.time() - t0
    ok = worst < 1e-9 and elapsed < 1.0
    _report(7, ok, f"{n} grid points, worst residual={worst:.2e} (<1e-9), "
                   f"{elapsed:.2f}s (<1s)")


def test_criterion_8_theta_stability(reference_problem):
    h = 0.04
    per_theta = []
    for theta in (0.3, 0.35):
        p = ProblemSpec(reference_problem.V1, reference_problem.V2,
                        reference_problem.coupling, E0=1.0, delta0=0.1,
                        C0=1.0, theta=theta, x_infty=3.0,
                        box=reference_problem.box)
        contour = build_contour(p)
        op = discretize(p, contour, 16384, h)
        found = resonances_in_window(op, 1.0, 0.105, k=16)
        found = [r for r in found if abs(r.E.real - 1.0) <= 0.1
                 and -h <= r.E.imag <= 1e-7]
        per_theta.append(sorted(found, key=lambda r: r.E.real))
    ok = len(per_theta[0]) == len(per_theta[1]) and len(per_theta[0]) > 0
    worst = max((abs(a.E - b.E) for a, b in zip(*per_theta)), default=np.inf)
    ok = ok and worst < 1e-6
    _report(8, ok, f"{len(per_theta[0])} resonances, "
                   f"worst |E(0.3)-E(0.35)|={worst:.2e} (<1e-6)")
