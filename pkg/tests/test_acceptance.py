"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line with the measured
quantities, then asserts.  The lines are repeated in the pytest terminal
summary (see ``conftest.py``), and ``python tests/test_acceptance.py`` runs the
suite standalone.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from oracles import (
    hankel1_0_oracle,
    penalized_normal_equations,
    random_system,
    tikhonov_normal_equations,
)
from specreg import FilterSpec, SingularSystem, apply_filtered_inverse_svd, filter_gain, filter_value, penalty_multiplier
from specreg.cli import main
from specreg.deconv import BoxKernel, Deconvolution
from specreg.experiments import DeconvSettings, IspSettings, run_deconv, run_isp
from specreg.isp import FrequencySet, assemble_joint, build_geometry
from specreg.numerics import bessel_j0, bessel_y0, hankel1_0

RESULTS: list[str] = []
FIXTURES = Path(__file__).parent / "fixtures"
TAUS = (0.0, 2.0, 10.0, 100.0)
SEEDS = range(10)
# (function, s_blur, noise_std)
DECONV_CASES = (("F1", 0.1, 0.05), ("F2", 0.1, 0.05), ("F3", 0.03, 0.075))


def _verdict(number: int, ok: bool, detail: str) -> bool:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    RESULTS.append(line)
    return ok


# -- 1 ---------------------------------------------------------------------


def test_criterion_1_filter_contracts():
    start = time.perf_counter()
    rng = np.random.default_rng(20240101)
    specs, per_spec = 200, 50  # 10^4 (tau, alpha, sigma) triples
    taus = rng.uniform(0, 200, specs)
    alphas = 10 ** rng.uniform(-8, 4, specs)
    a1 = a2 = a3 = 0
    for tau, alpha in zip(taus, alphas):
        sigma = 10 ** rng.uniform(-8, 4, per_spec)
        q = filter_value(FilterSpec(tau, alpha), sigma)
        # q > 0 is only representable while (sqrt(alpha)/sigma)^(2+tau) stays below the
        # double overflow threshold; past it the exact value is below the smallest double
        representable = (2 + tau) * (0.5 * math.log(alpha) - np.log(sigma)) < 700
        a1 += int(np.sum((q > 1) | (q < 0) | (representable & (q <= 0))))

        a2 += int(np.sum(filter_gain(FilterSpec(tau, alpha), sigma) > 1 / math.sqrt(alpha)))
        a2 += int(np.sum(filter_gain(FilterSpec(0, alpha), sigma) > 0.5 / math.sqrt(alpha)))

        # A3: q increases to 1 along alpha_k = alpha * 10^-16k
        path = np.array([filter_value(FilterSpec(tau, alpha * 10.0 ** -k), sigma) for k in range(0, 320, 16)])
        a3 += int(np.sum(np.any(np.diff(path, axis=0) < 0, axis=0) | (np.abs(path[-1] - 1) > 1e-12)))
    elapsed = time.perf_counter() - start
    ok = a1 == 0 and a2 == 0 and a3 == 0 and elapsed < 1.0
    detail = f"{specs * per_spec} triples, violations A1={a1} A2={a2} A3={a3}, {elapsed:.2f} s (< 1 s)"
    assert _verdict(1, ok, detail)


# -- 2 ---------------------------------------------------------------------


def test_criterion_2_tikhonov_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    worst_filter = 0.0
    for _ in range(20):
        alpha = 10 ** rng.uniform(-8, 4)
        sigma = 10 ** rng.uniform(-8, 4, 500)
        q = filter_value(FilterSpec(0, alpha), sigma)
        worst_filter = max(worst_filter, float(np.max(np.abs(q - sigma**2 / (alpha + sigma**2)))))
    worst_solve = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(n, 13))
        a = rng.standard_normal((m, n))
        g = rng.standard_normal(m)
        alpha = 10 ** rng.uniform(-3, 1)
        u, s, vt = np.linalg.svd(a, full_matrices=False)
        got = apply_filtered_inverse_svd(SingularSystem(s, u, vt.T, check=False), FilterSpec(0, alpha), g)
        want = tikhonov_normal_equations(a, g, alpha)
        worst_solve = max(worst_solve, float(np.linalg.norm(got - want) / np.linalg.norm(want)))
    elapsed = time.perf_counter() - start
    ok = worst_filter <= 1e-15 and worst_solve <= 1e-10 and elapsed < 1.0
    detail = (f"max |q0 - tikhonov| = {worst_filter:.2e} (<= 1e-15), "
              f"50 systems max rel = {worst_solve:.2e} (<= 1e-10), {elapsed:.2f} s (< 1 s)")
    assert _verdict(2, ok, detail)


# -- 3 ---------------------------------------------------------------------


def test_criterion_3_variational_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(11)
    worst = 0.0
    cases = 0
    for tau in (0, 1, 2, 5, 10):
        for _ in range(10):
            n = int(rng.integers(2, 8))
            m = int(rng.integers(n, 12))
            a = random_system(rng, m, n, 0.1, 3.0)
            g = rng.standard_normal(m)
            spec = FilterSpec(tau, 10 ** rng.uniform(-2, 0))
            u, s, vt = np.linalg.svd(a, full_matrices=False)
            h = (vt.T * penalty_multiplier(spec, s)) @ vt
            got = apply_filtered_inverse_svd(SingularSystem(s, u, vt.T), spec, g)
            want = penalized_normal_equations(a, g, h)
            worst = max(worst, float(np.linalg.norm(got - want) / np.linalg.norm(want)))
            cases += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 1.0
    assert _verdict(3, ok, f"{cases} systems, max rel = {worst:.2e} (<= 1e-10), {elapsed:.2f} s (< 1 s)")


# -- 4 and 5 ---------------------------------------------------------------


@pytest.fixture(scope="module")
def deconv_runs():
    start = time.perf_counter()
    runs = {}
    for fid, s_blur, noise in DECONV_CASES:
        for seed in SEEDS:
            settings = DeconvSettings(function=fid, s_blur=s_blur, noise_std=noise, seed=seed, taus=TAUS)
            runs[fid, seed] = run_deconv(settings)
    return runs, time.perf_counter() - start


def _mean_errors(runs, fid, rule):
    return {
        tau: float(np.mean([runs[fid, seed].report.get(tau, rule).relative_error for seed in SEEDS]))
        for tau in TAUS
    }


def test_criterion_4_deconvolution_trends(deconv_runs):
    runs, elapsed = deconv_runs
    opt = {fid: _mean_errors(runs, fid, "optimal") for fid, _, _ in DECONV_CASES}
    moz = {fid: _mean_errors(runs, fid, "morozov") for fid, _, _ in DECONV_CASES}
    a = opt["F1"][2.0] < opt["F1"][0.0] and opt["F3"][2.0] < opt["F3"][0.0]
    best_f2 = min(TAUS, key=lambda t: opt["F2"][t])
    b = best_f2 in (2.0, 10.0)
    c = all(moz[f][t] >= opt[f][t] for f in moz for t in TAUS)
    ok = a and b and c and elapsed < 120
    table = "; ".join(
        f"{f} opt " + "/".join(f"{opt[f][t]:.4f}" for t in TAUS)
        + " moz " + "/".join(f"{moz[f][t]:.4f}" for t in TAUS)
        for f in opt
    )
    detail = (f"(a) {'ok' if a else 'no'} (b) best F2 tau={best_f2:g} {'ok' if b else 'no'} "
              f"(c) {'ok' if c else 'no'}, {elapsed:.1f} s (< 120 s) | tau 0/2/10/100 means: {table}")
    assert _verdict(4, ok, detail)


def test_criterion_5_morozov_feasibility(deconv_runs):
    runs, _ = deconv_runs
    checked = infeasible = not_sup = 0
    for (fid, _), outcome in runs.items():
        s = outcome.settings
        problem = Deconvolution(outcome.noisy, BoxKernel(s.s_blur))
        threshold = 1.1 * s.noise_std * math.sqrt(s.n)
        for run in outcome.runs:
            if run.rule != "morozov":
                continue
            checked += 1
            spec = FilterSpec(run.tau, run.alpha)
            if problem.residual_norm(spec) > threshold:
                infeasible += 1
            if problem.residual_norm(spec.with_alpha(run.alpha * 1.01)) <= threshold:
                not_sup += 1
    ok = checked > 0 and infeasible == 0 and not_sup == 0
    detail = f"{checked} runs, residual above threshold: {infeasible}, still feasible at 1.01 alpha: {not_sup}"
    assert _verdict(5, ok, detail)


# -- 6 ---------------------------------------------------------------------


def test_criterion_6_special_functions():
    start = time.perf_counter()
    x = np.logspace(-3, 3, 1000)
    want = np.array([hankel1_0_oracle(v) for v in x])
    err = float(np.max(np.abs(hankel1_0(x) - want)))
    xs = np.linspace(0.5, 50, 2000)
    step = 1e-5
    dj = (bessel_j0(xs + step) - bessel_j0(xs - step)) / (2 * step)
    dy = (bessel_y0(xs + step) - bessel_y0(xs - step)) / (2 * step)
    wronskian = float(np.max(np.abs(dj * bessel_y0(xs) - bessel_j0(xs) * dy + 2 / (np.pi * xs))))
    elapsed = time.perf_counter() - start
    ok = err <= 1e-6 and wronskian <= 1e-5 and elapsed < 1.0
    detail = f"max |H0 - oracle| = {err:.2e} (<= 1e-6), Wronskian residual = {wronskian:.2e} (<= 1e-5), {elapsed:.2f} s (< 1 s)"
    assert _verdict(6, ok, detail)


# -- 7 ---------------------------------------------------------------------


def test_criterion_7_isp_reproduction():
    start = time.perf_counter()
    base = IspSettings(taus=(0.0, 3.0, 100.0), rules=("optimal",))
    geom = build_geometry(base.r0, base.r, base.cells_across, base.sensors)
    joint = assemble_joint(geom, FrequencySet.from_range(base.r0, base.j_min, base.j_max))
    votes, per_seed, sigma = 0, [], None
    for seed in range(5):
        outcome = run_isp(IspSettings(**{**base.__dict__, "seed": seed}), joint=joint)
        err = {t: outcome.report.get(t, "optimal").relative_error for t in base.taus}
        votes += err[3.0] <= err[0.0] and err[3.0] <= err[100.0]
        per_seed.append("/".join(f"{err[t]:.4f}" for t in base.taus))
        sigma = outcome.sigma
    span = float(sigma[0] / sigma[-1])
    elapsed = time.perf_counter() - start
    ok = votes >= 4 and span >= 1e6 and elapsed < 600
    detail = (f"tau=3 best in {votes}/5 seeds (need >= 4), sigma span {span:.2e} (>= 1e6), "
              f"{elapsed:.0f} s (< 600 s) | errors tau 0/3/100 per seed: {', '.join(per_seed)}")
    assert _verdict(7, ok, detail)


# -- 8 ---------------------------------------------------------------------


def test_criterion_8_determinism(tmp_path):
    start = time.perf_counter()
    cases = {"deconv_f1": "deconv1d", "deconv_f3": "deconv1d", "isp_small": "isp2d", "filters": "filters"}
    mismatched, compared = [], 0
    for name, command in cases.items():
        out = tmp_path / name
        main([command, "--config", str(FIXTURES / f"{name}.ini"), "--out", str(out)])
        for golden in sorted((FIXTURES / "golden" / name).glob("*.csv")):
            compared += 1
            fresh = out / golden.name
            if not fresh.exists() or fresh.read_bytes() != golden.read_bytes():
                mismatched.append(f"{name}/{golden.name}")
    elapsed = time.perf_counter() - start
    ok = not mismatched and elapsed < 60
    detail = f"{compared} golden CSVs, {len(mismatched)} differ {mismatched[:3]}, {elapsed:.1f} s (< 60 s)"
    assert _verdict(8, ok, detail)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
