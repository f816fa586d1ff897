"""Experiment runners shared by the CLI and the acceptance tests."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .deconv import (
    BoxKernel,
    Deconvolution,
    Signal1D,
    make_test_function,
    relative_error,
    synthesize_measurement,
)
from .errors import ContractError
from .filters import FilterSpec, filter_value
from .isp import (
    FrequencySet,
    assemble_joint,
    build_geometry,
    make_ground_truth,
    measurement_noise_std,
    reconstruct_source,
    spectrum_report,
)
from .numerics import gaussian_noise
from .paramselect import MorozovConfig, SweepConfig, morozov_alpha, optimal_alpha
from .reports import ExperimentReport, ReportRow, fmt

RULES = ("morozov", "optimal")


def parse_rule(rule: str) -> tuple[str, float | None]:
    """``"morozov"``, ``"optimal"`` or ``"fixed:<alpha>"``."""
    rule = rule.strip()
    if rule in RULES:
        return rule, None
    if rule.startswith("fixed:"):
        try:
            value = float(rule.split(":", 1)[1])
        except ValueError:
            raise ContractError(f"bad fixed rule {rule!r}") from None
        if not (value > 0 and math.isfinite(value)):
            raise ContractError(f"fixed alpha must be positive, got {rule!r}")
        return "fixed", value
    raise ContractError(f"unknown alpha rule {rule!r}; expected morozov, optimal or fixed:<alpha>")


@dataclass
class FilterSettings:
    alphas: tuple[float, ...] = (0.005, 0.05)
    taus: tuple[float, ...] = (0.0, 2.0, 10.0, 100.0)
    sigma_min: float = 1e-3
    sigma_max: float = 10.0
    points: int = 401


@dataclass
class DeconvSettings:
    function: str = "F1"
    n: int = 1001
    s_blur: float = 0.1
    noise_std: float = 0.05
    seed: int = 0
    taus: tuple[float, ...] = (0.0, 2.0, 10.0, 100.0)
    rules: tuple[str, ...] = RULES
    oversample: int = 10
    safety: float = 1.1
    alpha_lo: float = 1e-8
    alpha_hi: float = 10.0
    tol: float = 1e-3
    sweep_min: float = 1e-8
    sweep_max: float = 10.0
    sweep_points: int = 200


@dataclass
class IspSettings:
    r0: float = 0.99
    r: float = 1.0
    cells_across: int = 48
    sensors: int = 128
    j_min: int = 2
    j_max: int = 30
    noise_ratio: float = 0.01
    seed: int = 0
    taus: tuple[float, ...] = (0.0, 3.0, 100.0)
    rules: tuple[str, ...] = ("optimal",)
    safety: float = 1.1
    tol: float = 1e-3
    # alpha ranges are relative to sigma_1 ** 2 of the joint operator
    rel_alpha_min: float = 1e-14
    rel_alpha_max: float = 1.0
    sweep_points: int = 200


def config_hash(settings) -> str:
    payload = json.dumps(asdict(settings), sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()


def provenance(settings) -> dict:
    return {
        "config_hash": config_hash(settings),
        "seed": getattr(settings, "seed", None),
        "code_version": __version__,
    }


def _run_tasks(fn, tasks, jobs):
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


@dataclass
class RunResult:
    tau: float
    rule: str
    alpha: float
    error: float
    reconstruction: np.ndarray
    trace: list = field(default_factory=list)
    saturated: bool = False


# -- filter curves -----------------------------------------------------------


def filter_curves(settings: FilterSettings) -> list[tuple[float, float, float, float]]:
    """Rows ``(sigma, tau, alpha, q)`` on a log grid of sigma, alpha-major then tau."""
    sigmas = np.logspace(math.log10(settings.sigma_min), math.log10(settings.sigma_max), settings.points)
    rows = []
    for alpha in settings.alphas:
        for tau in settings.taus:
            q = filter_value(FilterSpec(tau, alpha), sigmas)
            rows.extend(zip(sigmas.tolist(), [tau] * sigmas.size, [alpha] * sigmas.size, q.tolist()))
    return rows


def write_filter_curves(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sigma", "tau", "alpha", "q"])
        for row in rows:
            writer.writerow([fmt(v) for v in row])


# -- 1D deconvolution --------------------------------------------------------


@dataclass
class DeconvOutcome:
    settings: DeconvSettings
    truth: Signal1D
    clean: Signal1D
    noisy: Signal1D
    runs: list[RunResult]
    report: ExperimentReport


def run_deconv(settings: DeconvSettings, jobs: int = 1) -> DeconvOutcome:
    """Synthesize one noisy measurement and reconstruct it for every (tau, rule)."""
    rules = [parse_rule(r) for r in settings.rules]
    tf = make_test_function(settings.function)
    kernel = BoxKernel(settings.s_blur)
    clean, noisy = synthesize_measurement(
        tf, kernel, settings.n, settings.noise_std, settings.seed, settings.oversample
    )
    truth = tf.sample(noisy.grid)
    problem = Deconvolution(noisy, kernel)
    sweep = SweepConfig.logspace(settings.sweep_min, settings.sweep_max, settings.sweep_points)

    def task(item):
        tau, (rule, fixed) = item
        base = FilterSpec(tau, 1.0)
        trace, saturated = [], False
        if rule == "morozov":
            cfg = MorozovConfig(
                settings.noise_std, settings.n, settings.safety,
                (settings.alpha_lo, settings.alpha_hi), settings.tol,
            )
            result = morozov_alpha(lambda a: problem.residual_norm(base.with_alpha(a)), cfg)
            alpha, trace, saturated = result.alpha, result.trace, result.saturated
        elif rule == "optimal":
            alpha, _ = optimal_alpha(
                lambda a: problem.relative_error(base.with_alpha(a), truth), sweep, trace
            )
        else:
            alpha = fixed
        recon = problem.reconstruct(base.with_alpha(alpha))
        label = rule if fixed is None else f"fixed:{fmt(fixed)}"
        return RunResult(tau, label, alpha, relative_error(recon, truth), recon.values, trace, saturated)

    tasks = [(float(tau), rule) for tau in settings.taus for rule in rules]
    runs = _run_tasks(task, tasks, jobs)
    report = ExperimentReport(
        [ReportRow(r.tau, r.rule, r.alpha, r.error) for r in runs], provenance(settings)
    )
    return DeconvOutcome(settings, truth, clean, noisy, runs, report)


def _tag(run: RunResult) -> str:
    return f"tau{fmt(run.tau)}_{run.rule.replace(':', '-')}"


def write_deconv(outcome: DeconvOutcome, out: Path, trace: bool = False) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    s = outcome.settings
    written = [out / "report.csv"]
    outcome.report.to_csv(written[0])
    x = outcome.truth.grid.points
    for run in outcome.runs:
        path = out / f"signal_{s.function}_{_tag(run)}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x", "truth", "measurement_noisy", "reconstruction"])
            for row in zip(x, outcome.truth.values, outcome.noisy.values, run.reconstruction):
                writer.writerow([fmt(v) for v in row])
        written.append(path)
        if trace and run.trace:
            written.append(_write_trace(run, out / f"trace_{s.function}_{_tag(run)}.csv"))
    meta = {
        "experiment": "deconv1d",
        "settings": asdict(s),
        "provenance": outcome.report.provenance,
        "runs": [
            {"tau": r.tau, "rule": r.rule, "alpha": r.alpha, "relative_error": r.error,
             "bracket_saturated": r.saturated}
            for r in outcome.runs
        ],
    }
    written.append(_write_json(meta, out / "metadata.json"))
    return written


def _write_trace(run: RunResult, path: Path) -> Path:
    column = "residual" if run.rule == "morozov" else "relative_error"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["alpha", column])
        for a, v in run.trace:
            writer.writerow([fmt(a), fmt(v)])
    return path


def _write_json(payload, path: Path) -> Path:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# -- inverse source problem --------------------------------------------------


@dataclass
class IspOutcome:
    settings: IspSettings
    centers: np.ndarray
    truth: np.ndarray
    data: np.ndarray
    noise_std: float
    sigma: np.ndarray
    projection: np.ndarray
    runs: list[RunResult]
    report: ExperimentReport


def isp_residual_norm(system, data, spec: FilterSpec) -> float:
    """``||A s_alpha - b||_2`` evaluated in the singular basis."""
    c = system.left.T @ data
    outside = max(float(data @ data - c @ c), 0.0)
    q = np.asarray(filter_value(spec, system.sigma))
    return math.sqrt(float(np.sum(((1.0 - q) * c) ** 2)) + outside)


def run_isp(settings: IspSettings, jobs: int = 1, joint=None) -> IspOutcome:
    """Noisy multi-frequency data from the synthetic source, filtered reconstructions per (tau, rule).

    ``joint`` may carry a prebuilt operator for the same geometry to reuse its SVD.
    """
    rules = [parse_rule(r) for r in settings.rules]
    geom = build_geometry(settings.r0, settings.r, settings.cells_across, settings.sensors)
    if joint is None:
        freqs = FrequencySet.from_range(settings.r0, settings.j_min, settings.j_max)
        joint = assemble_joint(geom, freqs)
    truth = make_ground_truth(geom).values
    exact = joint.apply(truth)
    noise_std = measurement_noise_std(exact, settings.noise_ratio)
    data = exact + gaussian_noise(exact.size, noise_std, settings.seed) if noise_std > 0 else exact
    system = joint.system
    scale = float(system.sigma[0]) ** 2
    sweep = SweepConfig.logspace(
        scale * settings.rel_alpha_min, scale * settings.rel_alpha_max, settings.sweep_points
    )
    truth_norm = float(np.linalg.norm(truth))

    def task(item):
        tau, (rule, fixed) = item
        base = FilterSpec(tau, 1.0)
        trace, saturated = [], False
        if rule == "morozov":
            cfg = MorozovConfig(
                noise_std, data.size, settings.safety,
                (scale * settings.rel_alpha_min, scale * settings.rel_alpha_max), settings.tol,
            )
            result = morozov_alpha(lambda a: isp_residual_norm(system, data, base.with_alpha(a)), cfg)
            alpha, trace, saturated = result.alpha, result.trace, result.saturated
        elif rule == "optimal":
            alpha, _ = optimal_alpha(
                lambda a: float(np.linalg.norm(
                    reconstruct_source(joint, data, base.with_alpha(a)).values - truth
                )) / truth_norm,
                sweep, trace,
            )
        else:
            alpha = fixed
        recon = reconstruct_source(joint, data, base.with_alpha(alpha)).values
        err = float(np.linalg.norm(recon - truth)) / truth_norm
        label = rule if fixed is None else f"fixed:{fmt(fixed)}"
        return RunResult(tau, label, alpha, err, recon, trace, saturated)

    tasks = [(float(tau), rule) for tau in settings.taus for rule in rules]
    runs = _run_tasks(task, tasks, jobs)
    spectrum = spectrum_report(system, truth)
    report = ExperimentReport(
        [ReportRow(r.tau, r.rule, r.alpha, r.error) for r in runs], provenance(settings)
    )
    return IspOutcome(
        settings, geom.centers, truth, data, noise_std,
        spectrum.sigma, spectrum.projection, runs, report,
    )


def write_isp(outcome: IspOutcome, out: Path, trace: bool = False) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "report.csv", out / "spectrum.csv"]
    outcome.report.to_csv(written[0])
    with open(written[1], "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "sigma", "projection"])
        for i, (s, p) in enumerate(zip(outcome.sigma, outcome.projection), start=1):
            writer.writerow([i, fmt(s), fmt(p)])
    fields = [("truth", outcome.truth)] + [(_tag(r), r.reconstruction) for r in outcome.runs]
    for name, values in fields:
        path = out / f"field_{name}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x", "y", "value"])
            for (x, y), v in zip(outcome.centers, values):
                writer.writerow([fmt(x), fmt(y), fmt(v)])
        written.append(path)
    if trace:
        written.extend(
            _write_trace(r, out / f"trace_{_tag(r)}.csv") for r in outcome.runs if r.trace
        )
    s = outcome.settings
    meta = {
        "experiment": "isp2d",
        "settings": asdict(s),
        "provenance": outcome.report.provenance,
        "geometry": {"r0": s.r0, "r": s.r, "cells": int(outcome.centers.shape[0]),
                     "sensors": s.sensors, "cells_across": s.cells_across},
        "wavenumbers": (np.arange(s.j_min, s.j_max + 1) * math.pi / s.r0).tolist(),
        "noise": {"ratio": s.noise_ratio, "stddev": outcome.noise_std, "seed": s.seed},
        "runs": [
            {"tau": r.tau, "rule": r.rule, "alpha": r.alpha, "relative_error": r.error,
             "bracket_saturated": r.saturated}
            for r in outcome.runs
        ],
    }
    written.append(_write_json(meta, out / "metadata.json"))
    return written
