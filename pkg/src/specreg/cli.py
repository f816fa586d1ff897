"""Command-line runner: ``specreg {filters,deconv1d,isp2d,compare}``.

Experiments are configured by an INI file.  Every key is optional and falls
back to the defaults in :mod:`specreg.experiments`::

    [experiment]
    function = F1          ; F1 | F2 | F3
    n = 1001
    s_blur = 0.1
    noise_std = 0.05
    seed = 0
    taus = 0, 2, 10, 100
    rules = morozov, optimal   ; or fixed:<alpha>
    oversample = 10
    out = runs/f1

    [morozov]
    safety = 1.1
    alpha_lo = 1e-8
    alpha_hi = 10
    tol = 1e-3

    [sweep]
    min = 1e-8
    max = 10
    points = 200

    [isp]
    r0 = 0.99
    r = 1.0
    cells_across = 48
    sensors = 128
    j_min = 2
    j_max = 30
    noise_ratio = 0.01
    rel_alpha_min = 1e-14   ; sweep range relative to sigma_1^2
    rel_alpha_max = 1
    sweep_points = 200

    [filters]
    alphas = 0.005, 0.05
    taus = 0, 2, 10, 100
    sigma_min = 1e-3
    sigma_max = 10
    points = 401

For ``isp2d`` the ``[experiment]`` keys ``seed``, ``taus`` and ``rules`` apply
as well.  ``[sweep]`` points also sets the ISP sweep length unless
``[isp] sweep_points`` is given.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
import time
import traceback
from dataclasses import replace
from pathlib import Path

from . import __version__
from .errors import SpecregError
from .experiments import (
    DeconvSettings,
    FilterSettings,
    IspSettings,
    filter_curves,
    parse_rule,
    run_deconv,
    run_isp,
    write_deconv,
    write_filter_curves,
    write_isp,
)
from .reports import ExperimentReport, compare_reports

EXIT_CONFIG = 2
EXIT_NUMERICAL = 1

SCHEMA = {
    "experiment": {"kind", "function", "n", "s_blur", "noise_std", "seed", "taus", "rules", "oversample", "out"},
    "morozov": {"safety", "alpha_lo", "alpha_hi", "tol"},
    "sweep": {"min", "max", "points"},
    "isp": {"r0", "r", "cells_across", "sensors", "j_min", "j_max", "noise_ratio",
            "rel_alpha_min", "rel_alpha_max", "sweep_points"},
    "filters": {"alphas", "taus", "sigma_min", "sigma_max", "points"},
}


class ConfigError(Exception):
    def __init__(self, section: str, key: str, message: str):
        super().__init__(f"[{section}] {key}: {message}")


class _Reader:
    """Typed, range-checked access to one parsed config file."""

    def __init__(self, parser: configparser.ConfigParser):
        self.parser = parser

    def _raw(self, section, key):
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        return None

    def real(self, section, key, default, *, positive=False, nonneg=False):
        raw = self._raw(section, key)
        if raw is None:
            return default
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(section, key, f"expected a number, got {raw!r}") from None
        if not math.isfinite(value):
            raise ConfigError(section, key, f"must be finite, got {raw!r}")
        if positive and value <= 0:
            raise ConfigError(section, key, f"must be positive, got {raw!r}")
        if nonneg and value < 0:
            raise ConfigError(section, key, f"must be nonnegative, got {raw!r}")
        return value

    def count(self, section, key, default, *, minimum=1):
        raw = self._raw(section, key)
        if raw is None:
            return default
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(section, key, f"expected an integer, got {raw!r}") from None
        if value < minimum:
            raise ConfigError(section, key, f"must be at least {minimum}, got {raw!r}")
        return value

    def reals(self, section, key, default, *, positive=False):
        raw = self._raw(section, key)
        if raw is None:
            return default
        items = [s.strip() for s in raw.split(",") if s.strip()]
        if not items:
            raise ConfigError(section, key, "list must not be empty")
        values = []
        for item in items:
            try:
                v = float(item)
            except ValueError:
                raise ConfigError(section, key, f"expected numbers, got {item!r}") from None
            if not math.isfinite(v) or v < 0 or (positive and v == 0):
                kind = "positive" if positive else "nonnegative"
                raise ConfigError(section, key, f"entries must be finite and {kind}, got {item!r}")
            values.append(v)
        return tuple(values)

    def words(self, section, key, default):
        raw = self._raw(section, key)
        if raw is None:
            return default
        items = tuple(s.strip() for s in raw.split(",") if s.strip())
        if not items:
            raise ConfigError(section, key, "list must not be empty")
        return items

    def text(self, section, key, default):
        raw = self._raw(section, key)
        return default if raw is None else raw


def load_config(path) -> _Reader:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError("file", str(path), "config file not found")
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ConfigError("file", str(path), str(exc).splitlines()[0]) from None
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(section, "*", f"unknown section; expected one of {sorted(SCHEMA)}")
        for key in parser.options(section):
            if key not in SCHEMA[section]:
                raise ConfigError(section, key, f"unknown key; expected one of {sorted(SCHEMA[section])}")
    return _Reader(parser)


def _rules(cfg: _Reader, default):
    rules = cfg.words("experiment", "rules", default)
    for rule in rules:
        try:
            parse_rule(rule)
        except SpecregError as exc:
            raise ConfigError("experiment", "rules", str(exc)) from None
    return rules


def _check_kind(cfg: _Reader, expected: str):
    kind = cfg.text("experiment", "kind", expected)
    if kind != expected:
        raise ConfigError("experiment", "kind", f"config is for {kind!r} but the subcommand is {expected!r}")


def filter_settings(cfg: _Reader) -> FilterSettings:
    _check_kind(cfg, "filters")
    d = FilterSettings()
    s = FilterSettings(
        alphas=cfg.reals("filters", "alphas", d.alphas, positive=True),
        taus=cfg.reals("filters", "taus", d.taus),
        sigma_min=cfg.real("filters", "sigma_min", d.sigma_min, positive=True),
        sigma_max=cfg.real("filters", "sigma_max", d.sigma_max, positive=True),
        points=cfg.count("filters", "points", d.points, minimum=2),
    )
    if s.sigma_min >= s.sigma_max:
        raise ConfigError("filters", "sigma_max", f"must exceed sigma_min={s.sigma_min:g}")
    return s


def deconv_settings(cfg: _Reader) -> DeconvSettings:
    _check_kind(cfg, "deconv1d")
    d = DeconvSettings()
    function = cfg.text("experiment", "function", d.function).upper()
    if function not in ("F1", "F2", "F3"):
        raise ConfigError("experiment", "function", f"expected F1, F2 or F3, got {function!r}")
    s = DeconvSettings(
        function=function,
        n=cfg.count("experiment", "n", d.n, minimum=2),
        s_blur=cfg.real("experiment", "s_blur", d.s_blur, positive=True),
        noise_std=cfg.real("experiment", "noise_std", d.noise_std, positive=True),
        seed=cfg.count("experiment", "seed", d.seed, minimum=0),
        taus=cfg.reals("experiment", "taus", d.taus),
        rules=_rules(cfg, d.rules),
        oversample=cfg.count("experiment", "oversample", d.oversample),
        safety=cfg.real("morozov", "safety", d.safety, positive=True),
        alpha_lo=cfg.real("morozov", "alpha_lo", d.alpha_lo, positive=True),
        alpha_hi=cfg.real("morozov", "alpha_hi", d.alpha_hi, positive=True),
        tol=cfg.real("morozov", "tol", d.tol, positive=True),
        sweep_min=cfg.real("sweep", "min", d.sweep_min, positive=True),
        sweep_max=cfg.real("sweep", "max", d.sweep_max, positive=True),
        sweep_points=cfg.count("sweep", "points", d.sweep_points, minimum=2),
    )
    if s.s_blur >= 1:
        raise ConfigError("experiment", "s_blur", f"must be below 1, got {s.s_blur:g}")
    if s.safety < 1:
        raise ConfigError("morozov", "safety", f"must be at least 1, got {s.safety:g}")
    if s.alpha_lo >= s.alpha_hi:
        raise ConfigError("morozov", "alpha_hi", f"must exceed alpha_lo={s.alpha_lo:g}")
    if s.sweep_min >= s.sweep_max:
        raise ConfigError("sweep", "max", f"must exceed min={s.sweep_min:g}")
    return s


def isp_settings(cfg: _Reader) -> IspSettings:
    _check_kind(cfg, "isp2d")
    d = IspSettings()
    sweep_points = cfg.count("sweep", "points", d.sweep_points, minimum=2)
    s = IspSettings(
        r0=cfg.real("isp", "r0", d.r0, positive=True),
        r=cfg.real("isp", "r", d.r, positive=True),
        cells_across=cfg.count("isp", "cells_across", d.cells_across),
        sensors=cfg.count("isp", "sensors", d.sensors),
        j_min=cfg.count("isp", "j_min", d.j_min),
        j_max=cfg.count("isp", "j_max", d.j_max),
        noise_ratio=cfg.real("isp", "noise_ratio", d.noise_ratio, nonneg=True),
        seed=cfg.count("experiment", "seed", d.seed, minimum=0),
        taus=cfg.reals("experiment", "taus", d.taus),
        rules=_rules(cfg, d.rules),
        safety=cfg.real("morozov", "safety", d.safety, positive=True),
        tol=cfg.real("morozov", "tol", d.tol, positive=True),
        rel_alpha_min=cfg.real("isp", "rel_alpha_min", d.rel_alpha_min, positive=True),
        rel_alpha_max=cfg.real("isp", "rel_alpha_max", d.rel_alpha_max, positive=True),
        sweep_points=cfg.count("isp", "sweep_points", sweep_points, minimum=2),
    )
    if s.r0 >= s.r:
        raise ConfigError("isp", "r", f"must exceed r0={s.r0:g}")
    if s.j_min > s.j_max:
        raise ConfigError("isp", "j_max", f"must be at least j_min={s.j_min}")
    if s.rel_alpha_min >= s.rel_alpha_max:
        raise ConfigError("isp", "rel_alpha_max", f"must exceed rel_alpha_min={s.rel_alpha_min:g}")
    needed = math.ceil(2 * s.j_max * s.r / s.r0)
    if s.sensors < needed:
        raise ConfigError("isp", "sensors", f"{s.sensors} undersamples j_max={s.j_max}; need at least {needed}")
    return s


def _out_dir(args, cfg: _Reader, name: str) -> Path:
    if args.out is not None:
        return Path(args.out)
    return Path(cfg.text("experiment", "out", f"runs/{name}"))


def _print_report(report: ExperimentReport, label: str, elapsed: float) -> None:
    print(f"{label} ({elapsed:.2f} s)")
    print(f"{'tau':>8}  {'rule':<12} {'alpha':>14} {'rel. error':>12}")
    for r in report.rows:
        print(f"{r.tau:>8g}  {r.rule:<12} {r.alpha:>14.6g} {r.relative_error:>12.6g}")


def cmd_filters(args) -> int:
    cfg = load_config(args.config)
    settings = filter_settings(cfg)
    out = _out_dir(args, cfg, "filters")
    out.mkdir(parents=True, exist_ok=True)
    rows = filter_curves(settings)
    write_filter_curves(rows, out / "filters.csv")
    print(f"wrote {len(rows)} rows to {out / 'filters.csv'}")
    return 0


def cmd_deconv(args) -> int:
    cfg = load_config(args.config)
    settings = deconv_settings(cfg)
    if args.seed is not None:
        settings = replace(settings, seed=args.seed)
    out = _out_dir(args, cfg, f"deconv1d_{settings.function}")
    start = time.perf_counter()
    outcome = run_deconv(settings, jobs=args.jobs)
    write_deconv(outcome, out, trace=args.trace)
    _print_report(outcome.report, f"deconv1d {settings.function}, seed {settings.seed}",
                  time.perf_counter() - start)
    print(f"artifacts in {out}")
    return 0


def cmd_isp(args) -> int:
    cfg = load_config(args.config)
    settings = isp_settings(cfg)
    if args.seed is not None:
        settings = replace(settings, seed=args.seed)
    out = _out_dir(args, cfg, "isp2d")
    start = time.perf_counter()
    outcome = run_isp(settings, jobs=args.jobs)
    write_isp(outcome, out, trace=args.trace)
    _print_report(outcome.report, f"isp2d, {outcome.centers.shape[0]} cells, seed {settings.seed}",
                  time.perf_counter() - start)
    span = outcome.sigma[0] / outcome.sigma[-1]
    print(f"singular values: {outcome.sigma.size} retained, span {span:.3g}")
    print(f"artifacts in {out}")
    return 0


def cmd_compare(args) -> int:
    a = ExperimentReport.from_csv(args.a)
    b = ExperimentReport.from_csv(args.b)
    diff = compare_reports(a, b)
    print(diff.summary())
    if args.tolerance is not None and diff.max_relative_delta > args.tolerance:
        print(f"max relative delta exceeds tolerance {args.tolerance:g}")
        return 1
    return 0


def _jobs(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specreg", description="Spectral-filter regularization experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI experiment config")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--jobs", type=_jobs, default=1, metavar="N",
                        help="parallel (tau, rule) workers; output order is unchanged")

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=_seed, metavar="U64", help="override the configured noise seed")
    seeded.add_argument("--trace", action="store_true", help="also write alpha-selection traces")

    sub.add_parser("filters", parents=[common], help="filter curves q(sigma) per (alpha, tau)") \
        .set_defaults(func=cmd_filters)
    sub.add_parser("deconv1d", parents=[common, seeded], help="1D periodic deconvolution") \
        .set_defaults(func=cmd_deconv)
    sub.add_parser("isp2d", parents=[common, seeded], help="multi-frequency inverse source problem") \
        .set_defaults(func=cmd_isp)

    cmp = sub.add_parser("compare", help="diff two report.csv files")
    cmp.add_argument("a")
    cmp.add_argument("b")
    cmp.add_argument("--tolerance", type=float, help="exit 1 if the max relative delta exceeds this")
    cmp.set_defaults(func=cmd_compare)
    return parser


def _origin(exc: BaseException) -> str:
    frames = [f for f in traceback.extract_tb(exc.__traceback__) if "specreg" in f.filename]
    return Path(frames[-1].filename).stem if frames else "specreg"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpecregError as exc:
        print(f"error in {_origin(exc)}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
