"""Command-line entry point.

Angles are given in degrees on the command line and written in radians to
every output file.  Exit codes: 0 success, 2 configuration error, 3 domain or
model error, 4 data ingestion error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis, config, export, sweep
from . import linkage as lk
from . import transition as tr
from . import tum_model as tm
from .errors import ConfigError, DataError, DomainError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_DATA = 4

TORQUE_ANCHOR_NMM = 175.0  # corrected elastic torque measured at 105 deg
TORQUE_ANCHOR_DEG = 105.0

log = logging.getLogger("spine_mech")


def _stamp(command, files):
    return export.provenance(command, export.config_hash(*files))


def _symmetric_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """n points on [lo, hi], mirror-symmetric about the midpoint to the last bit."""
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    u = (2.0 * np.arange(n) - (n - 1)) / (n - 1)
    return mid + half * u


def _samples(value: int) -> int:
    if value < 2:
        raise ConfigError(f"--samples must be >= 2, got {value}")
    return value


def _summary_path(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


# -- subcommands ---------------------------------------------------------------


def cmd_tum_curve(args) -> int:
    cfg, files = config.load(args.config)
    (tum,) = cfg.require("tum")
    n = _samples(args.samples)
    lo = -tum.theta_limit if args.theta_min is None else math.radians(args.theta_min)
    hi = tum.theta_limit if args.theta_max is None else math.radians(args.theta_max)
    if lo >= hi:
        raise ConfigError("--theta-min must be below --theta-max")
    thetas = _symmetric_grid(lo, hi, n)
    cols = tm.tum_curve(tum, thetas)
    export.write_csv(args.out, cols, tm.CURVE_COLUMNS, _stamp("tum-curve", files))
    log.info("wrote %d rows to %s", n, args.out)
    return EXIT_OK


def cmd_linkage_curve(args) -> int:
    cfg, files = config.load(args.config)
    tum, link = cfg.require("tum", "linkage")
    n = _samples(args.samples)
    stroke = tm.contraction(tum, tum.theta_limit)
    xs = np.linspace(0.0, stroke, n)
    cols = lk.linkage_curve(link, xs)
    export.write_csv(args.out, cols, lk.CURVE_COLUMNS, _stamp("linkage-curve", files))
    return EXIT_OK


def design_summary(tum: tm.TumSpec, link: lk.LinkageSpec | None, fric: tr.FrictionGenerator | None) -> dict:
    radius = tm.check_radius_constraint(tum)
    stroke = tm.contraction(tum, tum.theta_limit)
    anchor = math.radians(TORQUE_ANCHOR_DEG)
    out = {
        "constraint_pass": radius.passed,
        "r_min_mm": radius.r_min,
        "margin_mm": radius.margin,
        "theta_limit_rad": tum.theta_limit,
        "stroke_mm": stroke,
        "max_elastic_torque_Nmm": tm.max_elastic_torque(tum),
    }
    if anchor <= tum.theta_limit:
        fit = tm.calibrate_n_strips(tum, anchor, TORQUE_ANCHOR_NMM)
        check = tm.closed_form_crosscheck(tum, anchor)
        out["strip_count_fit"] = {
            "anchor_theta_rad": anchor,
            "anchor_torque_Nmm": TORQUE_ANCHOR_NMM,
            "n_strips": fit.n_strips,
            "model_torque_Nmm": fit.torque,
            "residual_Nmm": fit.residual,
        }
        out["closed_form_crosscheck"] = {
            "fs_composed_N": check.fs_composed,
            "fs_printed_N": check.fs_printed,
            "printed_divergence": check.printed_divergence,
            "moment_whole_radical_Nmm": check.moment_whole_radical,
            "torque_virtual_work_Nmm": check.torque_virtual_work,
            "moment_divergence": check.moment_divergence,
        }
    if link is not None:
        try:
            travel = lk.finger_travel(link, stroke)
            out["finger_range_deg"] = math.degrees(abs(travel))
        except DomainError as exc:
            out["finger_range_deg"] = None
            out["linkage_failure"] = str(exc)
    if fric is not None:
        check = tr.grasp_success(tum, fric)
        out["grasp_success"] = check.success
        out["grasp_margin_Nmm"] = check.margin
    return out


def cmd_check_design(args) -> int:
    cfg, files = config.load(args.config)
    (tum,) = cfg.require("tum")
    summary = design_summary(tum, cfg.linkage, cfg.friction)
    stamp = _stamp("check-design", files)
    if args.out:
        export.write_json(args.out, summary, stamp)
    else:
        print(json.dumps(export._clean({"provenance": stamp, **summary}), indent=2))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg, files = config.load(args.config)
    (scenario,) = cfg.require("scenario")
    trace = tr.simulate(scenario)
    stamp = _stamp("simulate", files)
    out = Path(args.out)
    export.write_csv(out, trace.columns(), tr.TRACE_COLUMNS, stamp)
    export.write_json(_summary_path(out, ".summary.json"), trace.summary, stamp)
    log.info("outcome %s, grasp_success=%s", trace.summary["outcome"], trace.summary["grasp_success"])
    return EXIT_OK


def _jobs(args) -> int:
    env = os.environ.get("SPINE_MECH_JOBS")
    if env is not None:
        try:
            jobs = int(env)
        except ValueError:
            raise ConfigError(f"SPINE_MECH_JOBS must be an integer, got {env!r}") from None
    else:
        jobs = args.jobs
    if jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {jobs}")
    return jobs


def run_sweep(cfg: config.RunConfig, jobs: int = 1):
    (ranges,) = cfg.require("ranges")
    if cfg.sample is not None:
        cands = sweep.sample_candidates(ranges, cfg.sample["n"], cfg.sample["seed"])
    else:
        cands = sweep.enumerate_candidates(ranges)
    return sweep.evaluate_all(
        cands, ranges.base_tum, ranges.base_linkage, cfg.reference_input_torque, cfg.theta_ref, jobs=jobs
    )


def sweep_columns(reports) -> dict:
    rows = [r.to_row() for r in reports]
    return {c: [row[c] for row in rows] for c in sweep.CSV_COLUMNS}


def cmd_sweep(args) -> int:
    cfg, files = config.load(args.config)
    reports = run_sweep(cfg, _jobs(args))
    stamp = _stamp("sweep", files)
    out = Path(args.out)
    export.write_csv(out, sweep_columns(reports), sweep.CSV_COLUMNS, stamp)
    payload = {
        "n_candidates": len(reports),
        "n_feasible": sum(r.feasible for r in reports),
        "reference_input_torque_Nmm": cfg.reference_input_torque,
        "theta_ref_rad": cfg.theta_ref,
    }
    if cfg.objectives:
        front = sweep.pareto_front([r for r in reports if r.feasible], cfg.objectives)
        payload["objectives"] = [list(o) for o in cfg.objectives]
        payload["pareto_front"] = [r.index for r in front]
    payload["reports"] = [r.to_row() for r in reports]
    export.write_json(_summary_path(out, ".json"), payload, stamp)
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg, files = config.load(args.config)
    (tum,) = cfg.require("tum")
    if args.load_n is None:
        raise ConfigError("--load-n is required")
    data = analysis.read_log(args.log)
    cols, summary = analysis.analyze_log(data, tum, args.load_n)
    stamp = _stamp("analyze", [*files, Path(args.log)])
    out = Path(args.out)
    export.write_csv(out, cols, analysis.ANALYSIS_COLUMNS, stamp)
    export.write_json(_summary_path(out, ".summary.json"), summary, stamp)
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="spine-mech",
        description="TUM gripper mechanism analysis. Angles on the command line are in degrees; "
        "all files use radians.",
    )
    p.add_argument("--version", action="version", version=f"spine-mech {__version__}")
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, out_required=True):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--out", required=out_required, help="output file")
        sp.set_defaults(func=func)
        return sp

    sp = add("tum-curve", cmd_tum_curve, "contraction, Jacobian, strip force and torque vs twist")
    sp.add_argument("--samples", type=int, default=181)
    sp.add_argument("--theta-min", type=float, help="degrees (default: -stroke limit)")
    sp.add_argument("--theta-max", type=float, help="degrees (default: +stroke limit)")

    sp = add("linkage-curve", cmd_linkage_curve, "finger linkage angles over the contraction stroke")
    sp.add_argument("--samples", type=int, default=101)

    add("check-design", cmd_check_design, "radius condition, stroke, finger range, grasp check", out_required=False)
    add("simulate", cmd_simulate, "quasi-static grasp/rotate trace; also writes <out>.summary.json")

    sp = add("sweep", cmd_sweep, "design-space grid; also writes <out>.json")
    sp.add_argument("--jobs", type=int, default=1, help="worker processes (SPINE_MECH_JOBS overrides)")

    sp = add("analyze", cmd_analyze, "empirical Jacobian from a (theta_rad, tau_in_Nmm) log")
    sp.add_argument("--log", required=True, help="CSV log of theta_rad,tau_in_Nmm")
    sp.add_argument("--load-n", type=float, help="hanging load [N]")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors exit 2, the config-error code
        return int(exc.code or 0)
    logging.basicConfig(level=args.log_level, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        code, exc_ = EXIT_CONFIG, exc
    except DataError as exc:
        code, exc_ = EXIT_DATA, exc
    except DomainError as exc:
        code, exc_ = EXIT_DOMAIN, exc
    print(f"spine-mech: error: {exc_}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
