"""Design-space enumeration over TUM and linkage geometry."""

from __future__ import annotations

import dataclasses
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _schema
from . import linkage as lk
from . import tum_model as tm
from .errors import ConfigError, SpineMechError

# enumeration order: first parameter varies slowest
PARAMETERS = ("R", "L", "N", "w1", "w2", "w3", "R1", "R2", "a", "b", "c")

_TUM_FIELDS = {
    "R": "radius_R",
    "L": "strip_length_L",
    "N": "n_strips",
    "w1": "strip_width_w1",
    "w2": "top_plate_thickness_w2",
    "w3": "bottom_plate_thickness_w3",
}
_LINKAGE_FIELDS = {"R1": "link_R1", "R2": "link_R2", "a": "offset_a", "b": "offset_b", "c": "offset_c"}

DEFAULT_REFERENCE_TORQUE = 400.0  # N*mm
DEFAULT_THETA_REF = 1.0  # rad


@dataclass(frozen=True)
class DesignRanges:
    """Per-parameter (min, max, steps); parameters left out stay at the base design."""

    ranges: dict
    base_tum: tm.TumSpec
    base_linkage: lk.LinkageSpec

    def __post_init__(self):
        clean = {}
        for name, spec in self.ranges.items():
            if name not in PARAMETERS:
                raise ConfigError(f"ranges: unknown parameter {name!r} (expected one of {', '.join(PARAMETERS)})")
            if not isinstance(spec, (list, tuple)) or len(spec) != 3:
                raise ConfigError(f"ranges.{name}: expected [min, max, steps]")
            lo = _schema.require_number(spec[0], f"ranges.{name}.min")
            hi = _schema.require_number(spec[1], f"ranges.{name}.max")
            steps = _schema.require_number(spec[2], f"ranges.{name}.steps", integer=True)
            if lo > hi:
                raise ConfigError(f"ranges.{name}: min {lo:g} > max {hi:g}")
            if steps < 1:
                raise ConfigError(f"ranges.{name}: steps must be >= 1")
            if name == "N" and (int(lo) != lo or int(hi) != hi):
                raise ConfigError("ranges.N: bounds must be integers")
            clean[name] = (lo, hi, steps)
        object.__setattr__(self, "ranges", clean)

    def values(self, name):
        if name not in self.ranges:
            return [self.base_value(name)]
        lo, hi, steps = self.ranges[name]
        if steps == 1:
            vals = [lo]
        else:
            vals = np.linspace(lo, hi, steps).tolist()
        if name == "N":
            vals = [int(round(v)) for v in vals]
        return vals

    def base_value(self, name):
        if name in _TUM_FIELDS:
            return getattr(self.base_tum, _TUM_FIELDS[name])
        return getattr(self.base_linkage, _LINKAGE_FIELDS[name])

    @property
    def size(self) -> int:
        return math.prod(len(self.values(p)) for p in PARAMETERS)


@dataclass(frozen=True)
class Candidate:
    index: int
    params: dict


def enumerate_candidates(ranges: DesignRanges):
    """Lexicographic Cartesian grid over PARAMETERS."""
    axes = [ranges.values(p) for p in PARAMETERS]
    for i, combo in enumerate(itertools.product(*axes)):
        yield Candidate(i, dict(zip(PARAMETERS, combo)))


def sample_candidates(ranges: DesignRanges, n: int, seed: int = 0):
    """Seeded uniform sampler for spaces too large to grid."""
    rng = np.random.default_rng(seed)
    for i in range(n):
        params = {}
        for p in PARAMETERS:
            if p in ranges.ranges:
                lo, hi, _ = ranges.ranges[p]
                params[p] = int(rng.integers(int(lo), int(hi) + 1)) if p == "N" else float(rng.uniform(lo, hi))
            else:
                params[p] = ranges.base_value(p)
        yield Candidate(i, params)


def build_tum(params: dict, base_tum: tm.TumSpec) -> tm.TumSpec:
    """Candidate TumSpec; the configured rotation limit is capped at 99% of L/R."""
    theta_max = min(base_tum.max_rotation_theta_max, tm.SINGULARITY_MARGIN * params["L"] / params["R"])
    return dataclasses.replace(
        base_tum, **{_TUM_FIELDS[k]: params[k] for k in _TUM_FIELDS}, max_rotation_theta_max=theta_max
    )


def build_linkage(params: dict, base_linkage: lk.LinkageSpec) -> lk.LinkageSpec:
    """Candidate LinkageSpec; its TUM length follows the candidate's strip length."""
    return dataclasses.replace(
        base_linkage, **{_LINKAGE_FIELDS[k]: params[k] for k in _LINKAGE_FIELDS}, tum_length_L=params["L"]
    )


REPORT_FIELDS = (
    "constraint_pass",
    "margin_mm",
    "stroke_mm",
    "finger_range_deg",
    "required_holding_torque_Nmm",
    "grasp_torque_at_reference_Nmm",
)
NUMERIC_FIELDS = REPORT_FIELDS[1:] + PARAMETERS


@dataclass(frozen=True)
class DesignReport:
    index: int
    params: dict
    failure: str | None = None
    constraint_pass: bool | None = None
    margin_mm: float | None = None
    stroke_mm: float | None = None
    finger_range_deg: float | None = None
    required_holding_torque_Nmm: float | None = None
    grasp_torque_at_reference_Nmm: float | None = None

    @property
    def feasible(self) -> bool:
        return self.failure is None

    def value(self, name):
        if name in self.params:
            return self.params[name]
        return getattr(self, name)

    def to_row(self) -> dict:
        row = {"index": self.index, **self.params, "feasible": self.feasible, "failure": self.failure}
        row.update({f: getattr(self, f) for f in REPORT_FIELDS})
        return row


CSV_COLUMNS = ("index",) + PARAMETERS + ("feasible", "failure") + REPORT_FIELDS


def evaluate(candidate: Candidate, base_tum: tm.TumSpec, base_linkage: lk.LinkageSpec,
             reference_input_torque: float = DEFAULT_REFERENCE_TORQUE,
             theta_ref: float = DEFAULT_THETA_REF) -> DesignReport:
    """Fill a DesignReport; an infeasible candidate yields a failure tag, not an exception."""
    report = DesignReport(candidate.index, dict(candidate.params))
    try:
        tum = build_tum(candidate.params, base_tum)
        radius = tm.check_radius_constraint(tum)
    except SpineMechError as exc:
        return dataclasses.replace(report, failure=f"invalid-tum: {exc}")
    stroke = tm.contraction(tum, tum.theta_limit)
    report = dataclasses.replace(
        report,
        constraint_pass=radius.passed,
        margin_mm=radius.margin,
        stroke_mm=stroke,
        required_holding_torque_Nmm=tm.max_elastic_torque(tum),
    )
    try:
        linkage = build_linkage(candidate.params, base_linkage)
        travel = lk.finger_travel(linkage, stroke)
    except (ConfigError, lk.NoRealSolutionError) as exc:
        return dataclasses.replace(report, failure=f"linkage-infeasible: {exc}")
    report = dataclasses.replace(report, finger_range_deg=math.degrees(abs(travel)))
    if theta_ref > tum.theta_limit:
        return dataclasses.replace(report, failure="theta-ref-outside-stroke")
    try:
        tau_g = lk.grasp_torque(linkage, tum, theta_ref, reference_input_torque)
    except SpineMechError as exc:
        return dataclasses.replace(report, failure=f"linkage-singular: {exc}")
    return dataclasses.replace(report, grasp_torque_at_reference_Nmm=tau_g)


def _evaluate_chunk(args):
    chunk, base_tum, base_linkage, torque, theta_ref = args
    return [evaluate(c, base_tum, base_linkage, torque, theta_ref) for c in chunk]


def evaluate_all(candidates, base_tum, base_linkage, reference_input_torque=DEFAULT_REFERENCE_TORQUE,
                 theta_ref=DEFAULT_THETA_REF, jobs: int = 1):
    """Evaluate every candidate; output order is by candidate index whatever ``jobs`` is."""
    candidates = list(candidates)
    if jobs <= 1 or len(candidates) < 2:
        reports = [evaluate(c, base_tum, base_linkage, reference_input_torque, theta_ref) for c in candidates]
    else:
        size = max(1, math.ceil(len(candidates) / (jobs * 4)))
        chunks = [candidates[i:i + size] for i in range(0, len(candidates), size)]
        args = [(ch, base_tum, base_linkage, reference_input_torque, theta_ref) for ch in chunks]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = [r for part in pool.map(_evaluate_chunk, args) for r in part]
    return sorted(reports, key=lambda r: r.index)


def pareto_front(reports, objectives):
    """Non-dominated reports under ``objectives`` = [(field, "max" | "min"), ...].

    Reports missing any objective value are left out.  Result keeps input order.
    """
    objectives = list(objectives)
    if not objectives:
        raise ConfigError("pareto_front needs at least one objective")
    signs = []
    for name, direction in objectives:
        if name not in NUMERIC_FIELDS:
            raise ConfigError(f"unknown objective field {name!r}")
        if direction not in ("max", "min"):
            raise ConfigError(f"objective {name!r}: direction must be 'max' or 'min'")
        signs.append(1.0 if direction == "max" else -1.0)
    points = []
    for pos, r in enumerate(reports):
        vals = [r.value(name) for name, _ in objectives]
        if any(v is None for v in vals):
            continue
        points.append((tuple(s * float(v) for s, v in zip(signs, vals)), pos))
    # a point can only be dominated by one that sorts before it
    points.sort(key=lambda p: p[0], reverse=True)
    front = []
    for key, pos in points:
        if not any(_dominates(f, key) for f, _ in front):
            front.append((key, pos))
    keep = sorted(pos for _, pos in front)
    reports = list(reports)
    return [reports[p] for p in keep]


def _dominates(a, b):
    return all(x >= y for x, y in zip(a, b)) and a != b
