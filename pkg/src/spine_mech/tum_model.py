"""Closed-form model of the twisted underactuated mechanism (TUM).

A bottom plate of radius R is twisted by theta; N compliant strips of length L
connect it to a top plate that is free to translate and rotate.  Under the
idealisation of zero-thickness plates and strips the mechanism behaves like a
twisted string actuator, and each strip is treated as a pinned-pinned Euler
column whose buckling load is projected on the axis to give the elastic force.

Units everywhere: mm, rad, N, N*mm.  Every function accepts a scalar or a numpy
array for ``theta`` and returns the same kind.  Even quantities are evaluated on
``abs(theta)`` so that f(-theta) == f(theta) holds bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _schema
from .errors import ConfigError, DomainError, GeometryError, SingularityError

#: Minimum |theta| for operations that invert the TUM Jacobian.
THETA_FLOOR = 1e-3
#: Fraction of the kinematic singularity L/R usable as stroke.
SINGULARITY_MARGIN = 0.99


@dataclass(frozen=True)
class TumSpec:
    radius_R: float
    strip_length_L: float
    n_strips: int
    strip_width_w1: float
    top_plate_thickness_w2: float
    bottom_plate_thickness_w3: float
    youngs_modulus_E: float  # N/mm^2
    second_moment_I: float  # mm^4
    max_rotation_theta_max: float  # rad

    def __post_init__(self):
        num = _schema.require_number
        object.__setattr__(self, "radius_R", num(self.radius_R, "radius_R", positive=True))
        object.__setattr__(
            self, "strip_length_L", num(self.strip_length_L, "strip_length_L", positive=True)
        )
        n = num(self.n_strips, "n_strips", positive=True, integer=True)
        object.__setattr__(self, "n_strips", n)
        for name in ("strip_width_w1", "top_plate_thickness_w2", "bottom_plate_thickness_w3"):
            object.__setattr__(self, name, num(getattr(self, name), name, nonnegative=True))
        for name in ("youngs_modulus_E", "second_moment_I", "max_rotation_theta_max"):
            object.__setattr__(self, name, num(getattr(self, name), name, positive=True))
        if not self.max_rotation_theta_max < self.singular_theta:
            raise ConfigError(
                f"max_rotation_theta_max={self.max_rotation_theta_max:.6g} rad must be below "
                f"the singularity L/R={self.singular_theta:.6g} rad"
            )

    @property
    def singular_theta(self) -> float:
        """Twist at which R*theta == L."""
        return self.strip_length_L / self.radius_R

    @property
    def theta_limit(self) -> float:
        """Usable stroke: the configured limit capped at 99% of L/R."""
        return min(self.max_rotation_theta_max, SINGULARITY_MARGIN * self.singular_theta)

    @property
    def flexural_rigidity(self) -> float:
        return self.youngs_modulus_E * self.second_moment_I

    @classmethod
    def from_dict(cls, data, where="tum"):
        return _schema.build(cls, data, where)

    def to_dict(self):
        return _schema.to_dict(self)


@dataclass(frozen=True)
class StripState:
    theta: float
    contraction_X: float
    chord_shortening_dS: float
    beta: float
    buckling_load_P: float
    axial_force_Fs_single: float


@dataclass(frozen=True)
class DeflectionProfile:
    amplitude_A: float
    half_period_length: float
    arc: np.ndarray
    deflection: np.ndarray

    @property
    def samples(self):
        return list(zip(self.arc.tolist(), self.deflection.tolist()))


@dataclass(frozen=True)
class RadiusCheck:
    passed: bool
    margin: float  # R - R_min [mm]
    r_min: float


def _as_float(theta):
    if type(theta) is float or type(theta) is int:  # scalar fast path
        if not math.isfinite(theta):
            raise DomainError("theta must be finite")
        return float(theta)
    t = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(t)):
        raise DomainError("theta must be finite")
    return t


def _abs(t):
    return abs(t) if type(t) is float else np.abs(t)


def _out(value, like):
    return float(value) if np.ndim(like) == 0 else value


def _guard_singularity(spec: TumSpec, t_abs):
    if type(t_abs) is float:
        hit = spec.radius_R * t_abs >= spec.strip_length_L
    else:
        hit = np.any(spec.radius_R * t_abs >= spec.strip_length_L)
    if hit:
        worst = float(np.max(t_abs))
        raise SingularityError(
            f"|R*theta| >= L at theta={worst:.6g} rad "
            f"(singularity at L/R={spec.singular_theta:.6g} rad)"
        )


# -- stroke design -----------------------------------------------------------


def _stacked_height(spec: TumSpec, plate_gap_ds):
    h = spec.top_plate_thickness_w2 + spec.bottom_plate_thickness_w3 + plate_gap_ds
    if h < 0:
        raise DomainError(f"w2 + w3 + d_s = {h:.6g} mm violates 0 <= w2 + w3 + d_s")
    if h > spec.strip_length_L:
        raise DomainError(
            f"w2 + w3 + d_s = {h:.6g} mm violates w2 + w3 + d_s <= L = {spec.strip_length_L:.6g}"
        )
    return h


def strip_inclination(spec: TumSpec, plate_gap_ds: float) -> float:
    """Inclination alpha of a strip relative to the plate, arcsin((w2+w3+d_s)/L)."""
    h = _stacked_height(spec, plate_gap_ds)
    return math.asin(h / spec.strip_length_L)


def inter_strip_distance(spec: TumSpec, plate_gap_ds: float) -> float:
    """Distance between adjacent strip joints, 2*pi*R*(w2+w3+d_s)/(N*L)."""
    h = _stacked_height(spec, plate_gap_ds)
    return 2.0 * math.pi * spec.radius_R * h / (spec.n_strips * spec.strip_length_L)


def min_radius(spec: TumSpec) -> float:
    plates = spec.top_plate_thickness_w2 + spec.bottom_plate_thickness_w3
    if plates <= 0:
        raise DomainError("degenerate spec: w2 + w3 = 0, radius condition undefined")
    return spec.strip_width_w1 * spec.n_strips * spec.strip_length_L / (2.0 * math.pi * plates)


def check_radius_constraint(spec: TumSpec) -> RadiusCheck:
    """Non-interference of adjacent strips with the plates in full contact (d_s = 0)."""
    r_min = min_radius(spec)
    margin = spec.radius_R - r_min
    return RadiusCheck(passed=margin >= 0, margin=margin, r_min=r_min)


# -- kinematics --------------------------------------------------------------


def contraction(spec: TumSpec, theta):
    """Axial contraction X = L - sqrt(L^2 - (R*theta)^2)."""
    t = _abs(_as_float(theta))
    _guard_singularity(spec, t)
    L = spec.strip_length_L
    rt = spec.radius_R * t
    r2 = rt * rt  # not ** 2: libm pow may differ from numpy by an ulp
    # same as L - sqrt(L^2 - r2) without the cancellation at small twist
    x = r2 / (L + np.sqrt(L * L - r2))
    return _out(x, theta)


def rotation_for_contraction(spec: TumSpec, X):
    """Nonnegative twist producing contraction ``X``."""
    x = np.asarray(X, dtype=float)
    L = spec.strip_length_L
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise DomainError("contraction X must be finite and >= 0")
    if np.any(x >= L):
        raise SingularityError(f"contraction X must stay below L = {L:.6g} mm (out of stroke)")
    t = np.sqrt(x * (2.0 * L - x)) / spec.radius_R
    return _out(t, X)


def jacobian(spec: TumSpec, theta):
    """TUM Jacobian dX/dtheta in mm/rad; odd in theta."""
    t = _as_float(theta)
    _guard_singularity(spec, _abs(t))
    R, L = spec.radius_R, spec.strip_length_L
    rt = R * t
    j = R * R * t / np.sqrt(L * L - rt * rt)
    return _out(j, theta)


def contraction_rate(spec: TumSpec, theta, theta_dot):
    return jacobian(spec, theta) * theta_dot


# -- elasticity --------------------------------------------------------------


def _chord_squared(spec: TumSpec, t_abs):
    R, L = spec.radius_R, spec.strip_length_L
    rt = R * t_abs
    half = np.sin(0.5 * t_abs)
    rad = L * L - rt * rt + 4.0 * R * R * (half * half)
    if np.any(rad <= 0):
        raise GeometryError("strip chord length is not real: L^2 - (R*theta)^2 + 4R^2 sin^2(theta/2) <= 0")
    return rad


def chord_shortening(spec: TumSpec, theta):
    """Shortening dS of the strip's end-to-end chord, (L - dS)^2 = L^2 - (R theta)^2 + 4 R^2 sin^2(theta/2)."""
    t = _abs(_as_float(theta))
    ds = spec.strip_length_L - np.sqrt(_chord_squared(spec, t))
    return _out(ds, theta)


def beta_angle(spec: TumSpec, theta):
    """Angle between the strip chord and the TUM axis."""
    t = _abs(_as_float(theta))
    _guard_singularity(spec, t)
    R, L = spec.radius_R, spec.strip_length_L
    rt = R * t
    remaining = np.sqrt(L * L - rt * rt)  # L - X
    b = np.arctan(2.0 * R * np.sin(0.5 * t) / remaining)
    return _out(b, theta)


def buckling_load(spec: TumSpec, theta):
    """Euler load (pi/(L - dS))^2 * E * I of one strip at the current chord length."""
    t = _abs(_as_float(theta))
    chord2 = _chord_squared(spec, t)
    p = math.pi**2 / chord2 * spec.flexural_rigidity
    return _out(p, theta)


def deflection_profile(spec: TumSpec, theta: float, amplitude_A: float, n_samples: int) -> DeflectionProfile:
    """Half-sine buckled shape y(s) = A sin(pi s / (L - dS)) sampled on [0, L - dS]."""
    if int(n_samples) != n_samples or n_samples < 2:
        raise DomainError("n_samples must be an integer >= 2")
    if not amplitude_A >= 0:
        raise DomainError("amplitude_A must be >= 0")
    half = spec.strip_length_L - chord_shortening(spec, theta)
    s = np.linspace(0.0, half, int(n_samples))
    y = amplitude_A * np.sin(math.pi / half * s)
    # sin(pi) is ~1e-16, not 0
    y[0] = 0.0
    y[-1] = 0.0
    return DeflectionProfile(float(amplitude_A), float(half), s, y)


def strip_axial_force(spec: TumSpec, theta):
    """Axial elastic force of one strip, P * cos(beta)."""
    f = np.asarray(buckling_load(spec, theta)) * np.cos(beta_angle(spec, theta))
    return _out(f, theta)


def strip_state(spec: TumSpec, theta: float) -> StripState:
    return StripState(
        theta=float(theta),
        contraction_X=contraction(spec, theta),
        chord_shortening_dS=chord_shortening(spec, theta),
        beta=beta_angle(spec, theta),
        buckling_load_P=buckling_load(spec, theta),
        axial_force_Fs_single=strip_axial_force(spec, theta),
    )


def total_elastic_force(spec: TumSpec, theta):
    f = spec.n_strips * np.asarray(strip_axial_force(spec, theta))
    return _out(f, theta)


def elastic_torque(spec: TumSpec, theta):
    """Holding torque J(theta) * N * F_s(theta) against strip elasticity, zero payload.

    Obtained from virtual work; odd in theta and exactly 0 at theta = 0.
    """
    tau = np.asarray(jacobian(spec, theta)) * np.asarray(total_elastic_force(spec, theta))
    return _out(tau, theta)


def max_elastic_torque(spec: TumSpec, n_grid: int = 257) -> float:
    """Peak holding torque over the stroke [0, theta_limit]."""
    grid = np.linspace(0.0, spec.theta_limit, n_grid)
    return float(np.max(elastic_torque(spec, grid)))


def contraction_force(spec: TumSpec, theta, tau_in, theta_floor: float = THETA_FLOOR):
    """Net axial output force F_c = tau_in / J(theta) - N * F_s(theta)."""
    t = _as_float(theta)
    if np.any(np.abs(t) < theta_floor):
        raise SingularityError(
            f"|theta| < {theta_floor:g} rad: the TUM cannot transmit axial force at zero twist"
        )
    fc = np.asarray(tau_in, dtype=float) / np.asarray(jacobian(spec, t)) - np.asarray(
        total_elastic_force(spec, t)
    )
    if np.ndim(theta) == 0 and np.ndim(tau_in) == 0:
        return float(fc)
    return fc


# -- calibration and cross-checks ---------------------------------------------


@dataclass(frozen=True)
class StripCountFit:
    n_strips: int
    torque: float  # model elastic torque at the anchor angle [N*mm]
    residual: float  # model - target [N*mm]
    spec: TumSpec


def calibrate_n_strips(spec: TumSpec, theta: float, target_torque: float, candidates=range(1, 17)) -> StripCountFit:
    """Pick the strip count whose elastic torque at ``theta`` is closest to ``target_torque``.

    Ties go to the smaller count.
    """
    best = None
    for n in candidates:
        trial = _with(spec, n_strips=n)
        tau = elastic_torque(trial, theta)
        if best is None or abs(tau - target_torque) < abs(best.residual):
            best = StripCountFit(n, tau, tau - target_torque, trial)
    if best is None:
        raise DomainError("no strip-count candidates given")
    return best


def _with(spec: TumSpec, **changes) -> TumSpec:
    data = spec.to_dict()
    data.update(changes)
    return TumSpec(**data)


@dataclass(frozen=True)
class ClosedFormCheck:
    theta: float
    fs_composed: float  # P cos(beta), N
    fs_printed: float  # one-line expression evaluated as typeset
    moment_whole_radical: float  # same expression with the radical over the whole denominator, N*mm
    torque_virtual_work: float  # J * P cos(beta) for one strip, N*mm

    @property
    def printed_divergence(self) -> float:
        return self.fs_printed / self.fs_composed - 1.0

    @property
    def moment_divergence(self) -> float:
        return self.moment_whole_radical / self.torque_virtual_work - 1.0


def closed_form_crosscheck(spec: TumSpec, theta: float) -> ClosedFormCheck:
    """Compare the composed strip force with the published one-line closed form.

    As typeset, the second factor's denominator mixes sqrt(2R^2) [mm] with
    squared lengths.  Read with the radical over the whole denominator it
    becomes sqrt((L - dS)^2) and the factor R^2 sin(theta)/(L - dS) is a lever
    arm, so the expression is the strip's moment about the axis (N*mm), not a
    force.  Both readings are returned; neither feeds the model.
    """
    if not 0 < abs(theta) < spec.singular_theta:
        raise DomainError("cross-check needs 0 < |theta| < L/R")
    t = abs(theta)
    R, L = spec.radius_R, spec.strip_length_L
    p = buckling_load(spec, t)
    typeset_den = math.sqrt(2 * R * R) - 2 * R * R * math.cos(t) + L * L - (R * t) ** 2
    whole_den = math.sqrt(2 * R * R - 2 * R * R * math.cos(t) + L * L - (R * t) ** 2)
    fs = strip_axial_force(spec, t)
    return ClosedFormCheck(
        theta=float(theta),
        fs_composed=fs,
        fs_printed=p * R * R * math.sin(t) / typeset_den,
        moment_whole_radical=p * R * R * math.sin(t) / whole_den,
        torque_virtual_work=jacobian(spec, t) * fs,
    )


CURVE_COLUMNS = (
    "theta_rad",
    "contraction_mm",
    "jacobian_mm_per_rad",
    "Fs_single_N",
    "Fs_total_N",
    "tau_s_Nmm",
)


def tum_curve(spec: TumSpec, thetas) -> dict:
    t = np.asarray(thetas, dtype=float)
    return {
        "theta_rad": t,
        "contraction_mm": np.asarray(contraction(spec, t)),
        "jacobian_mm_per_rad": np.asarray(jacobian(spec, t)),
        "Fs_single_N": np.asarray(strip_axial_force(spec, t)),
        "Fs_total_N": np.asarray(total_elastic_force(spec, t)),
        "tau_s_Nmm": np.asarray(elastic_torque(spec, t)),
    }
