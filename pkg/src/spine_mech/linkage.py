"""Slider-crank gripper linkage driven by the TUM contraction.

The loop closes as

    R1 cos(t1) + R2 cos(t2) - b - L + X = 0
    R1 sin(t1) + R2 sin(t2) - a + c     = 0

with both angles measured from +z, counterclockwise positive.  The two links
reach the point p(X) = (b + L - X, a - c) from the origin; for each feasible X
there are two mirror-image closures, told apart by the sign of sin(t2 - t1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _schema
from . import tum_model
from .errors import ConfigError, ConvergenceError, DomainError, NoRealSolutionError, SingularityError

RESIDUAL_TOL = 1e-9
MAX_ITER = 50
MAX_HALVINGS = 20
DEAD_POINT_TOL = 1e-9

BRANCHES = {"open-forward": 1, "open-reverse": -1}


class LinkageSingularityError(SingularityError):
    """Dead point: the loop-closure Jacobian is singular."""


@dataclass(frozen=True)
class LinkageSpec:
    offset_a: float
    offset_b: float
    offset_c: float
    link_R1: float
    link_R2: float
    tum_length_L: float
    branch: str = "open-forward"

    def __post_init__(self):
        for name in ("offset_a", "offset_b", "offset_c", "link_R1", "link_R2", "tum_length_L"):
            object.__setattr__(
                self, name, _schema.require_number(getattr(self, name), name, positive=True)
            )
        if self.branch not in BRANCHES:
            raise ConfigError(f"branch must be one of {sorted(BRANCHES)}, got {self.branch!r}")
        try:
            solve_configuration(self, 0.0)
        except NoRealSolutionError as exc:
            raise ConfigError(f"linkage cannot close at X = 0: {exc}") from exc

    @property
    def elbow(self) -> int:
        return BRANCHES[self.branch]

    @classmethod
    def from_dict(cls, data, where="linkage"):
        return _schema.build(cls, data, where)

    def to_dict(self):
        return _schema.to_dict(self)


@dataclass(frozen=True)
class LinkageState:
    contraction_X: float
    theta1: float
    theta2: float
    residual: tuple
    iterations: int = 0

    @property
    def elbow(self) -> int:
        return 1 if math.sin(self.theta2 - self.theta1) >= 0 else -1


def loop_residual(spec: LinkageSpec, theta1: float, theta2: float, X: float):
    r1 = (
        spec.link_R1 * math.cos(theta1)
        + spec.link_R2 * math.cos(theta2)
        - spec.offset_b
        - spec.tum_length_L
        + X
    )
    r2 = spec.link_R1 * math.sin(theta1) + spec.link_R2 * math.sin(theta2) - spec.offset_a + spec.offset_c
    return r1, r2


def _target(spec: LinkageSpec, X: float):
    return spec.offset_b + spec.tum_length_L - X, spec.offset_a - spec.offset_c


def reach_bounds(spec: LinkageSpec):
    return abs(spec.link_R1 - spec.link_R2), spec.link_R1 + spec.link_R2


def _check_reach(spec: LinkageSpec, X: float):
    px, py = _target(spec, X)
    d = math.hypot(px, py)
    lo, hi = reach_bounds(spec)
    if d > hi * (1 + 1e-12) or d < lo * (1 - 1e-12):
        raise NoRealSolutionError(
            f"no real closure at X={X:.6g} mm: slider-to-pivot distance {d:.6g} mm "
            f"outside [{lo:.6g}, {hi:.6g}] mm"
        )
    return px, py, d


def _closed_form_seed(spec: LinkageSpec, X: float, elbow: int):
    px, py, d = _check_reach(spec, X)
    R1, R2 = spec.link_R1, spec.link_R2
    cos_g = (d * d + R2 * R2 - R1 * R1) / (2.0 * d * R2)
    gamma = math.acos(max(-1.0, min(1.0, cos_g)))
    phi = math.atan2(py, px)
    for t2 in (phi + gamma, phi - gamma):
        t1 = math.atan2(py - R2 * math.sin(t2), px - R2 * math.cos(t2))
        if (1 if math.sin(t2 - t1) >= 0 else -1) == elbow:
            return t1, t2
    return t1, t2  # dead point: both closures coincide


def _newton(spec: LinkageSpec, X: float, t1: float, t2: float):
    R1, R2 = spec.link_R1, spec.link_R2
    f1, f2 = loop_residual(spec, t1, t2, X)
    norm = max(abs(f1), abs(f2))
    it = 0
    while norm > RESIDUAL_TOL * 1e-3 and it < MAX_ITER:
        it += 1
        s1, c1, s2, c2 = math.sin(t1), math.cos(t1), math.sin(t2), math.cos(t2)
        # d(r1, r2)/d(t1, t2)
        a11, a12, a21, a22 = -R1 * s1, -R2 * s2, R1 * c1, R2 * c2
        det = a11 * a22 - a12 * a21
        if abs(det) < 1e-14 * R1 * R2:
            break
        d1 = (f1 * a22 - a12 * f2) / det
        d2 = (a11 * f2 - a21 * f1) / det
        step = 1.0
        for _ in range(MAX_HALVINGS + 1):
            n1, n2 = t1 - step * d1, t2 - step * d2
            g1, g2 = loop_residual(spec, n1, n2, X)
            new_norm = max(abs(g1), abs(g2))
            if new_norm < norm:
                break
            step *= 0.5
        else:
            break
        t1, t2, f1, f2, norm = n1, n2, g1, g2, new_norm
    return t1, t2, (f1, f2), norm, it


def solve_configuration(spec: LinkageSpec, X: float, guess: LinkageState | None = None) -> LinkageState:
    """Solve the loop for (theta1, theta2) at contraction ``X``.

    Without ``guess`` the closure on ``spec.branch`` is returned.  With a guess,
    Newton starts from it and the result stays on the guess's branch.
    """
    X = float(X)
    if not math.isfinite(X):
        raise DomainError("X must be finite")
    _check_reach(spec, X)
    if guess is None:
        elbow = spec.elbow
        t1, t2 = _closed_form_seed(spec, X, elbow)
    else:
        elbow = guess.elbow
        t1, t2 = guess.theta1, guess.theta2
    t1, t2, res, norm, it = _newton(spec, X, t1, t2)
    if guess is not None and (norm > RESIDUAL_TOL or _elbow(t1, t2) != elbow):
        # drifted across the dead point or stalled: restart on the guess's branch
        s1, s2 = _closed_form_seed(spec, X, elbow)
        s1 += 2 * math.pi * round((guess.theta1 - s1) / (2 * math.pi))
        s2 += 2 * math.pi * round((guess.theta2 - s2) / (2 * math.pi))
        t1, t2, res, norm, more = _newton(spec, X, s1, s2)
        it += more
    if norm > RESIDUAL_TOL:
        raise ConvergenceError(
            f"Newton did not converge at X={X:.6g} mm after {it} iterations "
            f"(residual {norm:.3g} mm, theta1={t1:.6g}, theta2={t2:.6g})"
        )
    return LinkageState(X, t1, t2, res, it)


def _elbow(t1, t2):
    return 1 if math.sin(t2 - t1) >= 0 else -1


def finger_jacobian(spec: LinkageSpec, X: float, state: LinkageState) -> float:
    """d(theta2)/dX in rad/mm by implicit differentiation of the loop."""
    r = loop_residual(spec, state.theta1, state.theta2, X)
    if max(abs(r[0]), abs(r[1])) > 1e-6:
        raise DomainError(f"state does not close the loop at X={X:.6g} mm (residual {r})")
    s = math.sin(state.theta2 - state.theta1)
    if abs(s) < DEAD_POINT_TOL:
        raise LinkageSingularityError(
            f"dead point at X={X:.6g} mm: links are collinear (sin(theta2 - theta1) = {s:.3g})"
        )
    # [-R1 s1, -R2 s2; R1 c1, R2 c2] [dt1; dt2] = [-1; 0]
    return math.cos(state.theta1) / (spec.link_R2 * s)


def grasp_torque(lspec: LinkageSpec, tspec, theta: float, tau_in: float, guess=None,
                 theta_floor: float = tum_model.THETA_FLOOR) -> float:
    """Finger torque J_g * F_c for input torque ``tau_in`` at twist ``theta``."""
    fc = tum_model.contraction_force(tspec, theta, tau_in, theta_floor=theta_floor)
    X = tum_model.contraction(tspec, theta)
    state = solve_configuration(lspec, X, guess)
    return finger_jacobian(lspec, X, state) * fc


def check_stroke_feasible(spec: LinkageSpec, x_end: float):
    """Raise unless the loop closes without a dead point for every X in [0, x_end]."""
    lo, hi = reach_bounds(spec)
    px0, py = _target(spec, 0.0)
    candidates = [0.0, x_end]
    if 0.0 < px0 < x_end:
        candidates.append(px0)  # horizontal distance vanishes here
    dists = [math.hypot(px0 - x, py) for x in candidates]
    if max(dists) >= hi or min(dists) <= lo:
        raise NoRealSolutionError(
            f"linkage reaches a dead point or opens out within X in [0, {x_end:.6g}] mm "
            f"(distance range [{min(dists):.6g}, {max(dists):.6g}] vs [{lo:.6g}, {hi:.6g}])"
        )


def finger_travel(spec: LinkageSpec, x_end: float) -> float:
    """Signed finger rotation theta2(x_end) - theta2(0) along one branch [rad]."""
    check_stroke_feasible(spec, x_end)
    start = solve_configuration(spec, 0.0)
    end = solve_configuration(spec, x_end)
    # theta2 = atan2(py, px) + elbow*gamma and both terms vary continuously on
    # a feasible stroke, which fixes the 2*pi ambiguity of the solved angles
    expected = _polar_theta2(spec, x_end) - _polar_theta2(spec, 0.0)
    travel = end.theta2 - start.theta2
    return travel + 2 * math.pi * round((expected - travel) / (2 * math.pi))


def _polar_theta2(spec: LinkageSpec, X: float) -> float:
    px, py = _target(spec, X)
    d = math.hypot(px, py)
    R1, R2 = spec.link_R1, spec.link_R2
    gamma = math.acos(max(-1.0, min(1.0, (d * d + R2 * R2 - R1 * R1) / (2.0 * d * R2))))
    return math.atan2(py, px) + spec.elbow * gamma


CURVE_COLUMNS = ("X_mm", "theta1_rad", "theta2_rad", "Jg_rad_per_mm")


def linkage_curve(spec: LinkageSpec, xs) -> dict:
    """Continuation sweep of the loop over the contraction values ``xs``."""
    xs = np.asarray(xs, dtype=float)
    t1 = np.empty_like(xs)
    t2 = np.empty_like(xs)
    jg = np.empty_like(xs)
    state = None
    for i, x in enumerate(xs):
        state = solve_configuration(spec, x, state)
        t1[i], t2[i] = state.theta1, state.theta2
        jg[i] = finger_jacobian(spec, x, state)
    return {"X_mm": xs, "theta1_rad": t1, "theta2_rad": t2, "Jg_rad_per_mm": jg}
