"""Friction-gated mode transition between grasping and in-hand rotation.

The friction generator couples the gripper body to the frame.  While the
torque carried through the TUM stays below the static threshold the body is
held and every bit of input rotation twists the TUM (approaching, then force
buildup once the finger touches the object).  When the threshold is reached
the coupling slips: the twist is frozen at its slip value, the body turns with
the input, and the input torque settles on the kinetic threshold.

The simulator is quasi-static; time only parametrises the input angle.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _schema
from . import linkage as lk
from . import tum_model as tm
from .errors import ConfigError, DomainError, RangeError


# -- friction generator ------------------------------------------------------


@dataclass(frozen=True)
class FrictionGenerator:
    tau_static: float
    tau_kinetic: float
    # rows of (spacer thickness [mm], tau_static [N*mm], tau_kinetic [N*mm])
    calibration: tuple = ()

    def __post_init__(self):
        num = _schema.require_number
        ts = num(self.tau_static, "tau_static", nonnegative=True)
        tk = num(self.tau_kinetic, "tau_kinetic", nonnegative=True)
        if tk > ts:
            raise ConfigError(f"tau_kinetic={tk:g} exceeds tau_static={ts:g}")
        rows = []
        for i, row in enumerate(self.calibration):
            if len(row) != 3:
                raise ConfigError(f"calibration row {i} must be [thickness, tau_static, tau_kinetic]")
            h, rs, rk = (num(v, f"calibration[{i}]", nonnegative=True) for v in row)
            if rk > rs:
                raise ConfigError(f"calibration row {i}: kinetic torque exceeds static torque")
            rows.append((h, rs, rk))
        for prev, cur in zip(rows, rows[1:]):
            if not cur[0] > prev[0]:
                raise ConfigError("calibration rows must be strictly ordered by spacer thickness")
            if cur[1] > prev[1] or cur[2] > prev[2]:
                raise ConfigError("calibration thresholds must be nonincreasing in spacer thickness")
        object.__setattr__(self, "tau_static", ts)
        object.__setattr__(self, "tau_kinetic", tk)
        object.__setattr__(self, "calibration", tuple(rows))

    @classmethod
    def from_dict(cls, data, where="friction"):
        return _schema.build(cls, data, where)

    def to_dict(self):
        d = _schema.to_dict(self)
        d["calibration"] = [list(r) for r in self.calibration]
        return d


def friction_from_spacer(gen: FrictionGenerator, thickness: float):
    """Static and kinetic thresholds for a spacer, interpolated linearly in the table."""
    if not gen.calibration:
        raise RangeError("friction generator has no spacer calibration table")
    h = np.array([r[0] for r in gen.calibration])
    if not h[0] <= thickness <= h[-1]:
        raise RangeError(
            f"spacer thickness {thickness:g} mm outside calibrated range [{h[0]:g}, {h[-1]:g}] mm"
        )
    ts = float(np.interp(thickness, h, [r[1] for r in gen.calibration]))
    tk = float(np.interp(thickness, h, [r[2] for r in gen.calibration]))
    return ts, tk


def with_spacer(gen: FrictionGenerator, thickness: float) -> FrictionGenerator:
    ts, tk = friction_from_spacer(gen, thickness)
    return dataclasses.replace(gen, tau_static=ts, tau_kinetic=tk)


@dataclass(frozen=True)
class GraspCheck:
    success: bool
    margin: float  # tau_static - peak elastic torque [N*mm]
    elastic_peak: float


def grasp_success(tum: tm.TumSpec, gen: FrictionGenerator) -> GraspCheck:
    """Full closure needs static friction strictly above the peak holding torque."""
    peak = tm.max_elastic_torque(tum)
    margin = gen.tau_static - peak
    return GraspCheck(margin > 0, margin, peak)


# -- scenario and state ------------------------------------------------------


class Phase(enum.Enum):
    APPROACHING = "A"
    FORCE_BUILDUP = "F"
    ROTATING = "R"


CLOSED_WITHOUT_SLIP = "ClosedWithoutSlip"
SLIPPED = "Rotating"
DURATION_ELAPSED = "DurationElapsed"


@dataclass(frozen=True)
class Scenario:
    tum: tm.TumSpec
    linkage: lk.LinkageSpec
    friction: FrictionGenerator
    input_speed: float  # rad/s
    contact_angle_theta2: float | None = None  # None: no object, close to stroke end
    contact_stiffness: float = 5000.0  # N*mm/rad
    duration: float = 10.0
    dt: float = 1e-3

    def __post_init__(self):
        num = _schema.require_number
        object.__setattr__(self, "input_speed", num(self.input_speed, "input_speed"))
        object.__setattr__(self, "dt", num(self.dt, "dt", positive=True))
        object.__setattr__(self, "duration", num(self.duration, "duration", nonnegative=True))
        if self.duration < self.dt:
            raise ConfigError(f"duration={self.duration:g} s must be >= dt={self.dt:g} s")
        object.__setattr__(
            self, "contact_stiffness", num(self.contact_stiffness, "contact_stiffness", nonnegative=True)
        )
        if self.contact_angle_theta2 is not None:
            object.__setattr__(
                self, "contact_angle_theta2", num(self.contact_angle_theta2, "contact_angle_theta2")
            )

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    @classmethod
    def from_dict(cls, data, where="scenario"):
        if not isinstance(data, dict):
            raise ConfigError(f"{where}: expected a JSON object")
        data = dict(data)
        for key, typ in (("tum", tm.TumSpec), ("linkage", lk.LinkageSpec), ("friction", FrictionGenerator)):
            if key in data:
                data[key] = typ.from_dict(data[key], f"{where}.{key}")
        scenario = _schema.build(cls, data, where)
        if scenario.input_speed == 0:
            raise ConfigError(f"{where}: input_speed must be nonzero")
        return scenario

    def to_dict(self):
        return {
            "tum": self.tum.to_dict(),
            "linkage": self.linkage.to_dict(),
            "friction": self.friction.to_dict(),
            "input_speed": self.input_speed,
            "contact_angle_theta2": self.contact_angle_theta2,
            "contact_stiffness": self.contact_stiffness,
            "duration": self.duration,
            "dt": self.dt,
        }


@dataclass(frozen=True)
class SimState:
    t: float
    theta_input: float
    theta_twist: float
    theta_body: float
    X: float
    theta2: float
    tau_transmitted: float
    grasp_torque: float
    phase: Phase
    contact_torque: float = 0.0
    slip_twist: float | None = None
    outcome: str | None = None
    linkage_state: lk.LinkageState | None = field(default=None, compare=False, repr=False)


TRACE_COLUMNS = (
    "t_s",
    "theta_input_rad",
    "theta_twist_rad",
    "theta_body_rad",
    "X_mm",
    "theta2_rad",
    "tau_transmitted_Nmm",
    "grasp_torque_Nmm",
    "phase",
)


@dataclass
class SimTrace:
    states: list
    summary: dict

    def columns(self) -> dict:
        s = self.states
        return {
            "t_s": [x.t for x in s],
            "theta_input_rad": [x.theta_input for x in s],
            "theta_twist_rad": [x.theta_twist for x in s],
            "theta_body_rad": [x.theta_body for x in s],
            "X_mm": [x.X for x in s],
            "theta2_rad": [x.theta2 for x in s],
            "tau_transmitted_Nmm": [x.tau_transmitted for x in s],
            "grasp_torque_Nmm": [x.grasp_torque for x in s],
            "phase": [x.phase.value for x in s],
        }


# -- quasi-static mechanics --------------------------------------------------


def _closing_sign(scenario: Scenario, theta2_open: float) -> float:
    if scenario.contact_angle_theta2 is None:
        return 0.0
    return 1.0 if scenario.contact_angle_theta2 >= theta2_open else -1.0


def _open_state(scenario: Scenario) -> lk.LinkageState:
    return lk.solve_configuration(scenario.linkage, 0.0)


def _load(scenario: Scenario, twist: float, closing: float, guess):
    """Torque needed to hold ``twist`` against the strips and the object."""
    X = tm.contraction(scenario.tum, twist)
    lstate = lk.solve_configuration(scenario.linkage, X, guess)
    penetration = 0.0
    if closing:
        penetration = max(0.0, closing * (lstate.theta2 - scenario.contact_angle_theta2))
    contact = math.copysign(scenario.contact_stiffness * penetration, twist) if penetration else 0.0
    tau = tm.elastic_torque(scenario.tum, twist) + contact
    return X, lstate, contact, tau


def _grasp(scenario: Scenario, twist: float, tau_in: float, lstate, in_contact: bool) -> float:
    # an unloaded finger carries no grasp torque
    if not in_contact or abs(twist) < tm.THETA_FLOOR:
        return 0.0
    fc = tm.contraction_force(scenario.tum, twist, tau_in)
    return lk.finger_jacobian(scenario.linkage, lstate.contraction_X, lstate) * fc


def initial_state(scenario: Scenario) -> SimState:
    ls = _open_state(scenario)
    return SimState(0.0, 0.0, 0.0, 0.0, 0.0, ls.theta2, 0.0, 0.0, Phase.APPROACHING, linkage_state=ls)


def step(scenario: Scenario, state: SimState) -> SimState:
    """Advance one time step of the quasi-static rule set.

    A step that would twist the TUM past its stroke returns ``state`` unchanged
    except for ``outcome = "ClosedWithoutSlip"``; the caller stops there.
    """
    d_input = scenario.input_speed * scenario.dt
    t = state.t + scenario.dt
    theta_input = state.theta_input + d_input
    lstate = state.linkage_state or lk.solve_configuration(scenario.linkage, state.X)

    slipping = state.phase is Phase.ROTATING
    loading = d_input != 0 and (
        state.theta_twist == 0 or (d_input > 0) == (state.theta_twist > 0)
    )
    if slipping and loading:
        tau = math.copysign(scenario.friction.tau_kinetic, state.theta_twist)
        grasp = state.grasp_torque
        if tau != state.tau_transmitted:
            grasp = _grasp(scenario, state.theta_twist, tau, lstate, state.contact_torque != 0)
        return dataclasses.replace(
            state,
            t=t,
            theta_input=theta_input,
            theta_body=state.theta_body + d_input,
            tau_transmitted=tau,
            grasp_torque=grasp,
        )

    closing = _closing_sign(scenario, _open_state(scenario).theta2)

    # held by static friction: the input goes into the twist
    twist = state.theta_twist + d_input
    if abs(twist) > scenario.tum.theta_limit:
        return dataclasses.replace(state, outcome=CLOSED_WITHOUT_SLIP)
    if d_input == 0:
        return dataclasses.replace(state, t=t)
    X, new_ls, contact, tau = _load(scenario, twist, closing, lstate)
    tau_s = scenario.friction.tau_static
    body = state.theta_body
    phase = Phase.FORCE_BUILDUP if contact else Phase.APPROACHING
    slip_twist = state.slip_twist
    if abs(tau) >= tau_s:

        def excess(tw):
            return abs(_load(scenario, tw, closing, lstate)[3]) - tau_s

        if excess(state.theta_twist) >= 0:
            slip = state.theta_twist
        else:
            lo, hi = sorted((state.theta_twist, twist))
            slip = brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        X, new_ls, contact, _ = _load(scenario, slip, closing, lstate)
        body += twist - slip
        twist = slip
        slip_twist = slip
        tau = math.copysign(tau_s, d_input)
        phase = Phase.ROTATING
    return SimState(
        t=t,
        theta_input=theta_input,
        theta_twist=twist,
        theta_body=body,
        X=X,
        theta2=new_ls.theta2,
        tau_transmitted=tau,
        grasp_torque=_grasp(scenario, twist, tau, new_ls, contact != 0),
        phase=phase,
        contact_torque=contact,
        slip_twist=slip_twist,
        linkage_state=new_ls,
    )


def simulate(scenario: Scenario) -> SimTrace:
    state = initial_state(scenario)
    states = [state]
    outcome = DURATION_ELAPSED
    for _ in range(scenario.n_steps):
        nxt = step(scenario, state)
        if nxt.outcome is not None:
            outcome = nxt.outcome
            break
        states.append(nxt)
        state = nxt
    return SimTrace(states, _summarise(scenario, states, outcome))


def _summarise(scenario: Scenario, states, outcome) -> dict:
    taus = np.array([abs(s.tau_transmitted) for s in states])
    phases = [s.phase for s in states]

    def first_time(phase):
        return next((s.t for s in states if s.phase is phase), None)

    t_contact = first_time(Phase.FORCE_BUILDUP)
    t_slip = first_time(Phase.ROTATING)
    if t_slip is not None and outcome == DURATION_ELAPSED:
        outcome = SLIPPED
    rotating = taus[[p is Phase.ROTATING for p in phases]]
    slip_twist = next((s.slip_twist for s in states if s.slip_twist is not None), None)
    frozen_elastic = abs(tm.elastic_torque(scenario.tum, slip_twist)) if slip_twist is not None else None
    plateau = float(np.mean(rotating[1:])) if rotating.size > 1 else None
    if scenario.contact_angle_theta2 is None:
        success = t_slip is None and outcome == CLOSED_WITHOUT_SLIP
    else:
        success = t_contact is not None and (t_slip is None or t_contact < t_slip)
    return {
        "outcome": outcome,
        "grasp_success": bool(success),
        "peak_torque_Nmm": float(taus.max()),
        # torque reacted by the slipping friction generator
        "plateau_torque_Nmm": plateau,
        # alternative reading: kinetic threshold plus the frozen elastic holding torque
        "plateau_with_elastic_Nmm": (
            scenario.friction.tau_kinetic + frozen_elastic if frozen_elastic is not None else None
        ),
        "frozen_elastic_torque_Nmm": frozen_elastic,
        "slip_twist_rad": slip_twist,
        "t_force_buildup_s": t_contact,
        "t_rotating_s": t_slip,
        "phases": "".join(_dedupe(p.value for p in phases)),
        "final_theta2_rad": states[-1].theta2,
        "n_states": len(states),
    }


def _dedupe(seq):
    last = None
    for x in seq:
        if x != last:
            yield x
            last = x
