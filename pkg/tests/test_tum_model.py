import dataclasses
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spine_mech import tum_model as tm
from spine_mech.errors import ConfigError, DomainError, SingularityError

from conftest import THETA_105, random_tum


def spec_with(tum, **kw):
    return dataclasses.replace(tum, **kw)


def mp_chain(R, L, E, I, theta):
    """Independent 50-digit evaluation of the kinematic and buckling chain."""
    mp.mp.dps = 50
    R, L, E, I, t = (mp.mpf(v) for v in (R, L, E, I, theta))
    X = L - mp.sqrt(L**2 - (R * t) ** 2)
    J = mp.diff(lambda u: L - mp.sqrt(L**2 - (R * u) ** 2), t)
    chord = mp.sqrt(L**2 - (R * t) ** 2 + 4 * R**2 * mp.sin(t / 2) ** 2)
    beta = mp.atan(2 * R * mp.sin(t / 2) / (L - X))
    P = mp.pi**2 * E * I / chord**2
    return {"X": X, "J": J, "dS": L - chord, "beta": beta, "P": P, "Fs": P * mp.cos(beta)}


# -- spec validation --------------------------------------------------------


def test_spec_rejects_theta_max_past_singularity(tum):
    with pytest.raises(ConfigError, match="singularity"):
        spec_with(tum, max_rotation_theta_max=2.0)


@pytest.mark.parametrize("field", ["radius_R", "strip_length_L", "youngs_modulus_E", "second_moment_I"])
def test_spec_rejects_nonpositive(tum, field):
    with pytest.raises(ConfigError):
        spec_with(tum, **{field: 0.0})


def test_spec_rejects_fractional_strip_count(tum):
    with pytest.raises(ConfigError):
        spec_with(tum, n_strips=2.5)


def test_spec_round_trips_through_dict(tum):
    assert tm.TumSpec.from_dict(tum.to_dict()) == tum


def test_spec_from_dict_rejects_unknown_field(tum):
    with pytest.raises(ConfigError, match="unknown"):
        tm.TumSpec.from_dict({**tum.to_dict(), "colour": "red"})


def test_theta_limit_caps_at_99_percent(tum):
    wide = spec_with(tum, max_rotation_theta_max=1.999)
    assert wide.theta_limit == pytest.approx(0.99 * 2.0)
    assert tum.theta_limit == tum.max_rotation_theta_max


# -- stroke design ------------------------------------------------------------


def test_strip_inclination_examples(tum):
    s = spec_with(tum, top_plate_thickness_w2=0.0, bottom_plate_thickness_w3=0.0)
    assert tm.strip_inclination(s, 0.0) == 0.0
    assert tm.strip_inclination(s, 40.0) == pytest.approx(math.pi / 2)
    s = spec_with(tum, top_plate_thickness_w2=2.0, bottom_plate_thickness_w3=2.0)
    assert tm.strip_inclination(s, 16.0) == pytest.approx(math.pi / 6, rel=1e-14)


def test_strip_inclination_domain_errors(tum):
    with pytest.raises(DomainError, match="<= L"):
        tm.strip_inclination(tum, 100.0)
    with pytest.raises(DomainError, match="0 <="):
        tm.strip_inclination(tum, -10.0)


def test_inter_strip_distance_examples(tum):
    s = spec_with(tum, top_plate_thickness_w2=0.0, bottom_plate_thickness_w3=0.0)
    assert tm.inter_strip_distance(s, 0.0) == 0.0
    s = spec_with(tum, n_strips=4, top_plate_thickness_w2=2.0, bottom_plate_thickness_w3=2.0)
    assert tm.inter_strip_distance(s, 16.0) == pytest.approx(math.pi * 20 * 20 * 2 / (4 * 40), rel=1e-14)
    assert tm.inter_strip_distance(s, 16.0) == pytest.approx(15.70796, abs=1e-5)
    doubled = spec_with(s, n_strips=8)
    assert tm.inter_strip_distance(doubled, 16.0) == pytest.approx(tm.inter_strip_distance(s, 16.0) / 2)


def test_radius_constraint_examples(tum):
    s = spec_with(tum, strip_width_w1=0.0)
    check = tm.check_radius_constraint(s)
    assert check.passed and check.margin == s.radius_R

    s = spec_with(tum, strip_width_w1=5.0, n_strips=4, top_plate_thickness_w2=2.0, bottom_plate_thickness_w3=2.0)
    check = tm.check_radius_constraint(s)
    assert check.r_min == pytest.approx(800 / (8 * math.pi), rel=1e-14)
    assert check.r_min == pytest.approx(31.83, abs=5e-3)
    assert not check.passed and check.margin == pytest.approx(-11.83, abs=5e-3)

    check = tm.check_radius_constraint(spec_with(s, radius_R=32.0, max_rotation_theta_max=1.2))
    assert check.passed and check.margin == pytest.approx(0.17, abs=5e-3)


def test_radius_constraint_degenerate_plates(tum):
    s = spec_with(tum, top_plate_thickness_w2=0.0, bottom_plate_thickness_w3=0.0)
    with pytest.raises(DomainError, match="degenerate"):
        tm.check_radius_constraint(s)


def test_radius_constraint_equivalent_to_strip_spacing():
    # passing the radius condition <=> adjacent joints at least w1 apart with plates touching
    rng = np.random.default_rng(7)
    for _ in range(500):
        s = random_tum(rng)
        check = tm.check_radius_constraint(s)
        d_w = tm.inter_strip_distance(s, 0.0)
        if abs(check.margin) > 1e-9 * s.radius_R:
            assert check.passed == (d_w >= s.strip_width_w1)


# -- kinematics ----------------------------------------------------------------


def test_contraction_prototype_matches_high_precision(tum):
    oracle = mp_chain(20, 40, 1200, 1.71, THETA_105)
    x = tm.contraction(tum, THETA_105)
    assert x == pytest.approx(float(oracle["X"]), rel=1e-14)
    assert x == pytest.approx(23.98, abs=0.01)


def test_contraction_zero_and_singularity(tum):
    assert tm.contraction(tum, 0.0) == 0.0
    with pytest.raises(SingularityError):
        tm.contraction(tum, 2.0)
    with pytest.raises(SingularityError):
        tm.jacobian(tum, -2.5)
    with pytest.raises(DomainError):
        tm.contraction(tum, float("nan"))


def test_contraction_strictly_increasing(tum):
    grid = np.linspace(0.0, tum.theta_limit, 5001)
    assert np.all(np.diff(tm.contraction(tum, grid)) > 0)


def test_contraction_vectorised_matches_scalar(tum):
    grid = np.linspace(-1.8, 1.8, 37)
    vec = tm.contraction(tum, grid)
    assert isinstance(vec, np.ndarray)
    assert all(vec[i] == tm.contraction(tum, float(t)) for i, t in enumerate(grid))


def test_rotation_for_contraction(tum):
    assert tm.rotation_for_contraction(tum, 0.0) == 0.0
    assert tm.rotation_for_contraction(tum, 23.98) == pytest.approx(1.8326, abs=1e-3)
    thetas = np.linspace(0.01, tum.theta_limit, 50)
    back = tm.rotation_for_contraction(tum, tm.contraction(tum, thetas))
    np.testing.assert_allclose(back, thetas, rtol=1e-12)
    with pytest.raises(SingularityError, match="stroke"):
        tm.rotation_for_contraction(tum, 40.0)
    with pytest.raises(DomainError):
        tm.rotation_for_contraction(tum, -1.0)


def test_jacobian_prototype_value(tum):
    oracle = mp_chain(20, 40, 1200, 1.71, THETA_105)
    assert tm.jacobian(tum, THETA_105) == pytest.approx(float(oracle["J"]), rel=1e-13)
    assert tm.jacobian(tum, THETA_105) == pytest.approx(45.76, abs=0.01)
    assert tm.jacobian(tum, 0.0) == 0.0


def test_contraction_rate(tum):
    assert tm.contraction_rate(tum, 1.0, 0.0) == 0.0
    assert tm.contraction_rate(tum, 0.0, 3.0) == 0.0
    rng = np.random.default_rng(3)
    for t, w in zip(rng.uniform(-1.8, 1.8, 20), rng.normal(size=20)):
        assert tm.contraction_rate(tum, t, w) == tm.jacobian(tum, t) * w


# -- elasticity ----------------------------------------------------------------


def test_prototype_chain_against_high_precision(tum):
    o = mp_chain(20, 40, 1200, 1.71, THETA_105)
    state = tm.strip_state(tum, THETA_105)
    assert state.chord_shortening_dS == pytest.approx(float(o["dS"]), rel=1e-12)
    assert state.beta == pytest.approx(float(o["beta"]), rel=1e-13)
    assert state.buckling_load_P == pytest.approx(float(o["P"]), rel=1e-13)
    assert state.axial_force_Fs_single == pytest.approx(float(o["Fs"]), rel=1e-13)
    # hand values
    assert state.chord_shortening_dS == pytest.approx(4.45, abs=0.01)
    assert state.beta == pytest.approx(1.103, abs=1e-3)
    assert math.degrees(state.beta) == pytest.approx(63.2, abs=0.05)
    assert state.buckling_load_P == pytest.approx(16.0, abs=0.05)
    assert state.axial_force_Fs_single == pytest.approx(7.2, abs=0.05)


def test_chord_radicand_hand_value(tum):
    ds = tm.chord_shortening(tum, THETA_105)
    # hand terms are rounded; the stated sum 1263.9 carries the rounding of the second
    assert 20 * THETA_105 == pytest.approx(36.652, abs=5e-4)
    assert 40**2 - (20 * THETA_105) ** 2 == pytest.approx(256.7, abs=0.1)
    assert 4 * 20**2 * math.sin(THETA_105 / 2) ** 2 == pytest.approx(1007.2, abs=0.2)
    assert (40 - ds) ** 2 == pytest.approx(40**2 - (20 * THETA_105) ** 2 + 4 * 20**2 * math.sin(THETA_105 / 2) ** 2)
    assert ds == pytest.approx(4.45, abs=5e-3)


def test_zero_twist_limits(tum):
    euler = math.pi**2 * 1200 * 1.71 / 40**2
    assert tm.chord_shortening(tum, 0.0) == 0.0
    assert tm.beta_angle(tum, 0.0) == 0.0
    assert tm.buckling_load(tum, 0.0) == pytest.approx(euler, rel=1e-15)
    assert tm.strip_axial_force(tum, 0.0) == pytest.approx(euler, rel=1e-15)
    assert tm.elastic_torque(tum, 0.0) == 0.0


def test_total_elastic_force(tum):
    four = spec_with(tum, n_strips=4)
    assert tm.total_elastic_force(four, 0.0) == pytest.approx(4 * math.pi**2 * 1200 * 1.71 / 1600, rel=1e-15)
    assert tm.total_elastic_force(four, 0.0) == pytest.approx(50.6, abs=0.05)
    one = spec_with(tum, n_strips=1)
    for t in (0.3, 1.0, 1.7):
        assert tm.total_elastic_force(one, t) == tm.strip_axial_force(one, t)
        assert tm.total_elastic_force(spec_with(tum, n_strips=3), t) == pytest.approx(3 * tm.strip_axial_force(one, t))


def test_dS_never_exceeds_X_and_P_nondecreasing(tum):
    grid = np.linspace(0.0, tum.theta_limit, 2001)
    ds = tm.chord_shortening(tum, grid)
    x = tm.contraction(tum, grid)
    assert np.all(ds <= x + 1e-12)
    assert np.all(np.diff(tm.buckling_load(tum, grid)) >= 0)


def test_cos_beta_identity(tum):
    rng = np.random.default_rng(11)
    for t in rng.uniform(-1.8, 1.8, 50):
        x = tm.contraction(tum, t)
        lhs = math.cos(tm.beta_angle(tum, t))
        rhs = (40 - x) / math.sqrt(4 * 400 * math.sin(t / 2) ** 2 + (40 - x) ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-14)


def test_deflection_profile(tum):
    zero = tm.deflection_profile(tum, 1.0, 0.0, 11)
    assert np.all(zero.deflection == 0)
    prof = tm.deflection_profile(tum, 1.0, 2.5, 101)
    assert prof.half_period_length == pytest.approx(40 - tm.chord_shortening(tum, 1.0))
    assert prof.deflection[0] == 0.0 and prof.deflection[-1] == 0.0
    assert prof.deflection[50] == pytest.approx(2.5, rel=1e-15)
    assert prof.samples[50][0] == pytest.approx(prof.half_period_length / 2)
    with pytest.raises(DomainError):
        tm.deflection_profile(tum, 1.0, 1.0, 1)
    with pytest.raises(DomainError):
        tm.deflection_profile(tum, 1.0, -1.0, 5)


@pytest.mark.parametrize("theta", [0.0, 0.7, THETA_105])
def test_deflection_profile_solves_buckling_ode(tum, theta):
    A = 3.0
    prof = tm.deflection_profile(tum, theta, A, 4001)
    h = prof.arc[1] - prof.arc[0]
    y = prof.deflection
    ypp = (y[2:] - 2 * y[1:-1] + y[:-2]) / h**2
    P = tm.buckling_load(tum, theta)
    residual = np.abs(tum.flexural_rigidity * ypp + P * y[1:-1])
    assert residual.max() <= 1e-6 * P * A


def test_elastic_torque_sign_and_virtual_work(tum):
    for t in (-1.5, -0.2, 0.2, 1.5):
        tau = tm.elastic_torque(tum, t)
        assert math.copysign(1, tau) == math.copysign(1, t)
    # virtual work: holding torque equals the N-strip force times dX/dtheta
    t, h = 1.2, 1e-6
    dx = (tm.contraction(tum, t + h) - tm.contraction(tum, t - h)) / (2 * h)
    assert tm.elastic_torque(tum, t) == pytest.approx(dx * tm.total_elastic_force(tum, t), rel=1e-7)


def test_contraction_force(tum):
    t = 1.0
    hold = tm.elastic_torque(tum, t)
    assert tm.contraction_force(tum, t, hold) == pytest.approx(0.0, abs=1e-12)
    expected = 300.0 / tm.jacobian(tum, 1.0) - tm.total_elastic_force(tum, 1.0)
    assert tm.contraction_force(tum, 1.0, 300.0) == expected
    slope = tm.contraction_force(tum, t, 101.0) - tm.contraction_force(tum, t, 100.0)
    assert slope == pytest.approx(1 / tm.jacobian(tum, t), rel=1e-9)
    vec = tm.contraction_force(tum, np.array([0.5, 1.0]), 300.0)
    assert vec.shape == (2,)
    with pytest.raises(SingularityError, match="zero twist"):
        tm.contraction_force(tum, 0.0, 100.0)
    with pytest.raises(SingularityError):
        tm.contraction_force(tum, 5e-4, 100.0)
    assert math.isfinite(tm.contraction_force(tum, 5e-4, 100.0, theta_floor=1e-4))


# -- calibration and cross-checks --------------------------------------------


def test_calibrate_n_strips_prototype(tum):
    fit = tm.calibrate_n_strips(tum, THETA_105, 175.0)
    assert fit.n_strips == 1
    assert fit.torque == pytest.approx(330.48, abs=0.01)
    assert fit.residual == pytest.approx(fit.torque - 175.0)
    assert fit.spec.n_strips == 1


def test_calibrate_n_strips_recovers_known_count(tum):
    target = tm.elastic_torque(spec_with(tum, n_strips=6), 1.2)
    assert tm.calibrate_n_strips(tum, 1.2, target).n_strips == 6


def test_closed_form_crosscheck(tum):
    c = tm.closed_form_crosscheck(tum, THETA_105)
    assert c.fs_composed == tm.strip_axial_force(tum, THETA_105)
    # radical over the whole denominator: P R^2 sin(theta) / (L - dS)
    ds = tm.chord_shortening(tum, THETA_105)
    P = tm.buckling_load(tum, THETA_105)
    assert c.moment_whole_radical == pytest.approx(P * 400 * math.sin(THETA_105) / (40 - ds), rel=1e-13)
    assert c.moment_whole_radical == pytest.approx(174.19, abs=0.01)
    assert abs(c.printed_divergence) > 0.1
    with pytest.raises(DomainError):
        tm.closed_form_crosscheck(tum, 0.0)


def test_tum_curve_columns(tum):
    cols = tm.tum_curve(tum, np.linspace(-1, 1, 5))
    assert tuple(cols) == tm.CURVE_COLUMNS
    assert all(len(v) == 5 for v in cols.values())


# -- properties ------------------------------------------------------------------


EVEN = (tm.contraction, tm.chord_shortening, tm.beta_angle, tm.buckling_load, tm.strip_axial_force)
ODD = (tm.jacobian, tm.elastic_torque)


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), frac=st.floats(-1.0, 1.0))
def test_parity_random_specs(seed, frac):
    s = random_tum(np.random.default_rng(seed))
    t = frac * s.theta_limit
    for f in EVEN:
        assert f(s, t) == f(s, -t)
    for f in ODD:
        assert f(s, -t) == -f(s, t)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_singularity_guard_raises_documented_error(seed):
    s = random_tum(np.random.default_rng(seed))
    for t in (s.singular_theta, 1.5 * s.singular_theta, -s.singular_theta):
        for f in (tm.contraction, tm.jacobian, tm.beta_angle, tm.elastic_torque):
            with pytest.raises(SingularityError):
                f(s, t)
