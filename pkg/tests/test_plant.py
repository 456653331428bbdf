from dataclasses import replace

import numpy as np
import pytest

from everkin.utils.errors import OutOfRange
from everkin.utils.kinematics import (
    ArmAngles, MotorAngles, PolarPose, forward_model, inverse_model)
from everkin.utils.plant import (
    FLAG_BUCKLED, FLAG_CLAMPED, FLAG_HELD, MAX_DT, MotorCommand, PlantConfig,
    apply_sag, check_buckling, extension_speed, hold_state, initial_state,
    is_reachable, lift_threshold, max_payload, remove_sag, step)

NO_SAG = PlantConfig(gravity_sag_mag = 0.0)


def test_extension_speed():
    assert extension_speed(PlantConfig(pressure = 8)) == 0.27
    assert extension_speed(PlantConfig(pressure = 4)) == pytest.approx(0.135)
    assert extension_speed(PlantConfig(pressure = 1e-6)) < 1e-7


def test_max_payload():
    assert max_payload(PlantConfig(pressure = 10)) == 1.4
    assert max_payload(PlantConfig(pressure = 5)) == pytest.approx(0.7)


def test_check_buckling():
    cfg = PlantConfig(pressure = 10)
    assert not check_buckling(initial_state(cfg, payload = 1.4), cfg)
    assert check_buckling(initial_state(cfg, payload = 1.5), cfg)
    assert not check_buckling(initial_state(cfg), cfg)


def test_config_validation():
    with pytest.raises(OutOfRange):
        PlantConfig(pressure = 0)
    with pytest.raises(OutOfRange):
        PlantConfig(pressure = 10.5)
    with pytest.raises(OutOfRange):
        PlantConfig(steering_motor_rate = 0)
    with pytest.raises(OutOfRange):
        PlantConfig(k_true = -1)


def test_apply_sag_examples():
    assert apply_sag((12.0, 33.0), NO_SAG) == ArmAngles(12.0, 33.0, True)
    cfg = PlantConfig()
    flat = apply_sag((6, 90), cfg)
    assert flat.alpha == 0 and not flat.theta_defined
    ang = apply_sag((30, 0), cfg)
    assert ang.alpha == pytest.approx(30.594, abs = 1e-3)
    assert ang.theta == pytest.approx(348.69, abs = 1e-2)


def test_remove_sag_inverts_apply_sag():
    cfg = PlantConfig()
    for alpha, theta in ((10, 5), (25, 200), (40, 300)):
        back = apply_sag(remove_sag((alpha, theta), cfg), cfg)
        assert back.alpha == pytest.approx(alpha, abs = 1e-9)
        assert back.theta == pytest.approx(theta, abs = 1e-9)


def test_step_extension_at_reference_pressure():
    st = initial_state(NO_SAG, length = 0.0)
    for _ in range(10):
        st = step(st, MotorCommand(1.2), 0.1, NO_SAG)
    assert st.length == pytest.approx(0.27, abs = 1e-12)
    assert st.time == pytest.approx(1.0)


def test_step_at_setpoint_keeps_length():
    st = initial_state(NO_SAG, length = 0.5)
    for dt in (0.001, 0.05, 0.1):
        assert step(st, MotorCommand(0.5), dt, NO_SAG).length == 0.5


def test_step_retraction_speed():
    st = initial_state(NO_SAG, length = 1.0)
    nxt = step(st, MotorCommand(0.0), 0.1, NO_SAG)
    assert nxt.length == pytest.approx(1.0 - 0.025)


def test_converged_motors_give_model_pose():
    st = initial_state(NO_SAG, length = 0.6)
    cmd = MotorCommand(0.6, MotorAngles(100, 0, 0))
    for _ in range(200):
        st = step(st, cmd, 0.01, NO_SAG)
    assert st.motor_angles.values() == (100, 0, 0)
    assert st.measured_pose.alpha == pytest.approx(10.4, abs = 1e-12)
    assert st.measured_pose.theta == 0


def test_rate_limits_hold_exactly():
    rng = np.random.default_rng(11)
    cfg = PlantConfig()
    dt = 1.0 / 120
    st = initial_state(cfg, length = 0.3)
    for _ in range(400):
        phis = rng.uniform(0, 400, 3)
        phis[rng.integers(0, 3)] = 0.0
        cmd = MotorCommand(float(rng.uniform(0, 1.2)), MotorAngles(*phis))
        nxt = step(st, cmd, dt, cfg)
        assert nxt.length - st.length <= extension_speed(cfg) * dt + 1e-12
        assert st.length - nxt.length <= cfg.retraction_speed_ref * dt + 1e-12
        for a, b in zip(st.motor_angles.values(), nxt.motor_angles.values()):
            assert abs(b - a) <= cfg.steering_motor_rate * dt + 1e-12
        st = nxt


def test_three_motor_command_is_clamped():
    st = initial_state(NO_SAG, length = 0.5)
    nxt = step(st, MotorCommand(0.5, MotorAngles(10, 20, 5)), 0.1, NO_SAG)
    assert FLAG_CLAMPED in nxt.flags
    assert nxt.motor_angles.phi3 == 0


def test_buckled_arm_does_not_extend():
    cfg = PlantConfig(pressure = 5)
    st = initial_state(cfg, length = 0.4, payload = 1.0)
    nxt = step(st, MotorCommand(1.0), 0.1, cfg)
    assert nxt.length == 0.4
    assert FLAG_BUCKLED in nxt.flags
    back = step(st, MotorCommand(0.2), 0.1, cfg)
    assert back.length < 0.4


def test_slack_cable_against_gravity_is_held():
    cfg = PlantConfig()
    thr = lift_threshold(cfg, 1)
    assert thr == pytest.approx(6.0 / (0.104 * np.cos(np.radians(30))))
    assert lift_threshold(cfg, 0) == 0
    assert lift_threshold(cfg, 2) == 0
    assert lift_threshold(NO_SAG, 1) == 0

    st = initial_state(cfg, length = 0.5)
    nxt = step(st, MotorCommand(0.5, MotorAngles(0, thr - 1, 0)), 0.1, cfg)
    assert nxt.motor_angles.phi2 == 0
    assert FLAG_HELD in nxt.flags
    nxt = step(st, MotorCommand(0.5, MotorAngles(0, thr + 1, 0)), 0.1, cfg)
    assert nxt.motor_angles.phi2 == pytest.approx(9.0)


def test_step_is_deterministic():
    cfg = PlantConfig()
    cmds = [MotorCommand(0.8, MotorAngles(200, 90, 0)), MotorCommand(0.7, MotorAngles(0, 150, 40))]
    runs = []
    for _ in range(2):
        st = initial_state(cfg, length = 0.3)
        trace = []
        for i in range(300):
            st = step(st, cmds[i // 150], 1.0 / 120, cfg)
            trace.append(st)
        runs.append(trace)
    assert runs[0] == runs[1]


def test_step_rejects_bad_dt():
    st = initial_state(NO_SAG)
    with pytest.raises(OutOfRange):
        step(st, MotorCommand(0.0), 0.0, NO_SAG)
    for dt in (MAX_DT * 1.5, 1.0, float("nan"), float("inf")):
        with pytest.raises(OutOfRange):
            step(st, MotorCommand(0.0), dt, NO_SAG)
    assert step(st, MotorCommand(0.0), MAX_DT, NO_SAG).time == MAX_DT


def test_hold_state_measures_requested_pose():
    cfg = PlantConfig()
    st = hold_state(cfg, PolarPose(0.8, 10, 5))
    assert st.measured_pose.alpha == pytest.approx(10, abs = 1e-9)
    assert st.measured_pose.theta == pytest.approx(5, abs = 1e-9)
    phi = st.motor_angles.values()
    assert phi[0] == pytest.approx(133.6, abs = 0.1)
    assert phi[1] == pytest.approx(54.1, abs = 0.1)
    assert phi[2] == 0


def test_sag_reachability():
    cfg = PlantConfig()
    assert is_reachable(PolarPose(0.8, 30, 45), cfg)
    assert not is_reachable(PolarPose(0.8, 10.4, 350), cfg)
    assert is_reachable(PolarPose(0.8, 10.4, 350), NO_SAG)


def test_plant_consistency_without_sag():
    st = initial_state(NO_SAG, length = 0.5, motor_angles = inverse_model(20, 75))
    ang = forward_model(st.motor_angles)
    assert st.measured_pose.alpha == ang.alpha
    assert st.measured_pose.theta == ang.theta
    st2 = replace(st)
    assert st2 == st
