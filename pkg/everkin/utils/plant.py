# Simulated everting arm
#
# A discrete-time stand-in for the physical arm: rate-limited steering
# motors, pressure-dependent growth speed, a payload/buckling limit and a
# constant gravity sag superposed on the commanded deflection.

import math
from dataclasses import dataclass, field, replace

from .errors import OutOfRange
from .kinematics import (
    ARM_LENGTH_MAX, DEFAULT_K, MODEL_ALPHA_MAX, N_MOTORS,
    ArmAngles, MotorAngles, PolarPose,
    angles_to_vector, check_k, cos_sin_deg, forward_model, inverse_model,
    motor_bearing, reduce_motor_set, vector_to_angles)

REFERENCE_PRESSURE = 8.0   # psi, where extension_speed_ref was measured
MAX_PRESSURE = 10.0
ZERO_PITCH = 1e-12         # deflections below this are treated as straight
MAX_DT = 0.1               # longest step, in seconds

FLAG_CLAMPED = "clamped"
FLAG_BUCKLED = "buckled"
FLAG_HELD = "held"
FLAG_THETA_UNDEFINED = "theta_undefined"


@dataclass(frozen = True)
class PlantConfig:
    pressure: float = 8.0
    extension_speed_ref: float = 0.27
    retraction_speed_ref: float = 0.25
    steering_motor_rate: float = 90.0
    k_true: float = DEFAULT_K
    payload_per_psi: float = 0.14
    gravity_sag_mag: float = 6.0
    gravity_sag_dir: float = 270.0
    lift_deadband: bool = True

    def __post_init__(self):
        if not (0 < self.pressure <= MAX_PRESSURE):
            raise OutOfRange("pressure should be in (0, %g] psi, got %r" % (MAX_PRESSURE, self.pressure))
        for name in ("extension_speed_ref", "retraction_speed_ref",
                     "steering_motor_rate", "payload_per_psi"):
            v = getattr(self, name)
            if not (v > 0):
                raise OutOfRange("%s should be > 0, got %r" % (name, v))
        check_k(self.k_true)
        if not (math.isfinite(self.gravity_sag_mag) and self.gravity_sag_mag >= 0):
            raise OutOfRange("gravity_sag_mag should be >= 0, got %r" % self.gravity_sag_mag)
        if not math.isfinite(self.gravity_sag_dir):
            raise OutOfRange("gravity_sag_dir should be finite, got %r" % self.gravity_sag_dir)

    @property
    def max_motor_angle(self):
        """Largest shaft angle keeping the commanded pitch inside the model range."""
        return MODEL_ALPHA_MAX / self.k_true


@dataclass(frozen = True)
class MotorCommand:
    """mu_R: target arm length in meters; mu_phi: target steering angles."""
    mu_R: float
    mu_phi: MotorAngles = field(default_factory = MotorAngles)

    def __post_init__(self):
        if not (math.isfinite(self.mu_R) and self.mu_R >= 0):
            raise OutOfRange("length command should be >= 0, got %r" % (self.mu_R,))
        if not isinstance(self.mu_phi, MotorAngles):
            object.__setattr__(self, "mu_phi", MotorAngles.from_seq(self.mu_phi))


@dataclass(frozen = True)
class PlantState:
    """
    length          arm length in meters, within [0, 1.2].
    motor_angles    actual shaft positions of the steering motors.
    time            seconds since the start of the run.
    measured_pose   pose as a tracker would see it, gravity sag included.
    payload         kg attached to the tip.
    theta_defined   False when the measured pitch is zero.
    flags           names of the conditions raised by the last step.
    """
    length: float
    motor_angles: MotorAngles
    time: float
    measured_pose: PolarPose
    payload: float = 0.0
    theta_defined: bool = True
    flags: tuple = ()


def extension_speed(config):
    """Growth speed in m/s, linear in pressure through the origin."""
    return config.extension_speed_ref * config.pressure / REFERENCE_PRESSURE

def retraction_speed(config):
    return config.retraction_speed_ref

def max_payload(config):
    """Buckling payload in kg at the configured pressure."""
    # rounded to the microgram so 0.14 kg/psi at 10 psi reads 1.4
    return round(config.payload_per_psi * config.pressure, 9)

def check_buckling(state, config):
    return state.payload > max_payload(config)

def apply_sag(pose, config):
    """
    @abstract     Superpose the gravity sag on a commanded deflection.
    @param pose   ArmAngles, or an (alpha, theta) pair, in degrees.
    @param config PlantConfig carrying the sag magnitude and direction.
    @return       ArmAngles of the vector sum; theta_defined is False when
                  the sum vanishes.
    """
    pose = _as_angles(pose)
    if config.gravity_sag_mag == 0:
        return pose
    u, v = angles_to_vector(pose.alpha, pose.theta)
    gu, gv = angles_to_vector(config.gravity_sag_mag, config.gravity_sag_dir)
    return _from_vector(u + gu, v + gv)

def remove_sag(pose, config):
    """Deflection that apply_sag maps onto `pose`."""
    pose = _as_angles(pose)
    if config.gravity_sag_mag == 0:
        return pose
    u, v = angles_to_vector(pose.alpha, pose.theta)
    gu, gv = angles_to_vector(config.gravity_sag_mag, config.gravity_sag_dir)
    return _from_vector(u - gu, v - gv)

def _as_angles(pose):
    if isinstance(pose, ArmAngles):
        return pose
    alpha, theta = pose
    if alpha < 0:
        raise OutOfRange("alpha should be >= 0, got %r" % alpha)
    return ArmAngles(float(alpha), float(theta), alpha > 0)

def _from_vector(u, v):
    if math.hypot(u, v) < ZERO_PITCH:
        return ArmAngles(0.0, 0.0, False)
    return vector_to_angles(u, v)

def lift_threshold(config, idx):
    """
    @abstract     Command a slack motor needs before it starts to move.
    @param config PlantConfig.
    @param idx    0-based motor index [int]
    @return       Threshold in motor degrees; 0 for motors whose cable does
                  not work against the sag.
    @note         A cable pulling against gravity has to carry the arm's
                  weight before it bends anything; the threshold is the shaft
                  angle whose opposing pitch equals the sag magnitude.
    """
    if not config.lift_deadband or config.gravity_sag_mag == 0:
        return 0.0
    c, _ = cos_sin_deg(motor_bearing(idx) - config.gravity_sag_dir)
    if c > -1e-12:
        return 0.0
    return config.gravity_sag_mag / (config.k_true * -c)

def measure(length, motor_angles, config):
    """Measured pose of the arm for the given shaft angles."""
    ang = forward_model(reduce_motor_set(motor_angles), config.k_true)
    sagged = apply_sag(ang, config)
    return PolarPose(length, sagged.alpha, sagged.theta), sagged.theta_defined

def initial_state(config, length = 0.0, motor_angles = None, payload = 0.0, time = 0.0):
    """
    @abstract             Plant state at rest.
    @param config         PlantConfig.
    @param length         Initial arm length in meters [float]
    @param motor_angles   Initial shaft angles, slack when None.
    @param payload        Tip load in kg [float]
    @return               PlantState with the measured pose filled in.
    """
    if not (0 <= length <= ARM_LENGTH_MAX):
        raise OutOfRange("length should be in [0, %g], got %r" % (ARM_LENGTH_MAX, length))
    if payload < 0:
        raise OutOfRange("payload should be >= 0, got %r" % payload)
    if motor_angles is None:
        motor_angles = MotorAngles()
    elif not isinstance(motor_angles, MotorAngles):
        motor_angles = MotorAngles.from_seq(motor_angles)
    pose, defined = measure(float(length), motor_angles, config)
    flags = () if defined else (FLAG_THETA_UNDEFINED,)
    return PlantState(float(length), motor_angles, float(time), pose,
                      float(payload), defined, flags)

def hold_state(config, pose, payload = 0.0):
    """Plant state whose shaft angles hold the measured pose `pose` under the sag."""
    d = remove_sag((pose.alpha, pose.theta), config)
    motors = inverse_model(d.alpha, d.theta, config.k_true)
    return initial_state(config, pose.R, motors, payload)

def is_reachable(pose, config):
    """
    @abstract     Whether a measured pose can be reached from the default
                  configuration by an inverse-model command.
    @param pose   PolarPose (R is not checked here).
    @param config PlantConfig.
    @return       bool
    """
    d = remove_sag((pose.alpha, pose.theta), config)
    if d.alpha > MODEL_ALPHA_MAX:
        return False
    motors = inverse_model(d.alpha, d.theta, config.k_true).values()
    for i in range(N_MOTORS):
        if 0 < motors[i] < lift_threshold(config, i):
            return False
    return True

def clamp_command(cmd, config):
    """
    @abstract     Bring a command into the plant's valid range.
    @return       (mu_R, mu_phi tuple, clamped flag)
    """
    clamped = False
    mu_R = cmd.mu_R
    if mu_R > ARM_LENGTH_MAX:
        mu_R, clamped = ARM_LENGTH_MAX, True
    mu_phi = list(cmd.mu_phi.values())
    top = config.max_motor_angle
    for i in range(N_MOTORS):
        if mu_phi[i] > top:
            mu_phi[i], clamped = top, True
    if all(v > 0 for v in mu_phi):
        # two-motor rule: the weakest pull is dropped
        mu_phi[mu_phi.index(min(mu_phi))] = 0.0
        clamped = True
    return mu_R, tuple(mu_phi), clamped

def _move_toward(cur, target, max_step):
    delta = target - cur
    if abs(delta) <= max_step:
        return target
    return cur + math.copysign(max_step, delta)

def step(state, cmd, dt, config):
    """
    @abstract     Advance the plant by one time step.
    @param state  Current PlantState.
    @param cmd    MotorCommand, clamped into range when needed.
    @param dt     Time step in seconds, in (0, MAX_DT] [float]
    @param config PlantConfig.
    @return       The next PlantState; the same inputs always give the same
                  output.
    """
    if not (0 < dt <= MAX_DT):
        raise OutOfRange("time step should be in (0, %g], got %r" % (MAX_DT, dt))
    flags = []
    mu_R, mu_phi, clamped = clamp_command(cmd, config)
    if clamped:
        flags.append(FLAG_CLAMPED)

    length = state.length
    if mu_R > length:
        if check_buckling(state, config):
            flags.append(FLAG_BUCKLED)
        else:
            length = min(_move_toward(length, mu_R, extension_speed(config) * dt), ARM_LENGTH_MAX)
    elif mu_R < length:
        length = max(_move_toward(length, mu_R, retraction_speed(config) * dt), 0.0)

    max_step = config.steering_motor_rate * dt
    cur = state.motor_angles.values()
    nxt = []
    held = False
    for i in range(N_MOTORS):
        if cur[i] == 0 and 0 < mu_phi[i] < lift_threshold(config, i):
            nxt.append(0.0)
            held = True
        else:
            nxt.append(max(0.0, _move_toward(cur[i], mu_phi[i], max_step)))
    if held:
        flags.append(FLAG_HELD)
    motors = MotorAngles(*nxt)

    pose, defined = measure(length, motors, config)
    if not defined:
        flags.append(FLAG_THETA_UNDEFINED)
    return replace(state, length = length, motor_angles = motors,
                   time = state.time + dt, measured_pose = pose,
                   theta_defined = defined, flags = tuple(flags))
