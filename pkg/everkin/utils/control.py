# Closed-loop position control of the everting arm
#
# Two decoupled loops: a PID on arm length driving the center motor, and
# three per-motor PIDs driving the steering motors. The steering errors are
# taken in motor space: desired and measured poses both go through the
# inverse model and each motor's PID works on the difference. With
# feedforward enabled the inverse-model angles of the desired pose are added
# to the PID output.

import math
from dataclasses import dataclass

from .base import log
from .errors import OutOfRange
from .kinematics import (
    DEFAULT_K, MODEL_ALPHA_MAX, N_MOTORS, MotorAngles, PolarPose,
    cartesian_to_polar, in_workspace, inverse_model, sector_of, wrap_angle)
from .plant import (
    FLAG_THETA_UNDEFINED, MAX_DT, ZERO_PITCH, MotorCommand,
    extension_speed, retraction_speed, step)
from .runlog import RunLog, RunLogRow

DEFAULT_DT = 1.0 / 120     # tracker sync rate
NOT_SETTLED = float("inf")
FLAG_OUT_OF_WORKSPACE = "out_of_workspace"


@dataclass(frozen = True)
class PidGains:
    """
    Discrete PID gains of one axis.

    The integral term is the running sum of errors and the derivative term
    the difference of successive errors, both at the reference period
    `sample_time`; other time steps are rescaled by dt / sample_time.
    """
    kp: float = 0.8
    ki: float = 0.2
    kd: float = 0.05
    integral_limit: float = 5000.0    # ki * integral_limit reaches output_limit
    output_limit: float = 1000.0
    sample_time: float = DEFAULT_DT

    def __post_init__(self):
        for name in ("kp", "ki", "kd"):
            if not (getattr(self, name) >= 0):
                raise OutOfRange("gain %s should be >= 0, got %r" % (name, getattr(self, name)))
        for name in ("integral_limit", "output_limit", "sample_time"):
            if not (getattr(self, name) > 0):
                raise OutOfRange("%s should be > 0, got %r" % (name, getattr(self, name)))


def default_length_gains():
    return PidGains(integral_limit = 10.0, output_limit = 1.2)


@dataclass(frozen = True)
class LoopGains:
    """Gains of the two loops; steering gains are shared by the three motors."""
    length: PidGains = None
    steering: PidGains = None

    def __post_init__(self):
        if self.length is None:
            object.__setattr__(self, "length", default_length_gains())
        if self.steering is None:
            object.__setattr__(self, "steering", PidGains())


@dataclass(frozen = True)
class ControlError:
    e_R: float
    e_alpha: float
    e_theta: float


class PidAxis:
    """Integrator and previous error of one motor loop."""
    def __init__(self):
        self.reset()

    def reset(self):
        self.integral = 0.0
        self.prev_error = None

    def output(self, error, gains, dt):
        """PID output for this tick, using the integral of past ticks only."""
        ratio = dt / gains.sample_time
        out = gains.kp * error + gains.ki * self.integral
        if self.prev_error is not None:
            out += gains.kd * (error - self.prev_error) / ratio
        return out

    def commit(self, error, gains, dt, integrate):
        if integrate:
            lim = gains.integral_limit
            self.integral = min(lim, max(-lim, self.integral + error * dt / gains.sample_time))
        self.prev_error = error


class ControllerState:
    """
    Mutable state of one closed-loop run.

    desired               target PolarPose (None until set_target).
    feedforward_enabled   add inverse-model angles of the target to the PID
                          output of the steering motors.
    gains                 LoopGains.
    length_pid            PidAxis of the center motor.
    motor_pids            PidAxis of each steering motor.
    motor_rate            steering rate limit (deg/s) assumed for
                          anti-windup; None means unlimited.
    length_rates          (extend, retract) speeds in m/s assumed for
                          anti-windup, or None.
    actuator              where the controller expects the steering shafts
                          to be after its last command.
    """
    def __init__(self, desired = None, feedforward_enabled = True, gains = None):
        self.desired = desired
        self.feedforward_enabled = feedforward_enabled
        self.gains = gains if gains is not None else LoopGains()
        self.length_pid = PidAxis()
        self.motor_pids = [PidAxis() for _ in range(N_MOTORS)]
        self.motor_rate = None
        self.length_rates = None
        self.actuator = [0.0] * N_MOTORS
        self.target_warning = False
        self.last_feedforward = MotorAngles()
        self.last_pid = (0.0,) * N_MOTORS
        self.last_error = None

    def attach(self, plant_state, config):
        """Seed the actuator model from the plant the controller drives."""
        self.actuator = list(plant_state.motor_angles.values())
        self.motor_rate = config.steering_motor_rate
        self.length_rates = (extension_speed(config), retraction_speed(config))


def set_target_pose(ctrl, pose):
    """
    @abstract     Store a desired pose on the controller.
    @param ctrl   ControllerState.
    @param pose   PolarPose; alpha must be within the model range.
    @return       The stored pose.
    """
    if pose.alpha > MODEL_ALPHA_MAX:
        raise OutOfRange("target pitch %g is beyond the model range" % pose.alpha)
    ctrl.target_warning = not in_workspace(pose)
    if ctrl.target_warning:
        log("Warning: target (R=%g, alpha=%g, theta=%g) is outside the workspace" %
            (pose.R, pose.alpha, pose.theta))
    ctrl.desired = pose
    return pose

def set_target(ctrl, desired):
    """Convert a Cartesian target to a pose and store it; see set_target_pose."""
    return set_target_pose(ctrl, cartesian_to_polar(desired))

def control_error(desired, measured, theta_defined = True):
    """Length, pitch and wrapped rotation error; e_theta is 0 when either
    pose has no rotation."""
    e_theta = 0.0
    if theta_defined and measured.alpha > ZERO_PITCH and desired.alpha > 0:
        e_theta = wrap_angle(desired.theta - measured.theta)
    return ControlError(desired.R - measured.R, desired.alpha - measured.alpha, e_theta)

def _reachable(target, current, rate, dt):
    if rate is None:
        return True
    return abs(target - current) <= rate * dt

def _toward(current, target, rate, dt):
    if rate is None:
        return target
    step_max = rate * dt
    if abs(target - current) <= step_max:
        return target
    return current + math.copysign(step_max, target - current)

def compute_command(ctrl, measured, dt, k = DEFAULT_K, theta_defined = None):
    """
    @abstract             One controller tick.
    @param ctrl           ControllerState with a target set.
    @param measured       Measured PolarPose.
    @param dt             Tick length in seconds [float]
    @param k              Model coefficient used by the controller [float]
    @param theta_defined  Whether the measured rotation is meaningful; by
                          default it is whenever the measured pitch is not 0.
    @return               MotorCommand.
    """
    if ctrl.desired is None:
        raise OutOfRange("controller has no target")
    if not (dt > 0):
        raise OutOfRange("time step should be > 0, got %r" % (dt,))
    if theta_defined is None:
        theta_defined = measured.alpha > ZERO_PITCH
    des = ctrl.desired
    lg, sg = ctrl.gains.length, ctrl.gains.steering

    # length loop: the center motor takes a length increment
    e_R = des.R - measured.R
    pid_R = ctrl.length_pid.output(e_R, lg, dt)
    u_R = min(lg.output_limit, max(0.0, measured.R + pid_R))
    rate = None
    if ctrl.length_rates is not None:
        rate = ctrl.length_rates[0] if u_R >= measured.R else ctrl.length_rates[1]
    ctrl.length_pid.commit(e_R, lg, dt, u_R == measured.R + pid_R and
                           _reachable(u_R, measured.R, rate, dt))

    # steering loops, in motor space
    target = inverse_model(des.alpha, des.theta, k).values()
    if theta_defined:
        current = inverse_model(min(measured.alpha, MODEL_ALPHA_MAX), measured.theta, k).values()
    else:
        current = (0.0,) * N_MOTORS
    idle = sector_of(des.theta).idle - 1
    ff = target if ctrl.feedforward_enabled else (0.0,) * N_MOTORS
    mu = [0.0] * N_MOTORS
    pid_out = [0.0] * N_MOTORS
    for i in range(N_MOTORS):
        pid = ctrl.motor_pids[i]
        if i == idle:
            pid.reset()
            ctrl.actuator[i] = _toward(ctrl.actuator[i], 0.0, ctrl.motor_rate, dt)
            continue
        e = target[i] - current[i]
        pid_out[i] = pid.output(e, sg, dt)
        u = ff[i] + pid_out[i]
        mu[i] = min(sg.output_limit, max(0.0, u))
        pid.commit(e, sg, dt, mu[i] == u and
                   _reachable(mu[i], ctrl.actuator[i], ctrl.motor_rate, dt))
        ctrl.actuator[i] = _toward(ctrl.actuator[i], mu[i], ctrl.motor_rate, dt)

    ctrl.last_feedforward = MotorAngles(*ff)
    ctrl.last_pid = tuple(pid_out)
    ctrl.last_error = control_error(des, measured, theta_defined)
    return MotorCommand(u_R, MotorAngles(*mu))

def run_closed_loop(plant, ctrl, config, gains, duration, dt = DEFAULT_DT, k = DEFAULT_K):
    """
    @abstract        Alternate controller ticks and plant steps at a fixed rate.
    @param plant     Initial PlantState.
    @param ctrl      ControllerState with a target set.
    @param config    PlantConfig of the simulated arm.
    @param gains     LoopGains, or PidGains for the steering motors.
    @param duration  Simulated seconds [float]
    @param dt        Tick length in seconds, at most 0.1 [float]
    @param k         Model coefficient used by the controller [float]
    @return          RunLog with one row per tick.
    """
    if not (0 < dt <= MAX_DT):
        raise OutOfRange("time step should be in (0, %g], got %r" % (MAX_DT, dt))
    if not (duration >= dt):
        raise OutOfRange("duration %r is shorter than one step" % (duration,))
    if isinstance(gains, PidGains):
        gains = LoopGains(steering = gains)
    ctrl.gains = gains
    ctrl.attach(plant, config)

    n_ticks = max(1, int(math.floor(duration / dt + 1e-9)))
    runlog = RunLog(start_time = plant.time, initial_pose = plant.measured_pose,
                    initial_theta_defined = plant.theta_defined, dt = dt)
    state = plant
    des = ctrl.desired
    for _ in range(n_ticks):
        cmd = compute_command(ctrl, state.measured_pose, dt, k, state.theta_defined)
        state = step(state, cmd, dt, config)
        err = control_error(des, state.measured_pose, state.theta_defined)
        flags = list(state.flags)
        if ctrl.target_warning:
            flags.append(FLAG_OUT_OF_WORKSPACE)
        runlog.rows.append(RunLogRow.build(state.time, des, state.measured_pose,
            cmd, state.motor_angles, err, flags))
    runlog.final_state = state
    return runlog


@dataclass(frozen = True)
class SettlingMetrics:
    settling_time: float
    steady_state_error: ControlError

    @property
    def settled(self):
        return self.settling_time != NOT_SETTLED


def _axis_errors(row):
    return (abs(row.e_R_m), abs(row.e_alpha_deg), abs(row.e_theta_deg))

def settling_metrics(runlog, band = 0.05):
    """
    @abstract       Settling time and steady-state error of a run.
    @param runlog   Non-empty RunLog.
    @param band     Tolerance as a fraction of each axis' commanded change.
    @return         SettlingMetrics; settling_time is NOT_SETTLED when the
                    last sample is outside the band.
    @note           Tolerance per axis = band * |desired - initial measured|,
                    never below 1e-9. The steady-state error is the mean
                    absolute error over the final 10% of samples.
    """
    if not runlog.rows:
        raise OutOfRange("empty run log")
    if not (0 < band < 1):
        raise OutOfRange("band should be in (0, 1), got %r" % (band,))
    first = runlog.rows[0]
    des = PolarPose(first.R_des_m, first.alpha_des_deg, first.theta_des_deg)
    init = runlog.initial_pose
    if init is None:
        init = PolarPose(first.R_real_m, first.alpha_real_deg, first.theta_real_deg)
    step0 = control_error(des, init, runlog.initial_theta_defined)
    tol = [max(band * abs(v), 1e-9) for v in (step0.e_R, step0.e_alpha, step0.e_theta)]

    settle_idx = None
    for i in range(len(runlog.rows) - 1, -1, -1):
        errs = _axis_errors(runlog.rows[i])
        if any(errs[j] > tol[j] for j in range(3)):
            break
        settle_idx = i
    if settle_idx is None:
        settling_time = NOT_SETTLED
    elif settle_idx == 0:
        settling_time = 0.0
    else:
        settling_time = runlog.rows[settle_idx].time_s - runlog.start_time

    n_tail = max(1, int(math.ceil(0.1 * len(runlog.rows))))
    tail = [_axis_errors(r) for r in runlog.rows[-n_tail:]]
    sse = ControlError(*[sum(e[j] for e in tail) / n_tail for j in range(3)])
    return SettlingMetrics(settling_time, sse)

def theta_excursion(runlog, eps = 1e-6):
    """
    @abstract       Direction of the first rotation move of a run.
    @param runlog   RunLog.
    @param eps      Smallest move in degrees that counts [float]
    @return         (first_move, target_direction): wrapped offset of the
                    first measured theta differing from the start by more
                    than eps, and the wrapped offset from the start to the
                    desired theta. Opposite signs mean the arm first turned
                    away from its target. (0.0, dir) if theta never moved.
    """
    start = runlog.initial_pose
    if start is None or not runlog.rows:
        raise OutOfRange("run log has no start pose")
    target_dir = wrap_angle(runlog.rows[0].theta_des_deg - start.theta)
    for row in runlog.rows:
        move = wrap_angle(row.theta_real_deg - start.theta)
        if abs(move) > eps and FLAG_THETA_UNDEFINED not in row.flags:
            return move, target_dir
    return 0.0, target_dir
