# Experiment drivers
#
# estimate-k     synthetic single-cable pulls at several pressures and
#                lengths, written as a mocap log and fitted back.
# circle-sweep   open-loop circles at a few pitch levels, settled poses
#                compared with the model.
# step-compare   closed-loop step to one target, with and without the
#                feedforward term.
# workspace-map  grid of poses marked in-workspace and reachable under sag.

import math
import multiprocessing
import os
from dataclasses import dataclass

import numpy as np

from .base import ensure_dir
from .calibration import (
    IndependenceReport, dead_zone_arc, emit_mocap_csv, estimate_k, fmt_float,
    parse_mocap_csv, pressure_length_independence, simulate_pull_log,
    sweep_error_field, write_csv_table)
from .control import (
    ControllerState, run_closed_loop, set_target, set_target_pose,
    settling_metrics, theta_excursion)
from .errors import ValidationError
from .kinematics import (
    CartesianPoint, PolarPose, cartesian_to_polar, in_workspace,
    inverse_model, polar_to_cartesian)
from .plant import (
    MotorCommand, extension_speed, hold_state, initial_state, is_reachable,
    max_payload, step)
from .settings import EXPERIMENTS

SWEEP_HEADER = ("alpha_level_deg", "theta_cmd_deg", "R_m", "alpha_real_deg",
                "theta_real_deg", "x_m", "y_m", "z_m", "e_alpha_deg",
                "e_theta_deg", "flags")
SWEEP_SUMMARY_HEADER = ("alpha_level_deg", "mean_alpha_real_deg",
                        "mean_theta_bias_deg", "mean_abs_alpha_err_deg",
                        "mean_abs_theta_err_deg", "dead_zone_start_deg",
                        "dead_zone_end_deg", "dead_zone_below_seam_deg")
STEP_SUMMARY_HEADER = ("run", "settling_time_s", "sse_R_m", "sse_alpha_deg",
                       "sse_theta_deg", "theta_first_move_deg",
                       "theta_target_dir_deg")
KFIT_HEADER = ("group", "pressure_psi", "length_m", "k_hat", "r_squared",
               "residual_max_deg", "n_samples")
WSMAP_HEADER = ("R_m", "alpha_deg", "theta_deg", "x_m", "y_m", "z_m",
                "in_workspace", "reachable")


@dataclass(frozen = True)
class ExperimentSpec:
    """An experiment name with the settings it runs under."""
    name: str
    settings: object

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValidationError("unknown experiment '%s', should be one of %s" %
                                  (self.name, ", ".join(EXPERIMENTS)))

    @property
    def params(self):
        return self.settings.experiment


def _metadata(spec, run = None):
    meta = [("experiment", spec.name)]
    if run is not None:
        meta.append(("run", run))
    meta.append(("seed", str(spec.params["seed"])))
    meta.append(("config", spec.settings.snapshot()))
    return meta

def _write(out_dir, fname, header, rows, metadata = None):
    path = os.path.join(ensure_dir(out_dir), fname)
    with open(path, "w", encoding = "utf-8", newline = "") as fp:
        write_csv_table(fp, header, rows, metadata)
    return path

def _map_cells(func, cells, jobs = 1, progress = None):
    """Run func over cells, in a pool when jobs > 1; results keep cell order."""
    if jobs > 1 and len(cells) > 1:
        pool = multiprocessing.Pool(processes = min(jobs, len(cells)))
        result = []
        for cell in cells:
            result.append(pool.apply_async(func, cell, callback = progress))
        pool.close()
        pool.join()
        return [res.get() for res in result]
    out = []
    for cell in cells:
        out.append(func(*cell))
        if progress is not None:
            progress(out[-1])
    return out

def _as_pose(target):
    if isinstance(target, CartesianPoint):
        return cartesian_to_polar(target)
    return target


### estimate-k

def estimate_k_experiment(spec, out_dir = None):
    """
    @abstract       Simulate pull logs for every (pressure, length) pair,
                    write them as one mocap CSV and fit k back.
    @param spec     ExperimentSpec named estimate-k.
    @param out_dir  Output directory; nothing written when None [str]
    @return         IndependenceReport.
    """
    p = spec.params
    config = spec.settings.plant_config()
    rng = np.random.default_rng(p["seed"])
    samples = []
    for pressure in p["pressures"]:
        for length in p["lengths"]:
            t0 = samples[-1].time + spec.settings.loop["dt"] if samples else 0.0
            samples.extend(simulate_pull_log(
                k_true = config.k_true, motor = p["motor"], pressure = pressure,
                length = length, noise_sigma = p["noise_sigma"],
                seed = int(rng.integers(0, 2 ** 63)), t0 = t0,
                dt = spec.settings.loop["dt"]))
    if out_dir is not None:
        path = os.path.join(ensure_dir(out_dir), "estimate_k_mocap.csv")
        emit_mocap_csv(samples, path)
        samples = parse_mocap_csv(path)

    if len(p["pressures"]) * len(p["lengths"]) < 2:
        fit = estimate_k(samples)
        key = (p["pressures"][0], p["lengths"][0])
        report = IndependenceReport({key: fit}, fit, 0.0, p["k_threshold"], False)
    else:
        report = pressure_length_independence(samples, p["k_threshold"])

    if out_dir is not None:
        rows = [(str(i + 1), key[0], key[1], f.k_hat, f.r_squared, f.residual_max, f.n_samples)
                for i, (key, f) in enumerate(report.fits.items())]
        f = report.pooled
        rows.append(("pooled", "-", "-", f.k_hat, f.r_squared, f.residual_max, f.n_samples))
        _write(out_dir, "estimate_k_summary.csv", KFIT_HEADER, rows,
               _metadata(spec) + [("max_k_diff", fmt_float(report.max_diff)),
                                  ("exceeded", str(report.exceeded).lower())])
    return report


### circle-sweep

def circle_targets(alpha, n_points, R):
    """n_points poses evenly spread in theta over [0, 360) at pitch alpha."""
    if n_points < 1:
        raise ValidationError("n_points should be >= 1, got %r" % (n_points,))
    return [PolarPose(R, alpha, 360.0 * i / n_points) for i in range(n_points)]


@dataclass(frozen = True)
class SweepPoint:
    commanded: PolarPose
    measured: PolarPose
    theta_defined: bool
    flags: tuple


def settle(state, cmd, dt, config, dwell_limit):
    """Hold a command until the plant stops moving or dwell_limit passes."""
    t = 0.0
    while True:
        nxt = step(state, cmd, dt, config)
        t += dt
        stationary = (nxt.motor_angles == state.motor_angles and nxt.length == state.length)
        state = nxt
        if stationary or t >= dwell_limit:
            return state

def sweep_level(config, alpha, n_points, R, dwell_limit, dt, k):
    """One open-loop circle from the default configuration."""
    state = initial_state(config, R)
    points = []
    for pose in circle_targets(alpha, n_points, R):
        cmd = MotorCommand(R, inverse_model(pose.alpha, pose.theta, k))
        state = settle(state, cmd, dt, config, dwell_limit)
        points.append(SweepPoint(pose, state.measured_pose, state.theta_defined, state.flags))
    return points


@dataclass(frozen = True)
class SweepLevel:
    alpha: float
    points: list
    errors: object
    dead_zone: object

    @property
    def mean_alpha(self):
        return float(np.mean([p.measured.alpha for p in self.points]))


def circle_sweep(spec, out_dir = None, jobs = 1, progress = None):
    """
    @abstract         Open-loop circular sweeps at every pitch level.
    @param spec       ExperimentSpec named circle-sweep.
    @param out_dir    Output directory; nothing written when None [str]
    @param jobs       Worker processes, one level per task [int]
    @param progress   Callback run as each level finishes.
    @return           List of SweepLevel in level order.
    """
    p = spec.params
    config = spec.settings.plant_config()
    loop = spec.settings.loop
    cells = [(config, float(a), p["n_points"], p["sweep_length"], p["dwell_limit"],
              loop["dt"], loop["k"]) for a in p["alpha_levels"]]
    results = _map_cells(sweep_level, cells, jobs, progress)

    levels = []
    for alpha, points in zip(p["alpha_levels"], results):
        errors = sweep_error_field([x.commanded for x in points], [x.measured for x in points])
        zone = dead_zone_arc([x.measured.theta for x in points if x.theta_defined])
        levels.append(SweepLevel(float(alpha), points, errors, zone))

    if out_dir is not None:
        rows = []
        for lv in levels:
            for x, (e_a, e_t) in zip(lv.points, lv.errors.errors):
                c = polar_to_cartesian(x.measured)
                rows.append((lv.alpha, x.commanded.theta, x.measured.R, x.measured.alpha,
                             x.measured.theta, c.x, c.y, c.z, e_a, e_t,
                             ";".join(x.flags) if x.flags else "-"))
        _write(out_dir, "circle_sweep.csv", SWEEP_HEADER, rows, _metadata(spec))
        summary = []
        for lv in levels:
            z = lv.dead_zone
            zone = (z.start, z.end, z.width_below_seam) if z else ("-", "-", "-")
            summary.append((lv.alpha, lv.mean_alpha, lv.errors.mean_theta,
                            lv.errors.mean_abs_alpha, lv.errors.mean_abs_theta) + zone)
        _write(out_dir, "circle_sweep_summary.csv", SWEEP_SUMMARY_HEADER,
               summary, _metadata(spec))
    return levels


### step-compare

@dataclass(frozen = True)
class RunSummary:
    name: str
    runlog: object
    metrics: object
    theta_first_move: float
    theta_target_dir: float

    @property
    def moved_away(self):
        """The first rotation move went against the target direction."""
        return self.theta_first_move * self.theta_target_dir < 0


@dataclass(frozen = True)
class StepComparison:
    ff: RunSummary
    noff: RunSummary

    @property
    def ff_faster(self):
        return self.ff.metrics.settling_time < self.noff.metrics.settling_time


def start_state(settings):
    """Plant state a closed-loop run starts from."""
    config = settings.plant_config()
    start = settings.start()
    if start is None:
        return initial_state(config, settings.loop["initial_length"])
    return hold_state(config, _as_pose(start))

def closed_loop_run(spec, feedforward, plant = None):
    """One closed-loop run to the configured target; returns its RunLog."""
    settings = spec.settings
    config = settings.plant_config()
    loop = settings.loop
    if plant is None:
        plant = start_state(settings)
    ctrl = ControllerState(feedforward_enabled = feedforward)
    target = settings.target()
    if isinstance(target, CartesianPoint):
        set_target(ctrl, target)
    else:
        set_target_pose(ctrl, target)
    runlog = run_closed_loop(plant, ctrl, config, settings.loop_gains(),
                             loop["duration"], loop["dt"], loop["k"])
    for key, value in _metadata(spec, "ff" if feedforward else "noff"):
        runlog.add_metadata(key, value)
    return runlog

def summarize_run(name, runlog, band):
    move, direction = theta_excursion(runlog)
    return RunSummary(name, runlog, settling_metrics(runlog, band), move, direction)

def step_compare(spec, out_dir = None):
    """
    @abstract       Closed-loop step with and without feedforward, same
                    gains and start state.
    @param spec     ExperimentSpec named step-compare.
    @param out_dir  Output directory; nothing written when None [str]
    @return         StepComparison.
    """
    plant = start_state(spec.settings)
    band = spec.settings.loop["band"]
    runs = {}
    for name, ff in (("ff", True), ("noff", False)):
        runs[name] = summarize_run(name, closed_loop_run(spec, ff, plant), band)
    result = StepComparison(runs["ff"], runs["noff"])

    if out_dir is not None:
        ensure_dir(out_dir)
        rows = []
        for r in (result.ff, result.noff):
            r.runlog.write_csv(os.path.join(out_dir, "step_compare_%s.csv" % r.name))
            e = r.metrics.steady_state_error
            rows.append((r.name, r.metrics.settling_time, e.e_R, e.e_alpha, e.e_theta,
                         r.theta_first_move, r.theta_target_dir))
        _write(out_dir, "step_compare_summary.csv", STEP_SUMMARY_HEADER, rows,
               _metadata(spec) + [("ff_faster", str(result.ff_faster).lower())])
    return result


### workspace-map

@dataclass(frozen = True)
class WorkspaceCell:
    pose: PolarPose
    in_workspace: bool
    reachable: bool


def map_theta_slice(config, theta, r_levels, alphas):
    cells = []
    for R in r_levels:
        for alpha in alphas:
            pose = PolarPose(R, alpha, theta)
            cells.append(WorkspaceCell(pose, in_workspace(pose), is_reachable(pose, config)))
    return cells

def n_theta_slices(theta_step):
    """Number of theta slices workspace_map runs for a given step."""
    return int(math.ceil(360.0 / theta_step - 1e-9))

def workspace_map(spec, out_dir = None, jobs = 1, progress = None):
    """
    @abstract         Mark a (R, alpha, theta) grid as in-workspace and
                      reachable under the configured sag.
    @param spec       ExperimentSpec named workspace-map.
    @param out_dir    Output directory; nothing written when None [str]
    @param jobs       Worker processes, one theta slice per task [int]
    @param progress   Callback run as each slice finishes.
    @return           List of WorkspaceCell ordered by theta, R, alpha.
    """
    p = spec.params
    config = spec.settings.plant_config()
    n_alpha = int(math.floor(p["alpha_max"] / p["alpha_step"] + 1e-9))
    alphas = [float(v) for v in np.linspace(0.0, n_alpha * p["alpha_step"], n_alpha + 1)]
    thetas = [i * p["theta_step"] for i in range(n_theta_slices(p["theta_step"]))]
    slices = _map_cells(map_theta_slice,
                        [(config, t, p["r_levels"], alphas) for t in thetas],
                        jobs, progress)
    cells = [c for s in slices for c in s]

    if out_dir is not None:
        rows = []
        for c in cells:
            xyz = polar_to_cartesian(c.pose)
            rows.append((c.pose.R, c.pose.alpha, c.pose.theta, xyz.x, xyz.y, xyz.z,
                         int(c.in_workspace), int(c.reachable)))
        meta = _metadata(spec) + [("max_payload_kg", fmt_float(max_payload(config))),
                                  ("extension_speed_m_s", fmt_float(extension_speed(config)))]
        _write(out_dir, "workspace_map.csv", WSMAP_HEADER, rows, meta)
    return cells


def run_experiment(spec, out_dir = None, jobs = 1, progress = None):
    if spec.name == "estimate-k":
        return estimate_k_experiment(spec, out_dir)
    if spec.name == "circle-sweep":
        return circle_sweep(spec, out_dir, jobs, progress)
    if spec.name == "step-compare":
        return step_compare(spec, out_dir)
    return workspace_map(spec, out_dir, jobs, progress)
