# Run logs of closed-loop simulations

from typing import NamedTuple

from .calibration import fmt_float, parse_float, read_csv_table, write_csv_table
from .errors import ParseError
from .kinematics import PolarPose

RUNLOG_HEADER = ("time_s", "R_des_m", "alpha_des_deg", "theta_des_deg",
                 "R_real_m", "alpha_real_deg", "theta_real_deg",
                 "mu_R_m", "mu_phi1_deg", "mu_phi2_deg", "mu_phi3_deg",
                 "phi1_deg", "phi2_deg", "phi3_deg",
                 "e_R_m", "e_alpha_deg", "e_theta_deg", "flags")
NO_FLAGS = "-"
FLAG_SEP = ";"


class RunLogRow(NamedTuple):
    time_s: float
    R_des_m: float
    alpha_des_deg: float
    theta_des_deg: float
    R_real_m: float
    alpha_real_deg: float
    theta_real_deg: float
    mu_R_m: float
    mu_phi1_deg: float
    mu_phi2_deg: float
    mu_phi3_deg: float
    phi1_deg: float
    phi2_deg: float
    phi3_deg: float
    e_R_m: float
    e_alpha_deg: float
    e_theta_deg: float
    flags: tuple

    @classmethod
    def build(cls, time, desired, measured, cmd, motors, err, flags):
        return cls(time, desired.R, desired.alpha, desired.theta,
                   measured.R, measured.alpha, measured.theta,
                   cmd.mu_R, *cmd.mu_phi.values(), *motors.values(),
                   err.e_R, err.e_alpha, err.e_theta, tuple(flags))

    def to_csv(self):
        flags = FLAG_SEP.join(self.flags) if self.flags else NO_FLAGS
        return tuple(float(v) for v in self[:-1]) + (flags,)


class RunLog:
    """
    Rows of one closed-loop run plus the metadata to reproduce it.

    metadata     ordered list of (key, value) written as `# key=value`
                 lines: experiment, run, seed and the config snapshot.
    rows         list of RunLogRow, one per tick.
    start_time   plant time before the first tick.
    initial_pose measured pose before the first tick.
    dt           tick length.
    """
    def __init__(self, start_time = 0.0, initial_pose = None,
                 initial_theta_defined = True, dt = None, metadata = None):
        self.metadata = list(metadata or [])
        self.rows = []
        self.start_time = start_time
        self.initial_pose = initial_pose
        self.initial_theta_defined = initial_theta_defined
        self.dt = dt
        self.final_state = None

    def add_metadata(self, key, value):
        self.metadata = [(k, v) for k, v in self.metadata if k != key]
        self.metadata.append((key, value))

    def get_metadata(self, key, default = None):
        for k, v in self.metadata:
            if k == key:
                return v
        return default

    def _run_metadata(self):
        meta = list(self.metadata)
        meta.append(("start_time", fmt_float(self.start_time)))
        if self.dt is not None:
            meta.append(("dt", fmt_float(self.dt)))
        if self.initial_pose is not None:
            p = self.initial_pose
            meta.append(("initial_pose", "%s %s %s" %
                         (fmt_float(p.R), fmt_float(p.alpha), fmt_float(p.theta))))
            meta.append(("initial_theta_defined", str(bool(self.initial_theta_defined)).lower()))
        return meta

    def write_csv(self, path):
        with open(path, "w", encoding = "utf-8", newline = "") as fp:
            write_csv_table(fp, RUNLOG_HEADER, (r.to_csv() for r in self.rows),
                            self._run_metadata())
        return path


def read_runlog(path):
    """
    @abstract     Load a RunLog written by RunLog.write_csv.
    @param path   Path to the CSV file [str]
    @return       RunLog with rows and run metadata restored.
    """
    meta, _, rows = read_csv_table(path, RUNLOG_HEADER)
    run_keys = ("start_time", "dt", "initial_pose", "initial_theta_defined")
    runlog = RunLog(metadata = [(k, v) for k, v in meta.items() if k not in run_keys])
    if "start_time" in meta:
        runlog.start_time = parse_float(meta["start_time"], 0, "start_time")
    if "dt" in meta:
        runlog.dt = parse_float(meta["dt"], 0, "dt")
    if "initial_pose" in meta:
        parts = meta["initial_pose"].split()
        if len(parts) != 3:
            raise ParseError(0, "initial_pose should hold 3 numbers")
        runlog.initial_pose = PolarPose(*[parse_float(t, 0, "initial_pose") for t in parts])
    runlog.initial_theta_defined = meta.get("initial_theta_defined", "true") == "true"
    for lineno, fields in rows:
        nums = [parse_float(t, lineno, name) for t, name in zip(fields[:-1], RUNLOG_HEADER)]
        flags = () if fields[-1] == NO_FLAGS else tuple(fields[-1].split(FLAG_SEP))
        runlog.rows.append(RunLogRow(*nums, flags))
    return runlog
