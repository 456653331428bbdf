# Model verification from motion-capture logs
#
# Estimates the pitch coefficient k from single-cable pull logs, checks that
# it does not depend on pressure or arm length, and measures how far a
# recorded circular sweep strays from the model.

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InsufficientData, InvalidMotorSet, LengthMismatch, MultiMotorData,
    OutOfRange, ParseError, SchemaError)
from .kinematics import (
    DEFAULT_K, CartesianPoint, MotorAngles, PolarPose,
    cartesian_to_polar, check_k, motor_bearing, polar_to_cartesian,
    wrap_angle)

MOCAP_HEADER = ("time_s", "x_m", "y_m", "z_m", "phi1_deg", "phi2_deg",
                "phi3_deg", "pressure_psi", "length_m")
K_DIFF_THRESHOLD = 0.01
DEAD_ZONE_FACTOR = 3.0


### CSV

def fmt_float(x):
    """Shortest text that parses back to the same float."""
    return repr(float(x))

def write_csv_table(fp, header, rows, metadata = None):
    """
    @abstract         Write a CSV table in the package dialect.
    @param fp         Text file opened for writing.
    @param header     Column names [tuple of str]
    @param rows       Iterable of rows; floats are written with fmt_float,
                      other values with str.
    @param metadata   Optional list of (key, value) written as leading
                      `# key=value` lines.
    @return           Number of data rows written [int]
    """
    for key, value in (metadata or []):
        fp.write("# %s=%s\n" % (key, value))
    fp.write(",".join(header) + "\n")
    n = 0
    for row in rows:
        fp.write(",".join(fmt_float(v) if isinstance(v, float) else str(v)
                          for v in row) + "\n")
        n += 1
    return n

def read_csv_table(path, header = None):
    """
    @abstract       Read a CSV table written by write_csv_table.
    @param path     Path to the CSV file [str]
    @param header   Expected column names; any header is accepted when None.
    @return         (metadata dict, header tuple, list of (lineno, fields))
    @note           Lines starting with '#' before the header are metadata;
                    blank lines are skipped.
    """
    metadata = {}
    got_header = None
    rows = []
    lineno = 0
    try:
        with open(path, "r", encoding = "utf-8", newline = "") as fp:
            for lineno, line in enumerate(fp, start = 1):
                line = line.rstrip("\n").rstrip("\r")
                if not line.strip():
                    continue
                if got_header is None:
                    if line.startswith("#"):
                        key, sep, value = line[1:].strip().partition("=")
                        if sep:
                            metadata[key.strip()] = value
                        continue
                    got_header = tuple(line.split(","))
                    if header is not None and got_header != tuple(header):
                        raise SchemaError("line %d: header should be '%s', got '%s'" %
                                          (lineno, ",".join(header), line))
                    continue
                fields = line.split(",")
                if len(fields) != len(got_header):
                    raise ParseError(lineno, "expect %d fields, got %d" %
                                     (len(got_header), len(fields)))
                rows.append((lineno, fields))
    except UnicodeDecodeError as e:
        raise ParseError(lineno + 1, "not UTF-8 text: %s" % e.reason)
    if got_header is None:
        raise SchemaError("no header line in '%s'" % path)
    return metadata, got_header, rows

def parse_float(text, lineno, name):
    try:
        v = float(text)
    except ValueError:
        raise ParseError(lineno, "%s is not a number: '%s'" % (name, text))
    if not math.isfinite(v):
        raise ParseError(lineno, "%s should be finite, got '%s'" % (name, text))
    return v


### Mocap samples

@dataclass(frozen = True)
class MocapSample:
    time: float
    position: CartesianPoint
    motor_angles: MotorAngles
    pressure: float
    arm_length: float

    def to_row(self):
        p = self.position
        return (self.time, p.x, p.y, p.z) + self.motor_angles.values() + \
               (self.pressure, self.arm_length)


@dataclass(frozen = True)
class FitResult:
    k_hat: float
    r_squared: float
    residual_max: float
    n_samples: int


def parse_mocap_csv(path):
    """
    @abstract     Load a motion-capture log.
    @param path   Path to a CSV with the MOCAP_HEADER columns [str]
    @return       List of MocapSample in file order.
    @raise        SchemaError on a wrong header; ParseError, with the line
                  number, on malformed or non-finite values, negative motor
                  angles or decreasing time.
    """
    _, _, rows = read_csv_table(path, MOCAP_HEADER)
    samples = []
    last_time = None
    for lineno, fields in rows:
        v = [parse_float(t, lineno, name) for t, name in zip(fields, MOCAP_HEADER)]
        if last_time is not None and v[0] < last_time:
            raise ParseError(lineno, "time goes backwards (%r < %r)" % (v[0], last_time))
        last_time = v[0]
        try:
            motors = MotorAngles(v[4], v[5], v[6])
        except InvalidMotorSet as e:
            raise ParseError(lineno, str(e))
        samples.append(MocapSample(v[0], CartesianPoint(v[1], v[2], v[3]),
                                   motors, v[7], v[8]))
    return samples

def emit_mocap_csv(samples, path):
    """Write samples with the mocap header; parse_mocap_csv reads them back exactly."""
    with open(path, "w", encoding = "utf-8", newline = "") as fp:
        return write_csv_table(fp, MOCAP_HEADER, (s.to_row() for s in samples))

def simulate_pull_log(k_true = DEFAULT_K, motor = 0, angles = None,
                      pressure = 8.0, length = 0.6, noise_sigma = 0.0,
                      seed = None, t0 = 0.0, dt = 1.0 / 120):
    """
    @abstract             Synthetic single-cable pull log.
    @param k_true         Pitch coefficient of the simulated arm [float]
    @param motor          0-based index of the pulled motor [int]
    @param angles         Motor angles to record; 20 angles from 10 to 200
                          when None.
    @param pressure       Recorded pressure in psi [float]
    @param length         Arm length in meters, > 0 [float]
    @param noise_sigma    Std of the Gaussian pitch noise in degrees [float]
    @param seed           Seed of the noise generator [int]
    @return               List of MocapSample.
    """
    k_true = check_k(k_true)
    if motor not in (0, 1, 2):
        raise OutOfRange("motor index should be 0, 1 or 2, got %r" % (motor,))
    if not (length > 0):
        raise OutOfRange("arm length should be > 0, got %r" % (length,))
    if noise_sigma < 0:
        raise OutOfRange("noise sigma should be >= 0, got %r" % (noise_sigma,))
    if angles is None:
        angles = np.linspace(10.0, 200.0, 20)
    angles = np.asarray(angles, dtype = float)
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, noise_sigma, size = angles.shape) if noise_sigma > 0 \
            else np.zeros(angles.shape)

    samples = []
    for i, (phi, eps) in enumerate(zip(angles, noise)):
        alpha = abs(k_true * float(phi) + float(eps))
        pose = PolarPose(length, alpha, motor_bearing(motor))
        phis = [0.0, 0.0, 0.0]
        phis[motor] = float(phi)
        samples.append(MocapSample(t0 + i * dt, polar_to_cartesian(pose),
                                   MotorAngles(*phis), float(pressure), float(length)))
    return samples


### Coefficient fitting

def _single_motor_points(samples):
    phi, alpha = [], []
    for s in samples:
        active = s.motor_angles.active()
        if len(active) > 1:
            raise MultiMotorData("sample at t=%r pulls motors %s" %
                (s.time, ",".join(str(i + 1) for i in active)))
        phi.append(s.motor_angles.values()[active[0]] if active else 0.0)
        alpha.append(cartesian_to_polar(s.position).alpha)
    return np.array(phi), np.array(alpha)

def estimate_k(samples):
    """
    @abstract       Least-squares pitch coefficient from single-cable pulls.
    @param samples  List of MocapSample, each with at most one motor turned.
    @return         FitResult of the fit alpha = k * phi through the origin.
    @raise          InsufficientData with fewer than two distinct angles;
                    MultiMotorData when a sample pulls several motors.
    """
    if len(samples) < 2:
        raise InsufficientData("need at least 2 samples, got %d" % len(samples))
    phi, alpha = _single_motor_points(samples)
    if len(np.unique(phi)) < 2 or not np.any(phi > 0):
        raise InsufficientData("need at least 2 distinct motor angles")

    sol, _, _, _ = np.linalg.lstsq(phi[:, None], alpha, rcond = None)
    k_hat = float(sol[0])
    resid = alpha - k_hat * phi
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((alpha - alpha.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    r2 = min(1.0, max(0.0, r2))
    return FitResult(k_hat, r2, float(np.max(np.abs(resid))), len(samples))

def group_samples(samples):
    """Group samples by their (pressure, arm length) condition, in order of appearance."""
    groups = {}
    for s in samples:
        groups.setdefault((s.pressure, s.arm_length), []).append(s)
    return groups


@dataclass(frozen = True)
class IndependenceReport:
    """
    fits        FitResult per (pressure, length) condition.
    pooled      FitResult over all samples.
    max_diff    largest pairwise difference of the per-group k estimates.
    exceeded    whether max_diff is above the threshold.
    """
    fits: dict
    pooled: FitResult
    max_diff: float
    threshold: float
    exceeded: bool


def pressure_length_independence(grouped_samples, threshold = K_DIFF_THRESHOLD):
    """
    @abstract               Check that k does not change across conditions.
    @param grouped_samples  Dict of condition -> list of MocapSample, or a
                            flat list to be grouped by group_samples.
    @param threshold        Largest acceptable difference of k estimates.
    @return                 IndependenceReport.
    """
    if not isinstance(grouped_samples, dict):
        grouped_samples = group_samples(grouped_samples)
    if len(grouped_samples) < 2:
        raise InsufficientData("need at least 2 sample groups, got %d" % len(grouped_samples))
    fits = {key: estimate_k(g) for key, g in grouped_samples.items()}
    pooled = estimate_k([s for g in grouped_samples.values() for s in g])
    ks = [f.k_hat for f in fits.values()]
    max_diff = max(ks) - min(ks)
    return IndependenceReport(fits, pooled, max_diff, threshold, max_diff > threshold)


### Sweep errors

@dataclass(frozen = True)
class ErrorField:
    """
    errors          per-sample (e_alpha, e_theta), desired minus measured,
                    e_theta wrapped into (-180, 180].
    mean_theta      mean signed theta error (the rotation bias).
    mean_abs_alpha  mean |e_alpha|.
    mean_abs_theta  mean |e_theta|.
    """
    errors: list
    mean_theta: float
    mean_abs_alpha: float
    mean_abs_theta: float


def sweep_error_field(desired, measured):
    """Model-vs-measurement errors of an aligned sweep; see ErrorField."""
    if len(desired) != len(measured):
        raise LengthMismatch("desired has %d poses, measured %d" % (len(desired), len(measured)))
    errors = []
    for d, m in zip(desired, measured):
        e_theta = 0.0
        if d.alpha > 0 and m.alpha > 0:
            e_theta = wrap_angle(d.theta - m.theta)
        errors.append((d.alpha - m.alpha, e_theta))
    if not errors:
        return ErrorField([], 0.0, 0.0, 0.0)
    arr = np.array(errors)
    return ErrorField(errors, float(arr[:, 1].mean()),
                      float(np.abs(arr[:, 0]).mean()), float(np.abs(arr[:, 1]).mean()))


@dataclass(frozen = True)
class DeadZone:
    """
    Arc of rotation angles the arm never settled in.
    start, end          last recorded theta before the arc and first after
                        it, going counter-clockwise through 0.
    width               angular width of the arc.
    width_below_seam    part of the arc below 360, i.e. 360 - start.
    """
    start: float
    end: float
    width: float
    width_below_seam: float


def dead_zone_arc(thetas, factor = DEAD_ZONE_FACTOR):
    """
    @abstract       Find the gap around theta = 0 in recorded rotation angles.
    @param thetas   Measured theta values in degrees.
    @param factor   Gap must be wider than factor times the median gap.
    @return         DeadZone, or None when there is no such gap.
    """
    vals = np.unique(np.mod(np.asarray(thetas, dtype = float), 360.0))
    if len(vals) < 3:
        return None
    gaps = np.diff(np.append(vals, vals[0] + 360.0))
    seam_gap = float(gaps[-1])
    if not seam_gap > factor * float(np.median(gaps)):
        return None
    start, end = float(vals[-1]), float(vals[0])
    return DeadZone(start, end, seam_gap, 360.0 - start)
