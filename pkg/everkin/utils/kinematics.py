# Utils for the static kinematic model of the steered everting arm
#
# Frames and units
#   - angles are in degrees everywhere; radians only inside trig calls.
#   - arm frame: origin at the steering collar, +x along the straight arm,
#     +z up, +y completes the right-handed frame. theta is measured from +y
#     (the bearing of steering motor 1) towards +z.
#   - steering motors sit at bearings 0, 120 and 240 degrees. Only the two
#     motors bounding the sector of the requested theta pull; the third stays
#     slack.

import math
from dataclasses import dataclass

from .errors import DegenerateInput, InvalidMotorSet, OutOfRange

DEFAULT_K = 0.104          # arm-pitch degrees per motor degree
SECTOR_SPAN = 120.0
N_MOTORS = 3

MODEL_ALPHA_MAX = 90.0     # validity range of the static model
WORKSPACE_ALPHA_MAX = 60.0 # half angle of the 120 degree spherical sector
WORKSPACE_R_MIN = 0.3
WORKSPACE_R_MAX = 1.2
ARM_LENGTH_MAX = 1.2

def normalize_angle(x):
    """
    @abstract   Map an angle into [0, 360).
    @param x    Angle in degrees [float]
    @return     Normalized angle [float]
    """
    r = math.fmod(x, 360.0)
    if r < 0:
        r += 360.0
    if r >= 360.0:     # -1e-20 + 360 rounds up to 360
        r = 0.0
    return r

def wrap_angle(x):
    """
    @abstract   Map an angle difference into (-180, 180].
    @param x    Angle in degrees [float]
    @return     Wrapped angle [float]
    """
    r = normalize_angle(x)
    if r > 180.0:
        r -= 360.0
    return r

def cos_sin_deg(x):
    """cos and sin of an angle in degrees, exact on multiples of 90."""
    q = x / 90.0
    if q == int(q):
        return ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))[int(q) % 4]
    rad = math.radians(x)
    return (math.cos(rad), math.sin(rad))

def check_k(k):
    if not (isinstance(k, (int, float)) and math.isfinite(k) and k > 0):
        raise OutOfRange("model coefficient k should be a positive number, got %r" % (k,))
    return float(k)

def motor_bearing(idx):
    """Bearing in degrees of steering motor `idx` (0-based)."""
    return SECTOR_SPAN * idx


@dataclass(frozen = True)
class PolarPose:
    """
    Arm state in the spherical arm frame.

    R       arm length in meters, >= 0.
    alpha   arm pitch angle in degrees, deflection from the straight arm.
            The static model is valid up to 90; values up to 180 are kept
            so that any Cartesian point has a pose.
    theta   arm rotation angle in degrees, normalized into [0, 360).
    """
    R: float
    alpha: float
    theta: float

    def __post_init__(self):
        for name in ("R", "alpha", "theta"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise OutOfRange("pose %s should be finite, got %r" % (name, v))
        if self.R < 0:
            raise OutOfRange("arm length R should be >= 0, got %r" % self.R)
        if self.alpha < 0 or self.alpha > 180:
            raise OutOfRange("arm pitch alpha should be in [0, 180], got %r" % self.alpha)
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))


@dataclass(frozen = True)
class CartesianPoint:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise OutOfRange("point %s should be finite, got %r" % (name, v))
            object.__setattr__(self, name, float(v))

    def norm(self):
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


@dataclass(frozen = True)
class MotorAngles:
    """
    Shaft rotation of the three steering motors from the no-tension default,
    in degrees. Cables only pull, so every angle is >= 0. The two-motor rule
    is checked where it matters (forward_model), since a rate-limited plant
    passes through states where all three shafts are still turned.
    """
    phi1: float = 0.0
    phi2: float = 0.0
    phi3: float = 0.0

    def __post_init__(self):
        for name in ("phi1", "phi2", "phi3"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidMotorSet("motor angle %s should be finite, got %r" % (name, v))
            if v < 0:
                raise InvalidMotorSet("motor angle %s should be >= 0, got %r" % (name, v))
            object.__setattr__(self, name, float(v))

    @classmethod
    def from_seq(cls, seq):
        seq = list(seq)
        if len(seq) != N_MOTORS:
            raise InvalidMotorSet("expect %d motor angles, got %d" % (N_MOTORS, len(seq)))
        return cls(*seq)

    def values(self):
        return (self.phi1, self.phi2, self.phi3)

    def active(self):
        """Indices (0-based) of motors with a non-zero angle."""
        return tuple(i for i, v in enumerate(self.values()) if v > 0)


@dataclass(frozen = True)
class SteeringSector:
    """
    id           S1, S2 or S3.
    theta_range  half-open interval [lo, hi) in degrees.
    engaged      1-based indices of the two motors bounding the sector,
                 the lower bearing first.
    idle         1-based index of the slack motor.
    """
    id: str
    theta_range: tuple
    engaged: tuple
    idle: int

    @property
    def index(self):
        return int(self.id[1:]) - 1


SECTORS = (
    SteeringSector("S1", (0.0, 120.0), (1, 2), 3),
    SteeringSector("S2", (120.0, 240.0), (2, 3), 1),
    SteeringSector("S3", (240.0, 360.0), (3, 1), 2),
)


@dataclass(frozen = True)
class ArmAngles:
    """Result of the forward model; theta is 0 and flagged when alpha is 0."""
    alpha: float
    theta: float
    theta_defined: bool = True


def sector_of(theta):
    """
    @abstract      Find the steering sector governing a rotation angle.
    @param theta   Arm rotation angle in degrees, any finite value [float]
    @return        The SteeringSector whose half-open range holds theta.
    """
    if not math.isfinite(theta):
        raise OutOfRange("theta should be finite, got %r" % (theta,))
    j = int(normalize_angle(theta) // SECTOR_SPAN)
    return SECTORS[min(j, N_MOTORS - 1)]

def _sector_of_pair(i, j):
    pair = {i, j}
    for sec in SECTORS:
        if pair == {sec.engaged[0] - 1, sec.engaged[1] - 1}:
            return sec
    raise InvalidMotorSet("motors %d and %d do not bound a sector" % (i + 1, j + 1))

def forward_model(phis, k = DEFAULT_K):
    """
    @abstract     Pitch and rotation of the arm produced by the steering motors.
    @param phis   Motor angles, a MotorAngles or a sequence of three floats.
    @param k      Model coefficient, pitch degrees per motor degree [float]
    @return       ArmAngles(alpha, theta, theta_defined).
    @note         For the pair (a, b) engaged in sector j (a at the lower
                  bearing 120j, b at the upper one):
                    alpha = k * sqrt(a^2 - a*b + b^2)
                    theta = 120j + 120 * b / (a + b)
                  which for S3 is (360 phi1 + 240 phi3) / (phi1 + phi3).
    """
    k = check_k(k)
    if not isinstance(phis, MotorAngles):
        phis = MotorAngles.from_seq(phis)
    phi = phis.values()
    active = phis.active()
    if len(active) == N_MOTORS:
        raise InvalidMotorSet("all three steering motors are pulling: %r" % (phi,))
    if not active:
        return ArmAngles(0.0, 0.0, False)
    if len(active) == 1:
        i = active[0]
        return ArmAngles(k * phi[i], normalize_angle(motor_bearing(i)))

    sec = _sector_of_pair(*active)
    a = phi[sec.engaged[0] - 1]
    b = phi[sec.engaged[1] - 1]
    alpha = k * math.sqrt(a * a - a * b + b * b)
    theta = sec.theta_range[0] + SECTOR_SPAN * b / (a + b)
    return ArmAngles(alpha, normalize_angle(theta))

def inverse_model(alpha, theta, k = DEFAULT_K):
    """
    @abstract     Feedforward motor angles for a desired pitch and rotation.
    @param alpha  Arm pitch angle in degrees, within [0, 90] [float]
    @param theta  Arm rotation angle in degrees [float]
    @param k      Model coefficient [float]
    @return       MotorAngles with the sector's idle motor at 0.
    @note         With t the fraction of the sector covered by theta, the
                  lower motor gets (1-t)*s and the upper one t*s where
                  s = alpha / (k * sqrt(1 - 3t + 3t^2)).
    """
    k = check_k(k)
    if not math.isfinite(alpha) or alpha < 0 or alpha > MODEL_ALPHA_MAX:
        raise OutOfRange("alpha should be in [0, %g], got %r" % (MODEL_ALPHA_MAX, alpha))
    sec = sector_of(theta)
    if alpha == 0:
        return MotorAngles(0.0, 0.0, 0.0)
    t = (normalize_angle(theta) - sec.theta_range[0]) / SECTOR_SPAN
    s = alpha / (k * math.sqrt(1.0 - 3.0 * t + 3.0 * t * t))
    phi = [0.0] * N_MOTORS
    phi[sec.engaged[0] - 1] = (1.0 - t) * s
    phi[sec.engaged[1] - 1] = t * s
    return MotorAngles(*phi)

def reduce_motor_set(phis):
    """
    @abstract    Remove the pull shared by all three cables.
    @param phis  MotorAngles, possibly with three non-zero angles.
    @return      MotorAngles with at most two non-zero angles.
    @note        Equal pull on cables 120 degrees apart bends nothing, so the
                 reduced set gives the same pose.
    """
    phi = phis.values()
    m = min(phi)
    if m <= 0:
        return phis
    return MotorAngles(*[max(0.0, v - m) for v in phi])

def angles_to_vector(alpha, theta):
    """Deflection as a 2-vector (horizontal, vertical) of magnitude alpha."""
    c, s = cos_sin_deg(theta)
    return (alpha * c, alpha * s)

def vector_to_angles(u, v):
    """Inverse of angles_to_vector; theta flagged undefined at zero length."""
    alpha = math.hypot(u, v)
    if alpha == 0:
        return ArmAngles(0.0, 0.0, False)
    return ArmAngles(alpha, normalize_angle(math.degrees(math.atan2(v, u))))

def polar_to_cartesian(pose):
    """
    @abstract     Spherical arm pose to Cartesian tip position.
    @param pose   PolarPose.
    @return       CartesianPoint with x = R cos(alpha),
                  y = R sin(alpha) cos(theta), z = R sin(alpha) sin(theta).
    """
    ca, sa = cos_sin_deg(pose.alpha)
    ct, st = cos_sin_deg(pose.theta)
    rs = pose.R * sa
    return CartesianPoint(pose.R * ca, rs * ct, rs * st)

def cartesian_to_polar(p):
    """
    @abstract     Cartesian tip position to spherical arm pose.
    @param p      CartesianPoint, not the origin.
    @return       PolarPose; theta is 0 when the point is on the +x/-x axis.
    """
    R = p.norm()
    if R == 0:
        raise DegenerateInput("the origin has no arm pose")
    rho = math.hypot(p.y, p.z)
    alpha = math.degrees(math.atan2(rho, p.x))
    theta = math.degrees(math.atan2(p.z, p.y)) if rho > 0 else 0.0
    return PolarPose(R, alpha, theta)

def in_workspace(pose):
    """True iff the pose lies in the spherical-sector workspace of the arm."""
    return (WORKSPACE_R_MIN <= pose.R <= WORKSPACE_R_MAX and
            pose.alpha <= WORKSPACE_ALPHA_MAX)
