# JSON configuration
#
# One file with four optional sections: plant, gains, loop and experiment.
# Missing fields take the defaults below; unknown keys are rejected with
# their dotted path.

import copy
import json
import os
from dataclasses import asdict

from .errors import ConfigError, OutOfRange
from .kinematics import DEFAULT_K, CartesianPoint, PolarPose
from .plant import MAX_DT, PlantConfig
from .control import DEFAULT_DT, LoopGains, PidGains, default_length_gains

ENV_CONFIG = "EVERKIN_CONFIG"
SEED_MAX = 2 ** 64 - 1
EXPERIMENTS = ("estimate-k", "circle-sweep", "step-compare", "workspace-map")

DEFAULTS = {
    "plant": asdict(PlantConfig()),
    "gains": {
        "length": asdict(default_length_gains()),
        "steering": asdict(PidGains()),
    },
    "loop": {
        "dt": DEFAULT_DT,
        "duration": 10.0,
        "initial_length": 0.3,
        "k": DEFAULT_K,
        "feedforward": True,
        "band": 0.05,
    },
    "experiment": {
        "name": "step-compare",
        "seed": 0,
        # step-compare
        "target": {"R": 1.0, "alpha": 30.0, "theta": 45.0},
        "start": None,
        # circle-sweep
        "alpha_levels": [10.4, 15.6, 20.8],
        "n_points": 72,
        "sweep_length": 0.6,
        "dwell_limit": 5.0,
        # estimate-k
        "pressures": [3.0, 6.0, 9.0],
        "lengths": [0.6],
        "motor": 0,
        "noise_sigma": 0.2,
        "k_threshold": 0.01,
        # workspace-map
        "r_levels": [0.3, 0.6, 0.9, 1.2],
        "alpha_step": 5.0,
        "theta_step": 10.0,
        "alpha_max": 90.0,
    },
}

# fields accepting a value of another shape than their default
_POSE_FIELDS = ("experiment.target", "experiment.start")


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)

def _check_value(path, value, default):
    if path in _POSE_FIELDS:
        return _check_pose(path, value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(path, "expect true or false, got %r" % (value,))
        return value
    if isinstance(default, int) and path in ("experiment.seed", "experiment.n_points",
                                             "experiment.motor"):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(path, "expect an integer, got %r" % (value,))
        return value
    if _is_number(default):
        if not _is_number(value):
            raise ConfigError(path, "expect a number, got %r" % (value,))
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(path, "expect a string, got %r" % (value,))
        return value
    if isinstance(default, list):
        if not isinstance(value, list) or not all(_is_number(v) for v in value):
            raise ConfigError(path, "expect a list of numbers, got %r" % (value,))
        return [float(v) for v in value]
    raise ConfigError(path, "unsupported value %r" % (value,))

def _check_pose(path, value):
    if value is None:
        if path == "experiment.target":
            raise ConfigError(path, "target is required")
        return None
    if isinstance(value, list):
        if len(value) != 3 or not all(_is_number(v) for v in value):
            raise ConfigError(path, "expect a point [x, y, z], got %r" % (value,))
        return [float(v) for v in value]
    if isinstance(value, dict):
        for key in value:
            if key not in ("R", "alpha", "theta"):
                raise ConfigError("%s.%s" % (path, key), "unknown key")
        if set(value) != {"R", "alpha", "theta"} or not all(_is_number(v) for v in value.values()):
            raise ConfigError(path, "expect numbers R, alpha and theta")
        return {k: float(v) for k, v in value.items()}
    raise ConfigError(path, "expect a pose object or a point [x, y, z]")

def _merge(defaults, data, path):
    if not isinstance(data, dict):
        raise ConfigError(path or "<root>", "expect an object")
    out = copy.deepcopy(defaults)
    for key, value in data.items():
        sub = "%s.%s" % (path, key) if path else key
        if key not in defaults:
            raise ConfigError(sub, "unknown key")
        if isinstance(defaults[key], dict) and sub not in _POSE_FIELDS:
            out[key] = _merge(defaults[key], value, sub)
        else:
            out[key] = _check_value(sub, value, defaults[key])
    return out


class Settings:
    """Effective configuration: defaults overlaid with a config file and flags."""
    def __init__(self, data = None, source = None):
        self.data = _merge(DEFAULTS, data or {}, "")
        self.source = source
        self._validate()

    def _validate(self):
        self.plant_config()
        self.loop_gains()
        loop = self.data["loop"]
        if not (0 < loop["dt"] <= MAX_DT):
            raise ConfigError("loop.dt", "should be in (0, %g], got %r" % (MAX_DT, loop["dt"]))
        if not (loop["duration"] >= loop["dt"]):
            raise ConfigError("loop.duration", "should be at least one step")
        if not (0 <= loop["initial_length"] <= 1.2):
            raise ConfigError("loop.initial_length", "should be in [0, 1.2]")
        if not (loop["k"] > 0):
            raise ConfigError("loop.k", "should be > 0")
        if not (0 < loop["band"] < 1):
            raise ConfigError("loop.band", "should be in (0, 1)")
        exp = self.data["experiment"]
        if exp["name"] not in EXPERIMENTS:
            raise ConfigError("experiment.name", "should be one of %s" % ", ".join(EXPERIMENTS))
        if not (0 <= exp["seed"] <= SEED_MAX):
            raise ConfigError("experiment.seed", "should be an unsigned 64-bit integer")
        if exp["motor"] not in (0, 1, 2):
            raise ConfigError("experiment.motor", "should be 0, 1 or 2")
        if exp["n_points"] < 3:
            raise ConfigError("experiment.n_points", "should be >= 3")
        for name in ("sweep_length", "dwell_limit", "alpha_step", "theta_step", "k_threshold"):
            if not (exp[name] > 0):
                raise ConfigError("experiment." + name, "should be > 0")
        for name in ("alpha_levels", "pressures", "lengths", "r_levels"):
            if not exp[name]:
                raise ConfigError("experiment." + name, "should not be empty")
        try:
            self.target()
            self.start()
        except (OutOfRange, ValueError) as e:
            raise ConfigError("experiment.target", str(e))

    def plant_config(self):
        try:
            return PlantConfig(**self.data["plant"])
        except OutOfRange as e:
            raise ConfigError("plant", str(e))

    def loop_gains(self):
        try:
            return LoopGains(PidGains(**self.data["gains"]["length"]),
                             PidGains(**self.data["gains"]["steering"]))
        except OutOfRange as e:
            raise ConfigError("gains", str(e))

    @property
    def loop(self):
        return self.data["loop"]

    @property
    def experiment(self):
        return self.data["experiment"]

    @staticmethod
    def _pose(value):
        if value is None:
            return None
        if isinstance(value, list):
            return CartesianPoint(*value)
        return PolarPose(value["R"], value["alpha"], value["theta"])

    def target(self):
        """Target as a PolarPose, or a CartesianPoint when given as [x, y, z]."""
        return self._pose(self.experiment["target"])

    def start(self):
        return self._pose(self.experiment["start"])

    def override(self, **kwargs):
        """
        @abstract   Apply command-line overrides; None values are ignored.
        @param      sag, feedforward, seed, dt, duration, pressure.
        @return     self.
        """
        mapping = {"sag": ("plant", "gravity_sag_mag"),
                   "pressure": ("plant", "pressure"),
                   "feedforward": ("loop", "feedforward"),
                   "dt": ("loop", "dt"),
                   "duration": ("loop", "duration"),
                   "seed": ("experiment", "seed")}
        data = copy.deepcopy(self.data)
        for key, value in kwargs.items():
            if key not in mapping:
                raise ConfigError(key, "unknown override")
            if value is None:
                continue
            sec, field = mapping[key]
            data[sec][field] = value
        self.data = _merge(DEFAULTS, data, "")
        self._validate()
        return self

    def snapshot(self):
        """Canonical one-line JSON of the effective configuration."""
        return json.dumps(self.data, sort_keys = True, separators = (",", ":"))


def load_settings(path = None, environ = None):
    """
    @abstract       Load the effective configuration.
    @param path     JSON config file; falls back to $EVERKIN_CONFIG, then to
                    the defaults [str]
    @param environ  Environment mapping, os.environ when None.
    @return         Settings.
    @raise          OSError when the file cannot be read; ConfigError on text
                    that is not UTF-8, bad JSON or bad values.
    """
    if environ is None:
        environ = os.environ
    if not path:
        path = environ.get(ENV_CONFIG) or None
    if path is None:
        return Settings()
    try:
        with open(path, "r", encoding = "utf-8") as fp:
            text = fp.read()
    except UnicodeDecodeError as e:
        raise ConfigError(path, "not UTF-8 text: %s" % e.reason)
    try:
        data = json.loads(text)
    except ValueError as e:
        raise ConfigError(path, "invalid JSON: %s" % e)
    return Settings(data, source = path)

def settings_from_options(options):
    """Settings for a command: --config (or $EVERKIN_CONFIG) plus the
    override flags the command defines."""
    settings = load_settings(getattr(options, "config", None))
    no_ff = getattr(options, "no_feedforward", False)
    return settings.override(
        sag = getattr(options, "sag", None),
        pressure = getattr(options, "pressure", None),
        feedforward = False if no_ff else None,
        seed = getattr(options, "seed", None),
        dt = getattr(options, "dt", None),
        duration = getattr(options, "duration", None))
