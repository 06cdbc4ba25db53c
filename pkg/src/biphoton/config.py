"""Run configuration: flat ``key = value`` text plus command-line overrides.

Lengths may carry a physical unit (``m``, ``mm``, ``um``/``µm``, ``nm``) or
the suffix ``d`` (multiples of the grating period). They are converted to
units of the period as soon as an aperture is built, so everything
downstream works with ``d = 1``.
"""
from dataclasses import dataclass, fields, replace
import math
import re

from .aperture import XGrid, make_grating
from .correlation import DEFAULT_GAUSSIAN_WIDTH, CorrelationKernel
from .errors import ConfigError, ParameterError
from .wavepacket import QGrid

UNITS = {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9}
DETECTIONS = ("one-photon", "two-photon-diagonal", "both")
NORMALIZATIONS = ("raw", "peak")

_LENGTH = re.compile(r"^\s*([-+0-9.eE]+)\s*([a-zA-Zµ]*)\s*$")


def parse_length(text):
    """Split ``'250um'`` into ``(250e-6, 'm')``, ``'0.56d'`` into ``(0.56, 'd')``
    and a bare number into ``(value, '')``."""
    m = _LENGTH.match(str(text))
    if not m:
        raise ValueError(f"not a length: {text!r}")
    number, unit = m.groups()
    value = float(number)
    if not math.isfinite(value):
        raise ValueError(f"not a finite length: {text!r}")
    if unit == "" or unit == "d":
        return value, unit
    if unit not in UNITS:
        raise ValueError(f"unknown length unit {unit!r} in {text!r}")
    return value * UNITS[unit], "m"


@dataclass(frozen=True)
class RunConfig:
    period: str = "1"
    slit_width: str = "0.5"
    slits: int = 20
    amplitude: float = 1.0
    kernel: str = "delta"
    width: str = None
    q_min: float = -4.0
    q_max: float = 4.0
    q_points: int = 801
    x_points: int = 4096
    detection: str = "one-photon"
    normalization: str = "raw"
    out: str = "pattern.csv"
    joint_out: str = None
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kernel", str(self.kernel).strip().lower())
        self.validate()

    # -- conversion -------------------------------------------------------

    def _normalised(self, key, text):
        period, p_unit = self._period()
        try:
            value, unit = parse_length(text)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
        if unit == "d":
            return value
        if unit != p_unit:
            raise ConfigError(
                f"{key}: {text!r} mixes units with period {self.period!r}; "
                "use the same kind of unit or a 'd' suffix"
            )
        return value / period

    def _period(self):
        try:
            value, unit = parse_length(self.period)
        except ValueError as exc:
            raise ConfigError(f"period: {exc}") from None
        if unit == "d":
            raise ConfigError("period: cannot be given in units of itself")
        if not value > 0:
            raise ConfigError(f"period: must be > 0, got {self.period!r}")
        return value, unit

    def aperture(self):
        try:
            return make_grating(1.0, self._normalised("slit_width", self.slit_width),
                                self.slits, self.amplitude)
        except ParameterError as exc:
            raise ConfigError(f"{_CONFIG_NAME.get(exc.field, exc.field)}: {exc.message}") from None

    def kernel_spec(self):
        try:
            if self.kernel == "gaussian":
                width = (DEFAULT_GAUSSIAN_WIDTH if self.width is None
                         else self._normalised("width", self.width))
                return CorrelationKernel("gaussian", width)
            return CorrelationKernel(self.kernel)
        except ParameterError as exc:
            raise ConfigError(f"{_CONFIG_NAME.get(exc.field, exc.field)}: {exc.message}") from None

    def q_grid(self):
        try:
            return QGrid(self.q_min, self.q_max, self.q_points)
        except ParameterError as exc:
            raise ConfigError(f"{_CONFIG_NAME.get(exc.field, exc.field)}: {exc.message}") from None

    def x_grid(self):
        try:
            return XGrid.covering(self.aperture(), self.x_points)
        except ParameterError as exc:
            raise ConfigError(f"x_points: {exc}") from None

    def validate(self):
        if self.detection not in DETECTIONS:
            raise ConfigError(f"detection: must be one of {DETECTIONS}, got {self.detection!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"normalization: must be one of {NORMALIZATIONS}, got {self.normalization!r}")
        if self.kernel != "gaussian" and self.width is not None:
            raise ConfigError(f"width: only the gaussian kernel takes a width (kernel={self.kernel!r})")
        if not self.noise >= 0:
            raise ConfigError(f"noise: must be >= 0, got {self.noise!r}")
        self.aperture()
        self.kernel_spec()
        self.q_grid()
        self.x_grid()


# user-facing key for each model-level field name
_CONFIG_NAME = {
    "slit_width_s": "slit_width", "slit_count_N": "slits", "amplitude_A0": "amplitude",
    "period_d": "period", "width_w": "width", "kind": "kernel",
    "n_points": "q_points",
}

_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CASTS = {"int": int, "float": float, "str": str}


def _coerce(key, text):
    if key not in _TYPES:
        raise ConfigError(f"{key}: unknown configuration key")
    text = text.strip()
    if text.lower() in ("", "none") and key in ("width", "joint_out"):
        return None
    cast = _CASTS[_TYPES[key]] if isinstance(_TYPES[key], str) else _TYPES[key]
    try:
        if cast is int:
            value = float(text)
            if value != int(value):
                raise ValueError
            return int(value)
        return cast(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {text!r} as {cast.__name__}") from None


def parse_config(text, base=None):
    """Read ``key = value`` lines (``#`` starts a comment) into a RunConfig."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _coerce(key, value)
    return replace(base or RunConfig(), **values)


def apply_overrides(cfg, overrides):
    """Return ``cfg`` with non-None ``overrides`` applied (flags win)."""
    clean = {}
    for key, value in overrides.items():
        if value is None:
            continue
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise ConfigError(f"{key}: unknown configuration key")
        if isinstance(value, str) and key not in ("period", "slit_width", "width", "kernel",
                                                   "detection", "normalization", "out",
                                                   "joint_out"):
            value = _coerce(key, value)
        clean[key] = value
    return replace(cfg, **clean)


def serialize_config(cfg):
    """Canonical text form; ``parse_config(serialize_config(c)) == c``."""
    lines = []
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if value is None:
            text = "none"
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"
