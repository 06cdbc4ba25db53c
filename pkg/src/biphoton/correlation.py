"""Transverse correlation kernels G(x - x') between the two photons."""
from dataclasses import dataclass
import math

import numpy as np

from .errors import ParameterError, UnsupportedEvaluationError

DELTA = "delta"
UNIFORM = "uniform"
GAUSSIAN = "gaussian"
KINDS = (DELTA, UNIFORM, GAUSSIAN)

# Correlation width that reproduces the pump-focused patterns, in units of d.
DEFAULT_GAUSSIAN_WIDTH = 0.56


@dataclass(frozen=True)
class CorrelationKernel:
    """One of three correlation regimes.

    ``delta``: both photons cross the aperture at the same point.
    ``uniform``: no transverse correlation, G = 1.
    ``gaussian``: G = exp(-((x - x') / width_w) ** 2), peak 1.
    """

    kind: str
    width_w: float = None

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in KINDS:
            raise ParameterError("kind", f"must be one of {KINDS}, got {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == GAUSSIAN:
            if self.width_w is None or not math.isfinite(self.width_w) or self.width_w <= 0:
                raise ParameterError("width_w", f"gaussian kernel needs width_w > 0, got {self.width_w!r}")
            object.__setattr__(self, "width_w", float(self.width_w))
        elif self.width_w is not None:
            raise ParameterError("width_w", f"{kind} kernel takes no width")

    @classmethod
    def delta(cls):
        return cls(DELTA)

    @classmethod
    def uniform(cls):
        return cls(UNIFORM)

    @classmethod
    def gaussian(cls, width_w=DEFAULT_GAUSSIAN_WIDTH):
        return cls(GAUSSIAN, width_w)

    def describe(self):
        if self.kind == GAUSSIAN:
            return f"gaussian(w={self.width_w!r})"
        return self.kind


def evaluate(k, dx):
    """Pointwise G(dx); scalars in, scalars out, arrays in, arrays out."""
    if k.kind == DELTA:
        raise UnsupportedEvaluationError(
            "the delta kernel has no pointwise value; use wavepacket.amplitude_delta"
        )
    dx = np.asarray(dx, dtype=np.float64)
    if k.kind == UNIFORM:
        out = np.ones_like(dx)
    else:
        r = dx / k.width_w
        out = np.exp(-(r * r))
    return out if out.ndim else float(out)
