"""Transmission gratings, quadrature grids and their Fourier transforms.

Lengths are dimensionless. The usual choice is the grating period as the
unit (``d = 1``), which puts wave numbers in units of ``2 pi / d`` once
divided by ``2 pi``.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import _kernels
from .errors import ParameterError, QuadratureCoverageError


@dataclass(frozen=True)
class ApertureSpec:
    """An N-slit rectangular transmission grating.

    Slit ``m`` (``m = 0 .. N-1``) is the half-open interval
    ``[x_left(m), x_left(m) + s)`` with
    ``x_left(m) = center_offset - ((N-1) d + s) / 2 + m d``.
    """

    period_d: float
    slit_width_s: float
    slit_count_N: int
    amplitude_A0: float = 1.0
    center_offset: float = 0.0

    def __post_init__(self):
        for name in ("period_d", "slit_width_s", "amplitude_A0", "center_offset"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(name, f"must be finite, got {value!r}")
        if self.slit_width_s <= 0:
            raise ParameterError("slit_width_s", f"must be > 0, got {self.slit_width_s!r}")
        if self.slit_width_s > self.period_d:
            raise ParameterError(
                "slit_width_s",
                f"must not exceed period_d ({self.slit_width_s!r} > {self.period_d!r})",
            )
        if int(self.slit_count_N) != self.slit_count_N or self.slit_count_N < 1:
            raise ParameterError("slit_count_N", f"must be an integer >= 1, got {self.slit_count_N!r}")
        if self.amplitude_A0 <= 0:
            raise ParameterError("amplitude_A0", f"must be > 0, got {self.amplitude_A0!r}")
        object.__setattr__(self, "slit_count_N", int(self.slit_count_N))

    @property
    def support_width(self):
        return (self.slit_count_N - 1) * self.period_d + self.slit_width_s

    @property
    def support(self):
        """(left, right) ends of the region where A(x) can be nonzero."""
        half = 0.5 * self.support_width
        return self.center_offset - half, self.center_offset + half

    def slit_left_edges(self):
        left = self.center_offset - 0.5 * self.support_width
        return left + self.period_d * np.arange(self.slit_count_N)

    def with_amplitude(self, amplitude):
        return ApertureSpec(self.period_d, self.slit_width_s, self.slit_count_N,
                            amplitude, self.center_offset)


def make_grating(d, s, N, A0=1.0, center_offset=0.0):
    """Build a validated grating of ``N`` slits of width ``s`` and period ``d``."""
    for name, value in (("period_d", d), ("slit_width_s", s), ("amplitude_A0", A0)):
        if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
            raise ParameterError(name, f"must be a real number, got {value!r}")
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)):
        raise ParameterError("slit_count_N", f"must be an integer, got {N!r}")
    return ApertureSpec(float(d), float(s), int(N), float(A0), float(center_offset))


def transmittance(ap, x):
    """Amplitude transmittance A(x): ``A0`` inside a slit, 0 elsewhere.

    Accepts scalars or arrays; returns the same shape.
    """
    x = np.asarray(x, dtype=np.float64)
    left0 = ap.center_offset - 0.5 * ap.support_width
    guess = np.floor((x - left0) / ap.period_d)
    inside = np.zeros(x.shape, dtype=bool)
    # rounding in the floor can land one slit low at an exact left edge
    for m in (guess, guess + 1):
        valid = (m >= 0) & (m < ap.slit_count_N)
        edge = left0 + m * ap.period_d
        inside |= valid & (x >= edge) & (x < edge + ap.slit_width_s)
    out = np.where(inside, ap.amplitude_A0, 0.0)
    return out if out.ndim else float(out)


def analytic_ft(ap, q):
    """Closed-form transform of A(x) with the ``exp(+i q x)`` convention.

    Removable singularities of the Dirichlet factor and of the slit envelope
    are replaced by their limits, so this is finite for every real ``q``.
    """
    q_arr = np.asarray(q, dtype=np.float64)
    out = _kernels.grating_ft(q_arr, ap.period_d, ap.slit_width_s, ap.slit_count_N,
                              ap.amplitude_A0, ap.center_offset)
    return out if q_arr.ndim else complex(out)


def analytic_ft_squared(ap, q):
    """Transform of A(x)**2; same support, amplitude ``A0**2``."""
    return analytic_ft(ap.with_amplitude(ap.amplitude_A0 ** 2), q)


def dirichlet_factor(ap, q):
    """sin(N d q / 2) / sin(d q / 2), equal to +-N at its singular points."""
    out = _kernels.dirichlet_numpy(q, ap.period_d, ap.slit_count_N)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class XGrid:
    """Uniform grid of ``n_points`` nodes on ``[x_min, x_max]``.

    Quadrature samples sit at the midpoints of the ``n_points - 1`` cells.
    """

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ParameterError("x_min", "grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise ParameterError("x_max", f"must exceed x_min ({self.x_max!r} <= {self.x_min!r})")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ParameterError("n_points", f"must be an integer >= 2, got {self.n_points!r}")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def spacing(self):
        return (self.x_max - self.x_min) / (self.n_points - 1)

    def nodes(self):
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def midpoints(self):
        return self.x_min + (np.arange(self.n_points - 1) + 0.5) * self.spacing

    def covers(self, ap):
        left, right = ap.support
        tol = 1e-12 * max(1.0, abs(left), abs(right))
        return self.x_min <= left + tol and self.x_max >= right - tol

    def require_covers(self, ap):
        if not self.covers(ap):
            raise QuadratureCoverageError(
                f"x-grid [{self.x_min!r}, {self.x_max!r}] does not contain the aperture "
                f"support [{ap.support[0]!r}, {ap.support[1]!r}]"
            )

    @classmethod
    def covering(cls, ap, n_points=4096, margin=0.0):
        """Grid spanning the aperture support (plus ``margin`` on each side)."""
        left, right = ap.support
        return cls(left - margin, right + margin, n_points)

    @classmethod
    def aligned(cls, ap, cells_per_slit=64):
        """Grid over the support whose cell boundaries fall on every slit edge.

        Requires ``d / s`` to be a ratio of small integers; raises otherwise.
        """
        h = ap.slit_width_s / cells_per_slit
        per_period = ap.period_d / h
        if abs(per_period - round(per_period)) > 1e-9 * per_period:
            raise ParameterError(
                "cells_per_slit",
                f"d/s = {ap.period_d / ap.slit_width_s!r} gives no integer cell count per period",
            )
        n_cells = (ap.slit_count_N - 1) * round(per_period) + cells_per_slit
        left, right = ap.support
        return cls(left, right, n_cells + 1)


def quadrature_nodes(ap, quad):
    """Midpoint samples of ``quad`` where A(x) is nonzero, with weights A(x) dx."""
    quad.require_covers(ap)
    x = quad.midpoints()
    a = transmittance(ap, x)
    keep = a != 0.0
    return x[keep], a[keep] * quad.spacing, quad.spacing


def slit_nodes(ap, cells_per_slit=32):
    """Midpoint samples that tile each slit exactly, with weights A(x) dx.

    The cells move with the slit edges, so quantities built on these nodes
    vary smoothly with ``d`` and ``s``; fitting relies on that.
    """
    h = ap.slit_width_s / cells_per_slit
    offsets = (np.arange(cells_per_slit) + 0.5) * h
    x = (ap.slit_left_edges()[:, None] + offsets[None, :]).ravel()
    return x, np.full(x.size, ap.amplitude_A0 * h), h
