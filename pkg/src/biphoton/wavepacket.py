"""Two-photon wave packet F(q, q') behind an aperture.

F(q, q') = 1/(2 pi) * iint A(x) A(x') G(x - x') exp(i (q x + q' x')) dx dx'

The delta and uniform kernels reduce to closed forms built on
:func:`biphoton.aperture.analytic_ft`; the gaussian kernel is integrated with
a midpoint rule on an x-grid. Wave numbers on a :class:`QGrid` are stored in
units of ``2 pi / d``.
"""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from . import _kernels
from .aperture import XGrid, analytic_ft, analytic_ft_squared, quadrature_nodes
from .correlation import DELTA, GAUSSIAN, UNIFORM
from .errors import ParameterError, ResolutionWarning

DEFAULT_X_POINTS = 4096
DEFAULT_Q_HALF_RANGE = 4.0
DEFAULT_Q_POINTS = 801
# coarsest recommended quadrature spacing, as a fraction of the slit width
MAX_DX_PER_SLIT = 1.0 / 32.0


@dataclass(frozen=True)
class QGrid:
    """Uniform grid of normalised wave numbers (units of ``2 pi / d``)."""

    q_min: float = -DEFAULT_Q_HALF_RANGE
    q_max: float = DEFAULT_Q_HALF_RANGE
    n_points: int = DEFAULT_Q_POINTS

    def __post_init__(self):
        if not (math.isfinite(self.q_min) and math.isfinite(self.q_max)):
            raise ParameterError("q_min", "grid bounds must be finite")
        if not self.q_min < self.q_max:
            raise ParameterError("q_max", f"must exceed q_min ({self.q_max!r} <= {self.q_min!r})")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ParameterError("n_points", f"must be an integer >= 2, got {self.n_points!r}")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def spacing(self):
        return (self.q_max - self.q_min) / (self.n_points - 1)

    @property
    def values(self):
        return np.linspace(self.q_min, self.q_max, self.n_points)

    def wavenumbers(self, period):
        """Grid values converted to rad per length for a period ``d``."""
        return self.values * (2.0 * math.pi / period)

    def doubled(self):
        """Grid with the same spacing and twice the span, same centre.

        Returns ``(grid, offset)`` where ``grid.values[offset:offset + n]``
        reproduces this grid's points.
        """
        extra = (self.n_points) // 2
        pad = extra * self.spacing
        return QGrid(self.q_min - pad, self.q_max + pad, self.n_points + 2 * extra), extra


@dataclass(frozen=True)
class BiphotonAmplitude:
    """F(q_i, q'_j) on ``grid x grid``; ``period`` fixes the q normalisation."""

    grid: QGrid
    values: np.ndarray
    regime: str
    period: float = 1.0
    diagnostics: tuple = field(default=())

    def __post_init__(self):
        n = self.grid.n_points
        if self.values.shape != (n, n):
            raise ParameterError("values", f"expected shape {(n, n)}, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("values", "amplitude contains non-finite entries")
        self.values.setflags(write=False)


def amplitude_delta(ap, q_sum):
    """F for perfectly correlated photons; depends on ``q + q'`` only."""
    return analytic_ft_squared(ap, q_sum) / math.sqrt(2.0 * math.pi)


def amplitude_separable(ap, q, q_prime):
    """F for uncorrelated photons: a product of single-photon transforms."""
    return analytic_ft(ap, q) * analytic_ft(ap, q_prime)


def _check_quadrature(ap, quad):
    """Coverage is fatal; coarse sampling is reported and returned."""
    quad.require_covers(ap)
    diagnostics = ()
    if quad.spacing > MAX_DX_PER_SLIT * ap.slit_width_s * (1 + 1e-12):
        msg = (f"quadrature spacing {quad.spacing:.6g} exceeds s/32 = "
               f"{MAX_DX_PER_SLIT * ap.slit_width_s:.6g}")
        warnings.warn(msg, ResolutionWarning, stacklevel=3)
        diagnostics = ("resolution: " + msg,)
    return diagnostics


def _phase_tables(x, q):
    arg = np.outer(x, q)
    return np.cos(arg), np.sin(arg)


def weighted_kernel(ap, k, quad):
    """Nodes, spacing and the matrix ``w_m w_n G(x_m - x_n)`` on nonzero samples."""
    x, w, dx = quadrature_nodes(ap, quad)
    return x, dx, _kernel_matrix(k, x, w)


def _kernel_matrix(k, x, w):
    if k.kind == GAUSSIAN:
        return _kernels.gaussian_matrix(x, w, k.width_w)
    if k.kind == UNIFORM:
        return np.outer(w, w)
    raise ParameterError("kind", "the delta kernel has no kernel matrix")


def _contract(M, x, q_rows, q_cols=None):
    """(1/2pi) E_r^T M E_c with E = exp(i q x), in real arithmetic."""
    cr, sr = _phase_tables(x, q_rows)
    if q_cols is None:
        mc, ms = M @ cr, M @ sr
        re = cr.T @ mc - sr.T @ ms
        cross = cr.T @ ms
        im = cross + cross.T
    else:
        cc, sc = _phase_tables(x, q_cols)
        mc, ms = M @ cc, M @ sc
        re = cr.T @ mc - sr.T @ ms
        im = cr.T @ ms + sr.T @ mc
    return (re + 1j * im) / (2.0 * math.pi)


def biphoton_amplitude(ap, k, g=None, quad=None):
    """Evaluate F(q, q') for kernel ``k`` on the square grid ``g``.

    ``quad`` is only used by the gaussian kernel; by default it spans the
    aperture support with 4096 nodes.
    """
    g = g or QGrid()
    q = g.wavenumbers(ap.period_d)
    diagnostics = ()
    if k.kind == DELTA:
        # F depends on q_i + q_j only: tabulate the 2n - 1 sums once
        n = g.n_points
        sums = (2.0 * g.q_min + g.spacing * np.arange(2 * n - 1)) * (2.0 * math.pi / ap.period_d)
        table = amplitude_delta(ap, sums)
        idx = np.arange(n)
        values = table[idx[:, None] + idx[None, :]]
    elif k.kind == UNIFORM:
        f = analytic_ft(ap, q)
        values = np.outer(f, f)
    else:
        quad = quad or XGrid.covering(ap, DEFAULT_X_POINTS)
        diagnostics = _check_quadrature(ap, quad)
        x, _, M = weighted_kernel(ap, k, quad)
        values = _contract(M, x, q)
    return BiphotonAmplitude(g, np.ascontiguousarray(values), k.kind, ap.period_d, diagnostics)


def diagonal_amplitude(ap, k, g=None, quad=None):
    """F(q_i, q_i) without building the full matrix."""
    g = g or QGrid()
    q = g.wavenumbers(ap.period_d)
    if k.kind == DELTA:
        return amplitude_delta(ap, 2.0 * q)
    if k.kind == UNIFORM:
        return analytic_ft(ap, q) ** 2
    quad = quad or XGrid.covering(ap, DEFAULT_X_POINTS)
    _check_quadrature(ap, quad)
    x, _, M = weighted_kernel(ap, k, quad)
    return _diagonal_from_nodes(M, x, q)


def _diagonal_from_nodes(M, x, q):
    c, s = _phase_tables(x, q)
    mc, ms = M @ c, M @ s
    re = _kernels.coldot(c, mc) - _kernels.coldot(s, ms)
    im = 2.0 * _kernels.coldot(c, ms)
    return (re + 1j * im) / (2.0 * math.pi)


def _marginal_from_nodes(M, x, dx, q):
    # q'-integral of |F|^2 done in closed form (Parseval over x')
    c, s = _phase_tables(x, q)
    mc, ms = M @ c, M @ s
    return (_kernels.coldot(mc, mc) + _kernels.coldot(ms, ms)) / (2.0 * math.pi * dx)


def two_photon_energy(ap, k, g, quad=None, block=256):
    """Sum of ``|F|^2 dq dq'`` over ``g x g``, computed in row blocks.

    Never holds more than ``block`` rows of F, so wide grids fit in memory.
    """
    q = g.wavenumbers(ap.period_d)
    dq = g.spacing * 2.0 * math.pi / ap.period_d
    if k.kind == DELTA:
        n = g.n_points
        sums = (2.0 * g.q_min + g.spacing * np.arange(2 * n - 1)) * (2.0 * math.pi / ap.period_d)
        table = np.abs(amplitude_delta(ap, sums)) ** 2
        # anti-diagonal k = i + j holds min(k, 2n - 2 - k) + 1 entries
        kk = np.arange(2 * n - 1)
        counts = np.minimum(kk, 2 * n - 2 - kk) + 1
        return float(np.sum(table * counts) * dq * dq)
    if k.kind == UNIFORM:
        f2 = np.abs(analytic_ft(ap, q)) ** 2
        return float((f2.sum() * dq) ** 2)
    quad = quad or XGrid.covering(ap, DEFAULT_X_POINTS)
    _check_quadrature(ap, quad)
    x, _, M = weighted_kernel(ap, k, quad)
    c, s = _phase_tables(x, q)
    mc, ms = M @ c, M @ s
    total = 0.0
    for start in range(0, q.size, block):
        cr, sr = c[:, start:start + block], s[:, start:start + block]
        re = cr.T @ mc - sr.T @ ms
        im = cr.T @ ms + sr.T @ mc
        total += float(np.sum(re * re) + np.sum(im * im))
    return total * dq * dq / (2.0 * math.pi) ** 2


def real_space_energy(ap, k, quad=None):
    """iint |A(x) A(x') G(x - x')|^2 dx dx' on the midpoint grid of ``quad``."""
    if k.kind == DELTA:
        raise ParameterError("kind", "the squared delta kernel is not integrable")
    quad = quad or XGrid.covering(ap, DEFAULT_X_POINTS)
    x, dx, M = weighted_kernel(ap, k, quad)
    return float(np.sum(M * M)) / (dx * dx)
