"""Counting rates and the pattern metrics built on them.

Rates are proportional quantities; intensities carry arbitrary units.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .aperture import XGrid, analytic_ft
from .correlation import DELTA, UNIFORM
from .errors import InsufficientPeaksError, ParameterError, WindowTooSmallError
from .wavepacket import (
    DEFAULT_X_POINTS,
    QGrid,
    _check_quadrature,
    _marginal_from_nodes,
    biphoton_amplitude,
    diagonal_amplitude,
    weighted_kernel,
)

RAW = "raw"
PEAK = "peak-normalized"

# Fraction of the row-sum maximum that the two boundary columns may carry
# before the truncated q' integral is flagged.
TRUNCATION_LIMIT = 1e-3
# Local maxima below this fraction of the global peak are ignored.
PEAK_THRESHOLD = 0.1


@dataclass(frozen=True)
class DiffractionPattern:
    q_values: np.ndarray
    intensities: np.ndarray
    normalization: str = RAW
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        q = np.asarray(self.q_values, dtype=np.float64)
        y = np.asarray(self.intensities, dtype=np.float64)
        if q.ndim != 1 or q.shape != y.shape or q.size < 2:
            raise ParameterError("intensities", "q_values and intensities need equal length >= 2")
        if np.any(np.diff(q) <= 0):
            raise ParameterError("q_values", "must be strictly increasing")
        if not np.all(np.isfinite(y)) or np.any(y < 0):
            raise ParameterError("intensities", "must be finite and non-negative")
        if self.normalization not in (RAW, PEAK):
            raise ParameterError("normalization", f"must be {RAW!r} or {PEAK!r}")
        if self.normalization == PEAK and not math.isclose(y.max(), 1.0, rel_tol=1e-12):
            raise ParameterError("intensities", "peak-normalized pattern must have max 1")
        q.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "q_values", q)
        object.__setattr__(self, "intensities", y)

    def peak_normalized(self):
        if self.normalization == PEAK:
            return self
        peak = self.intensities.max()
        if peak <= 0:
            raise ParameterError("intensities", "cannot peak-normalise an all-zero pattern")
        prov = dict(self.provenance, raw_peak=float(peak))
        return DiffractionPattern(self.q_values, self.intensities / peak, PEAK, prov)


@dataclass(frozen=True)
class JointRate:
    grid: QGrid
    values: np.ndarray
    period: float = 1.0
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(self.values < 0):
            raise ParameterError("values", "rates must be non-negative")
        self.values.setflags(write=False)


def _clip_zero(y):
    # |z|^2 is never negative, but guard -0.0 from the real-arithmetic paths
    return np.maximum(y, 0.0)


def two_photon_rate(F):
    """R2(q, q') = |F(q, q')|^2."""
    values = _clip_zero(F.values.real ** 2 + F.values.imag ** 2)
    return JointRate(F.grid, values, F.period, {"kernel": F.regime, "detection": "two-photon"})


def one_photon_rate(R2):
    """R1(q) = sum over q' of R2(q, q') dq', truncated at the grid edges.

    The share of the largest row sum carried by the two boundary columns is
    recorded as ``boundary_fraction``; above ``TRUNCATION_LIMIT`` the
    provenance also gets a ``truncation`` diagnostic.
    """
    dq = R2.grid.spacing * 2.0 * math.pi / R2.period
    rows = R2.values.sum(axis=1) * dq
    edge = (R2.values[:, 0] + R2.values[:, -1]) * dq
    peak = rows.max()
    fraction = float(edge.max() / peak) if peak > 0 else 0.0
    prov = dict(R2.provenance, detection="one-photon", boundary_fraction=fraction)
    if fraction > TRUNCATION_LIMIT:
        prov["diagnostic"] = "truncation"
    return DiffractionPattern(R2.grid.values, _clip_zero(rows), RAW, prov)


def diagonal_pattern(F):
    """Coincidence rate at equal wave numbers, |F(q, q)|^2."""
    diag = np.diagonal(F.values)
    values = _clip_zero(diag.real ** 2 + diag.imag ** 2)
    prov = {"kernel": F.regime, "detection": "two-photon-diagonal"}
    return DiffractionPattern(F.grid.values, values, RAW, prov)


def classical_one_photon(ap, g):
    """Single-photon Fraunhofer pattern |F[A](q)|^2."""
    f = analytic_ft(ap, g.wavenumbers(ap.period_d))
    prov = {"kernel": UNIFORM, "detection": "one-photon", "model": "classical"}
    return DiffractionPattern(g.values, np.abs(f) ** 2, RAW, prov)


def diagonal_rate(ap, k, g, quad=None):
    """Same values as ``diagonal_pattern(biphoton_amplitude(...))``, O(n) memory in q."""
    f = diagonal_amplitude(ap, k, g, quad)
    prov = {"kernel": k.kind, "detection": "two-photon-diagonal"}
    return DiffractionPattern(g.values, np.abs(f) ** 2, RAW, prov)


def marginal_one_photon(ap, k, g, quad=None):
    """One-photon rate with the q' integral taken over the whole real line.

    Uses Parseval in x' instead of summing a truncated q' grid, so there is
    no window cutoff. The delta kernel gives the constant int A^4 dx / 2 pi.
    """
    q = g.wavenumbers(ap.period_d)
    prov = {"kernel": k.kind, "detection": "one-photon", "model": "untruncated"}
    if k.kind == DELTA:
        a4 = ap.slit_count_N * ap.slit_width_s * ap.amplitude_A0 ** 4
        values = np.full(q.size, a4 / (2.0 * math.pi))
    elif k.kind == UNIFORM:
        a2 = ap.slit_count_N * ap.slit_width_s * ap.amplitude_A0 ** 2
        values = np.abs(analytic_ft(ap, q)) ** 2 * a2
    else:
        quad = quad or XGrid.covering(ap, DEFAULT_X_POINTS)
        _check_quadrature(ap, quad)
        x, dx, M = weighted_kernel(ap, k, quad)
        values = _marginal_from_nodes(M, x, dx, q)
    return DiffractionPattern(g.values, _clip_zero(values), RAW, prov)


def truncation_residual(ap, k, g, quad=None):
    """Largest change of the truncated one-photon rate when the q' span doubles.

    Returned relative to the peak of the doubled-range reference.
    """
    base = one_photon_rate(two_photon_rate(biphoton_amplitude(ap, k, g, quad)))
    wide, offset = g.doubled()
    ref = one_photon_rate(two_photon_rate(biphoton_amplitude(ap, k, wide, quad)))
    ref_vals = ref.intensities[offset:offset + g.n_points]
    return float(np.max(np.abs(base.intensities - ref_vals)) / ref_vals.max())


def _window_mask(p, window):
    lo, hi = window
    tol = 1e-9 * max(1.0, abs(lo), abs(hi))
    return (p.q_values >= lo - tol) & (p.q_values <= hi + tol)


def visibility(p, window=None, period=1.0):
    """(max - min) / (max + min) over ``window`` (default: the whole pattern).

    The window must span at least one ``period`` (normalised units) and hold
    at least 8 samples.
    """
    if window is None:
        window = (p.q_values[0], p.q_values[-1])
    mask = _window_mask(p, window)
    if window[1] - window[0] < period * (1 - 1e-12) or mask.sum() < 8:
        raise WindowTooSmallError(
            f"window {window} holds {int(mask.sum())} samples; need >= 8 and a span >= {period}"
        )
    y = p.intensities[mask]
    hi, lo = y.max(), y.min()
    if hi + lo == 0:
        return 0.0
    return float((hi - lo) / (hi + lo))


def find_peaks(p, threshold=PEAK_THRESHOLD):
    """Local maxima above ``threshold * max``, refined by a 3-point parabola.

    Returns ``(positions, heights)`` in ascending position order.
    """
    y = p.intensities
    q = p.q_values
    cut = threshold * y.max()
    inner = np.arange(1, y.size - 1)
    is_max = (y[inner] > y[inner - 1]) & (y[inner] >= y[inner + 1]) & (y[inner] > cut)
    positions, heights = [], []
    for i in inner[is_max]:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        denom = y0 - 2.0 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        step = q[i + 1] - q[i] if shift >= 0 else q[i] - q[i - 1]
        positions.append(q[i] + shift * step)
        heights.append(y1 - 0.25 * (y0 - y2) * shift)
    return np.array(positions), np.array(heights)


def peak_spacing(p, threshold=PEAK_THRESHOLD):
    """Mean distance between consecutive principal maxima (normalised units)."""
    positions, _ = find_peaks(p, threshold)
    if positions.size < 2:
        raise InsufficientPeaksError(
            f"found {positions.size} local maxima above {threshold:g} of the peak; need >= 2"
        )
    return float(np.mean(np.diff(positions)))


def comb_orders(p, threshold=PEAK_THRESHOLD, tol=0.05):
    """Classify peaks as sitting on integer or half-integer orders.

    Returns a dict with the integer orders, half-integer orders and the
    remaining unmatched peak positions. A pattern is a mixed comb when it has
    both nonzero integer and half-integer peaks.
    """
    positions, heights = find_peaks(p, threshold)
    integer, half, other = [], [], []
    for pos in positions:
        twice = 2.0 * pos
        nearest = round(twice)
        if abs(twice - nearest) > 2 * tol:
            other.append(float(pos))
        elif nearest % 2 == 0:
            integer.append(nearest // 2)
        else:
            half.append(nearest / 2.0)
    return {
        "integer": integer,
        "half_integer": half,
        "unmatched": other,
        "mixed": bool(half) and any(m != 0 for m in integer),
        "positions": positions.tolist(),
        "heights": heights.tolist(),
    }

