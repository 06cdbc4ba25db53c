"""Brute-force reference evaluators.

These sum the defining integrals directly on the midpoint samples of an
x-grid. They deliberately share nothing with the fast paths beyond the
aperture and kernel definitions, and they are slow.
"""
import math

import numpy as np

from .aperture import transmittance
from .correlation import DELTA, evaluate
from .errors import UnsupportedEvaluationError

_ROW_CHUNK = 256


def riemann_ft(ap, q, quad):
    """(1/sqrt(2 pi)) dx sum_m A(x_m) exp(i q x_m) over the cell midpoints."""
    quad.require_covers(ap)
    x = quad.midpoints()
    a = transmittance(ap, x)
    q = float(q)
    total = np.sum(a * np.cos(q * x)) + 1j * np.sum(a * np.sin(q * x))
    return complex(total * quad.spacing / math.sqrt(2.0 * math.pi))


def riemann_amplitude(ap, k, q, q_prime, quad):
    """Direct double sum for F(q, q') with a pointwise kernel."""
    if k.kind == DELTA:
        raise UnsupportedEvaluationError(
            "no pointwise delta kernel; the closed form amplitude_delta is its own oracle"
        )
    quad.require_covers(ap)
    x = quad.midpoints()
    a = transmittance(ap, x)
    row_phase = a * np.exp(1j * float(q) * x)
    col_phase = a * np.exp(1j * float(q_prime) * x)
    total = 0j
    for start in range(0, x.size, _ROW_CHUNK):
        xs = x[start:start + _ROW_CHUNK]
        g = evaluate(k, xs[:, None] - x[None, :])
        total += np.sum(row_phase[start:start + _ROW_CHUNK, None] * g * col_phase[None, :])
    return complex(total * quad.spacing ** 2 / (2.0 * math.pi))


def richardson_ft(ap, q, quad):
    """Midpoint sums on ``quad`` and on a grid of half the spacing, combined
    to cancel the leading ``dx**2`` error term.

    Exact cancellation needs cell boundaries on the slit edges; see
    :meth:`biphoton.aperture.XGrid.aligned`.
    """
    fine = type(quad)(quad.x_min, quad.x_max, 2 * (quad.n_points - 1) + 1)
    coarse_val = riemann_ft(ap, q, quad)
    fine_val = riemann_ft(ap, q, fine)
    return (4.0 * fine_val - coarse_val) / 3.0
