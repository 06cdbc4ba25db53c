"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time from ``BIPHOTON_BACKEND``:

``numba`` (default)
    JIT-compiled loops; falls back to numpy silently when numba is missing.
``numpy``
    Vectorised numpy only.

Both implementations of every kernel stay importable under explicit names
(``*_numba`` / ``*_numpy``) so tests and the benchmark can compare them
regardless of the selected backend. Dense contractions are left to BLAS in
both paths.
"""
import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

# |sin(d q / 2)| below this switches the Dirichlet factor to its limit form.
DIRICHLET_EPS = 1e-9
# |q| below this (in units of 2 pi / d) switches the envelope to its limit.
ENVELOPE_EPS = 1e-9

_requested = os.environ.get("BIPHOTON_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"BIPHOTON_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

HAVE_NUMBA = numba is not None
if HAVE_NUMBA and "NUMBA_THREADING_LAYER" not in os.environ:
    # the TBB layer shipped with some distros is too old and warns on first use
    numba.config.THREADING_LAYER = "workqueue"
BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"


# ---------------------------------------------------------------------------
# N-slit grating transform
# ---------------------------------------------------------------------------

def dirichlet_numpy(q, d, n):
    """sin(N d q / 2) / sin(d q / 2) with both sines reduced by the nearest k pi."""
    theta = 0.5 * d * np.asarray(q, dtype=np.float64)
    k = np.rint(theta / math.pi)
    t = theta - k * math.pi
    # (-1)^(k (N-1)) from reducing both sines by k pi
    sign = np.where((k * (n - 1)) % 2 == 0, 1.0, -1.0)
    sin_t = np.sin(t)
    singular = np.abs(sin_t) < DIRICHLET_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        regular = np.sin(n * t) / sin_t
    limit = n * np.cos(n * t) / np.cos(t)
    return sign * np.where(singular, limit, regular)


def grating_ft_numpy(q, d, s, n, amp, offset):
    q = np.asarray(q, dtype=np.float64)
    dirichlet = dirichlet_numpy(q, d, n)
    small = np.abs(q) < ENVELOPE_EPS * (2.0 * math.pi / d)
    with np.errstate(divide="ignore", invalid="ignore"):
        env = np.where(small, s, np.sin(0.5 * s * q) / (0.5 * q))
    out = (amp / math.sqrt(2.0 * math.pi)) * dirichlet * env
    if offset != 0.0:
        return out * np.exp(1j * q * offset)
    return out.astype(np.complex128)


def _grating_ft_loop(q, d, s, n, amp, offset):
    out = np.empty(q.size, dtype=np.complex128)
    pref = amp / math.sqrt(2.0 * math.pi)
    qsmall = ENVELOPE_EPS * (2.0 * math.pi / d)
    for i in range(q.size):
        qi = q[i]
        theta = 0.5 * d * qi
        k = np.rint(theta / math.pi)
        t = theta - k * math.pi
        sign = 1.0 if (k * (n - 1)) % 2 == 0 else -1.0
        st = math.sin(t)
        if abs(st) < DIRICHLET_EPS:
            dk = sign * n * math.cos(n * t) / math.cos(t)
        else:
            dk = sign * math.sin(n * t) / st
        if abs(qi) < qsmall:
            env = s
        else:
            env = math.sin(0.5 * s * qi) / (0.5 * qi)
        v = pref * dk * env
        if offset != 0.0:
            ph = qi * offset
            out[i] = complex(v * math.cos(ph), v * math.sin(ph))
        else:
            out[i] = complex(v, 0.0)
    return out


# ---------------------------------------------------------------------------
# Weighted correlation-kernel matrix  M[m, n] = w_m w_n exp(-((x_m - x_n)/width)^2)
# ---------------------------------------------------------------------------

def gaussian_matrix_numpy(x, w, width):
    diff = (x[:, None] - x[None, :]) / width
    return w[:, None] * w[None, :] * np.exp(-(diff * diff))


def _gaussian_matrix_loop(x, w, width):  # compiled only when numba is present
    n = x.size
    out = np.empty((n, n), dtype=np.float64)
    inv = 1.0 / width
    for m in numba.prange(n):
        xm = x[m]
        wm = w[m]
        for j in range(m, n):
            r = (xm - x[j]) * inv
            v = wm * w[j] * math.exp(-r * r)
            out[m, j] = v
            out[j, m] = v
    return out


# ---------------------------------------------------------------------------
# Column-wise bilinear reduction  out[j] = sum_m a[m, j] * b[m, j]
# (diagonal of a^T b without forming the product)
# ---------------------------------------------------------------------------

def coldot_numpy(a, b):
    return np.einsum("mj,mj->j", a, b)


def _coldot_loop(a, b):
    nm, nj = a.shape
    out = np.zeros(nj, dtype=np.float64)
    for m in range(nm):
        for j in range(nj):
            out[j] += a[m, j] * b[m, j]
    return out


if HAVE_NUMBA:
    _grating_ft_jit = numba.njit(cache=True)(_grating_ft_loop)
    gaussian_matrix_numba = numba.njit(cache=True, parallel=True)(_gaussian_matrix_loop)
    coldot_numba = numba.njit(cache=True)(_coldot_loop)

    def grating_ft_numba(q, d, s, n, amp, offset):
        q = np.asarray(q, dtype=np.float64)
        flat = np.ascontiguousarray(q.ravel())
        return _grating_ft_jit(flat, float(d), float(s), int(n), float(amp),
                               float(offset)).reshape(q.shape)
else:  # pragma: no cover
    grating_ft_numba = None
    gaussian_matrix_numba = None
    coldot_numba = None


if BACKEND == "numba":
    grating_ft = grating_ft_numba
    gaussian_matrix = gaussian_matrix_numba
    coldot = coldot_numba
else:
    grating_ft = grating_ft_numpy
    gaussian_matrix = gaussian_matrix_numpy
    coldot = coldot_numpy
