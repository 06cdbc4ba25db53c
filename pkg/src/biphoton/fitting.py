"""Least-squares fits of measured or synthetic patterns to the forward models.

Data are taken in units of ``2 pi / d`` of the nominal grating, so fitted
``d`` and ``s`` come out in units of the nominal period. The model is

    scale * shape(q + q_offset) + background

where ``shape`` is the regime's rate normalised to 1 at ``q = 0``.

Each start runs a bounded Nelder-Mead search followed by a trust-region
least-squares polish. When ``d`` or ``s`` is free, starts are spread over
several ``d/s`` ratios, since the slit comb has local minima at order aliases.
"""
from dataclasses import dataclass, field, replace
import math

import numpy as np
from scipy.optimize import least_squares, minimize

from . import _kernels
from .aperture import analytic_ft, make_grating, slit_nodes
from .correlation import DELTA, GAUSSIAN, KINDS, UNIFORM
from .errors import DegenerateDataError, ParameterError
from .rates import DiffractionPattern
from .wavepacket import _diagonal_from_nodes, _marginal_from_nodes, amplitude_delta

ONE_PHOTON = "one-photon"
TWO_PHOTON_DIAGONAL = "two-photon-diagonal"
DETECTIONS = (ONE_PHOTON, TWO_PHOTON_DIAGONAL)

PARAM_NAMES = ("scale", "background", "d", "s", "w", "q_offset")
START_RATIOS = (2.0, 2.5, 3.0, 3.5, 4.0)
MAX_ITER = 2000
REL_FTOL = 1e-10
# a start is converged when the gradient J^T r is this small next to |J| |r|
GRAD_COSINE_TOL = 1e-4
# background within this fraction of the data peak counts as sitting on its bound
BOUND_TOL = 1e-6

# initial simplex steps in the transformed coordinates
_SIMPLEX_STEP = {"scale": 0.1, "background": 0.02, "d": 0.02, "s": 0.1, "w": 0.1, "q_offset": 0.01}


@dataclass(frozen=True)
class FitParams:
    scale: float = 1.0
    background: float = 0.0
    d: float = 1.0
    s: float = 0.5
    w: float = None
    q_offset: float = 0.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ParameterError("scale", f"must be > 0, got {self.scale!r}")
        if not self.background >= 0:
            raise ParameterError("background", f"must be >= 0, got {self.background!r}")
        if not self.d > 0:
            raise ParameterError("d", f"must be > 0, got {self.d!r}")
        if not 0 < self.s <= self.d:
            raise ParameterError("s", f"must satisfy 0 < s <= d, got s={self.s!r}, d={self.d!r}")
        if self.w is not None and not self.w > 0:
            raise ParameterError("w", f"must be > 0 when present, got {self.w!r}")
        if not math.isfinite(self.q_offset):
            raise ParameterError("q_offset", "must be finite")

    def as_dict(self):
        return {name: getattr(self, name) for name in PARAM_NAMES}


@dataclass(frozen=True)
class FitResult:
    params: FitParams
    residual_rms: float
    stderr: dict
    n_iterations: int
    converged: bool
    gradient_norm: float
    gradient_tol: float
    regime: str
    detection: str
    free: tuple
    start_ratio: float = None
    objective_history: tuple = field(default=(), repr=False)

    @property
    def ratio(self):
        """Fitted period over slit width."""
        return self.params.d / self.params.s


# ---------------------------------------------------------------------------
# forward models
# ---------------------------------------------------------------------------

def _raw_shape(regime, detection, params, q, n_slits, cells_per_slit):
    ap = make_grating(params.d, params.s, n_slits)
    qk = 2.0 * math.pi * q
    if regime == UNIFORM:
        f2 = np.abs(analytic_ft(ap, qk)) ** 2
        return f2 if detection == ONE_PHOTON else f2 * f2
    if regime == DELTA:
        if detection == ONE_PHOTON:
            return np.ones_like(q)
        return np.abs(amplitude_delta(ap, 2.0 * qk)) ** 2
    x, w, h = slit_nodes(ap, cells_per_slit)
    M = _kernels.gaussian_matrix(x, w, params.w)
    if detection == ONE_PHOTON:
        return _marginal_from_nodes(M, x, h, qk)
    return np.abs(_diagonal_from_nodes(M, x, qk)) ** 2


def model_shape(regime, detection, params, q, n_slits=20, cells_per_slit=32):
    """Rate shape at ``q + q_offset``, scaled to 1 at q = 0."""
    q = np.asarray(q, dtype=np.float64)
    pts = np.append(q + params.q_offset, 0.0)
    raw = _raw_shape(regime, detection, params, pts, n_slits, cells_per_slit)
    return raw[:-1] / raw[-1]


def predict(regime, detection, params, q, n_slits=20, cells_per_slit=32):
    shape = model_shape(regime, detection, params, q, n_slits, cells_per_slit)
    return params.scale * shape + params.background


def is_modulated(regime, detection):
    return not (regime == DELTA and detection == ONE_PHOTON)


# ---------------------------------------------------------------------------
# parameter transform: log for positive quantities, s via log(d/s - 1)
# ---------------------------------------------------------------------------

class _Coords:
    def __init__(self, free, base, peak):
        self.free = tuple(name for name in PARAM_NAMES if name in free)
        self.base = base
        self.peak = peak

    def encode(self, p):
        out = []
        for name in self.free:
            v = getattr(p, name)
            if name in ("scale", "d", "w"):
                out.append(math.log(v))
            elif name == "background":
                out.append(v / self.peak)
            elif name == "s":
                out.append(math.log(max(p.d / v - 1.0, 1e-12)))
            else:
                out.append(v)
        return np.array(out)

    def decode(self, theta):
        vals = dict(zip(self.free, theta))
        kw = self.base.as_dict()
        if "scale" in vals:
            kw["scale"] = math.exp(vals["scale"])
        kw = {k: (float(v) if v is not None else None) for k, v in kw.items()}
        if "background" in vals:
            kw["background"] = float(max(vals["background"], 0.0) * self.peak)
        if "d" in vals:
            kw["d"] = math.exp(vals["d"])
        if "s" in vals:
            kw["s"] = kw["d"] / (1.0 + math.exp(vals["s"]))
        elif "d" in vals and kw["s"] > kw["d"]:
            kw["s"] = kw["d"]
        if "w" in vals:
            kw["w"] = math.exp(vals["w"])
        if "q_offset" in vals:
            kw["q_offset"] = vals["q_offset"]
        return FitParams(**kw)

    def bounds(self):
        lo = [0.0 if name == "background" else -np.inf for name in self.free]
        hi = [np.inf] * len(self.free)
        return lo, hi

    def free_values(self, theta):
        p = self.decode(theta)
        return np.array([getattr(p, name) for name in self.free])


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def _as_arrays(data):
    if isinstance(data, DiffractionPattern):
        q, y = data.q_values, data.intensities
    else:
        q, y = data
    q = np.asarray(q, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if q.shape != y.shape or q.ndim != 1:
        raise ParameterError("data", "q and intensity arrays must be 1-D and of equal length")
    order = np.argsort(q, kind="stable")
    return q[order], y[order]


def _linear_start(shape, y, p, free):
    """Closed-form scale/background for a fixed shape."""
    if "scale" in free and "background" in free:
        design = np.column_stack([shape, np.ones_like(shape)])
        (a, b), *_ = np.linalg.lstsq(design, y, rcond=None)
        if b < 0:
            b = 0.0
            a = float(shape @ y / (shape @ shape))
    elif "scale" in free:
        a, b = float(shape @ (y - p.background) / (shape @ shape)), p.background
    elif "background" in free:
        a, b = p.scale, max(float(np.mean(y - p.scale * shape)), 0.0)
    else:
        return p
    if not a > 0:
        a = p.scale
    return replace(p, scale=float(a), background=float(b))


def _starts(init, free):
    if not ({"d", "s"} & set(free)):
        return [(None, init)]
    out = []
    for r in START_RATIOS:
        if "s" in free:
            p = replace(init, s=init.d / r)
        else:
            p = replace(init, d=init.s * r)
        out.append((r, p))
    return out


def _fd_jacobian(resid, theta, step=1e-7):
    cols = []
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = step * max(1.0, abs(theta[k]))
        cols.append((resid(theta + e) - resid(theta - e)) / (2 * e[k]))
    return np.column_stack(cols)


def _run_start(resid, coords, theta0, max_iter):
    history = []

    def objective(theta):
        r = resid(theta)
        return float(r @ r)

    f0 = objective(theta0)
    history.append(f0)
    steps = np.array([_SIMPLEX_STEP[name] for name in coords.free])
    simplex = np.vstack([theta0] + [theta0 + np.eye(len(theta0))[i] * steps[i]
                                    for i in range(len(theta0))])
    lo, hi = coords.bounds()
    simplex = np.clip(simplex, lo, hi)

    def record(intermediate_result):
        history.append(float(intermediate_result.fun))

    nm = minimize(objective, theta0, method="Nelder-Mead", bounds=list(zip(lo, hi)),
                  callback=record,
                  options={"maxiter": max_iter, "initial_simplex": simplex,
                           "xatol": 1e-8, "fatol": REL_FTOL * max(f0, 1e-300),
                           "adaptive": len(theta0) > 2})
    polish = least_squares(resid, np.clip(nm.x, lo, hi), method="trf", bounds=(lo, hi),
                           x_scale="jac", ftol=REL_FTOL, xtol=1e-12, gtol=1e-12,
                           max_nfev=max_iter)
    if 2.0 * polish.cost <= nm.fun:
        theta, cost, jac = polish.x, 2.0 * polish.cost, polish.jac
        history.append(cost)
    else:
        theta, cost = nm.x, nm.fun
        jac = _fd_jacobian(resid, theta)
    r = resid(theta)
    capped = nm.nit >= max_iter and polish.status == 0
    return {
        "theta": theta, "cost": cost, "residual": r, "jac": jac,
        "iterations": int(nm.nit + polish.nfev), "capped": capped, "history": history,
    }


def _stderr(coords, theta, jac, r, n):
    p = len(theta)
    if n <= p:
        return {name: float("nan") for name in coords.free}
    sigma2 = float(r @ r) / (n - p)
    cov_theta = sigma2 * np.linalg.pinv(jac.T @ jac)
    # delta method through the transform
    step = 1e-6
    m = np.empty((p, p))
    for k in range(p):
        e = np.zeros(p)
        e[k] = step
        m[:, k] = (coords.free_values(theta + e) - coords.free_values(theta - e)) / (2 * step)
    cov = m @ cov_theta @ m.T
    return {name: float(math.sqrt(max(cov[i, i], 0.0))) for i, name in enumerate(coords.free)}


def fit_pattern(data, regime, detection, free, init, n_slits=20, cells_per_slit=32,
                max_iter=MAX_ITER):
    """Fit ``data`` with the ``regime``/``detection`` forward model.

    Parameters
    ----------
    data : DiffractionPattern or (q, intensity) arrays
        q in units of 2 pi / d of the nominal grating; any order.
    regime : {'delta', 'uniform', 'gaussian'}
    detection : {'one-photon', 'two-photon-diagonal'}
    free : iterable of str
        Names from ``PARAM_NAMES`` to adjust; the rest stay at ``init``.
    init : FitParams
        Starting point. ``w`` is required for the gaussian regime.
    n_slits : int
        Slit count of the model grating (not fitted).

    Returns
    -------
    FitResult
        The best start. ``converged`` is False when no start converged, in
        which case the best-so-far parameters are returned.
    """
    if regime not in KINDS:
        raise ParameterError("regime", f"must be one of {KINDS}, got {regime!r}")
    if detection not in DETECTIONS:
        raise ParameterError("detection", f"must be one of {DETECTIONS}, got {detection!r}")
    free = set(free)
    unknown = free - set(PARAM_NAMES)
    if unknown:
        raise ParameterError("free", f"unknown parameters {sorted(unknown)}")
    if regime == GAUSSIAN and init.w is None:
        raise ParameterError("w", "the gaussian regime needs an initial width")
    if regime != GAUSSIAN:
        free.discard("w")
    if not free:
        raise ParameterError("free", "no free parameters")
    q, y = _as_arrays(data)
    if q.size < 2 * len(free):
        raise ParameterError("data", f"{q.size} points for {len(free)} free parameters; need >= {2 * len(free)}")
    peak = float(np.max(np.abs(y))) or 1.0
    if np.ptp(y) <= 1e-12 * peak and is_modulated(regime, detection) and {"d", "s"} & free:
        raise DegenerateDataError(
            f"data are constant but the {regime}/{detection} model is modulated; "
            "the geometry cannot be identified"
        )

    results = []
    for ratio, start in _starts(init, free):
        shape = model_shape(regime, detection, start, q, n_slits, cells_per_slit)
        start = _linear_start(shape, y, start, free)
        coords = _Coords(free, start, peak)

        def resid(theta, coords=coords):
            p = coords.decode(theta)
            return predict(regime, detection, p, q, n_slits, cells_per_slit) - y

        run = _run_start(resid, coords, coords.encode(start), max_iter)
        grad = run["jac"].T @ run["residual"]
        # a parameter held at its lower bound may keep a gradient pushing outward
        lo, _ = coords.bounds()
        at_bound = (run["theta"] <= np.array(lo) + BOUND_TOL) & (grad > 0)
        grad = np.where(at_bound, 0.0, grad)
        gnorm = float(np.max(np.abs(grad)))
        jnorm = float(np.linalg.norm(run["jac"]))
        rnorm = float(np.linalg.norm(run["residual"]))
        gtol = GRAD_COSINE_TOL * jnorm * rnorm + 1e-12 * jnorm * peak * math.sqrt(q.size)
        run.update(ratio=ratio, coords=coords, gnorm=gnorm, gtol=gtol,
                   converged=(not run["capped"]) and gnorm <= gtol)
        results.append(run)

    pool = [r for r in results if r["converged"]] or results
    best = min(pool, key=lambda r: r["cost"])
    coords = best["coords"]
    return FitResult(
        params=coords.decode(best["theta"]),
        residual_rms=float(math.sqrt(best["cost"] / q.size)),
        stderr=_stderr(coords, best["theta"], best["jac"], best["residual"], q.size),
        n_iterations=best["iterations"],
        converged=best["converged"],
        gradient_norm=best["gnorm"],
        gradient_tol=best["gtol"],
        regime=regime,
        detection=detection,
        free=coords.free,
        start_ratio=best["ratio"],
        objective_history=tuple(best["history"]),
    )


def synthesize(regime, detection, params, q, n_slits=20, noise=0.0, seed=0, cells_per_slit=32):
    """Model pattern plus Gaussian noise of standard deviation ``noise * peak``."""
    y = predict(regime, detection, params, q, n_slits, cells_per_slit)
    if noise > 0:
        rng = np.random.default_rng(seed)
        y = y + noise * float(np.max(y)) * rng.standard_normal(y.size)
    return y
