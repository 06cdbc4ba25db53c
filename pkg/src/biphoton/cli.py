"""Command-line entry point: ``biphoton simulate | compare | fit | synth``.

Exit codes: 0 success, 2 configuration error, 3 compute error,
4 fit did not converge, 5 I/O or data-parse error.
"""
import argparse
import math
import os
import sys

import numpy as np

from . import fitting
from .config import RunConfig, apply_overrides, parse_config, serialize_config
from .errors import (
    BiphotonError,
    ConfigError,
    DataParseError,
    GridMismatchError,
    InsufficientPeaksError,
    ParameterError,
    WindowTooSmallError,
)
from .files import read_pattern_csv, write_columns_csv, write_joint_csv, write_keyvalue, write_pattern_csv
from .rates import (
    comb_orders,
    diagonal_pattern,
    one_photon_rate,
    peak_spacing,
    two_photon_rate,
    visibility,
)
from .wavepacket import biphoton_amplitude

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTE = 3
EXIT_FIT = 4
EXIT_IO = 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


# ---------------------------------------------------------------------------
# computation shared by the subcommands
# ---------------------------------------------------------------------------

def run_simulation(cfg):
    """Compute the configured patterns.

    Returns ``(patterns, joint)`` where ``patterns`` maps detection kind to a
    DiffractionPattern and ``joint`` is the JointRate.
    """
    ap = cfg.aperture()
    kernel = cfg.kernel_spec()
    grid = cfg.q_grid()
    quad = cfg.x_grid() if kernel.kind == "gaussian" else None
    amplitude = biphoton_amplitude(ap, kernel, grid, quad)
    joint = two_photon_rate(amplitude)
    wanted = ("one-photon", "two-photon-diagonal") if cfg.detection == "both" else (cfg.detection,)
    meta = {
        "kernel": kernel.describe(), "slit_width_over_period": ap.slit_width_s,
        "slits": ap.slit_count_N, "amplitude": ap.amplitude_A0,
    }
    patterns = {}
    for det in wanted:
        p = one_photon_rate(joint) if det == "one-photon" else diagonal_pattern(amplitude)
        p.provenance.update(meta)
        p.provenance.update({"diagnostics": list(amplitude.diagnostics)} if amplitude.diagnostics else {})
        if cfg.normalization == "peak":
            p = p.peak_normalized()
        patterns[det] = p
    return patterns, joint


def _output_paths(cfg):
    if cfg.detection != "both":
        return {cfg.detection: cfg.out}
    stem, ext = os.path.splitext(cfg.out)
    ext = ext or ".csv"
    return {"one-photon": f"{stem}_one_photon{ext}", "two-photon-diagonal": f"{stem}_two_photon{ext}"}


def _load_config(path, overrides):
    base = RunConfig()
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            base = parse_config(fh.read())
    return apply_overrides(base, overrides)


def _parse_sets(items):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _fmt(x):
    return repr(float(x)) if x is not None and not isinstance(x, str) else str(x)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args):
    cfg = _load_config(args.config, _flag_overrides(args))
    patterns, joint = run_simulation(cfg)
    paths = _output_paths(cfg)
    for det, p in patterns.items():
        write_pattern_csv(paths[det], p.q_values, p.intensities)
        print(f"wrote {paths[det]} ({det}, {p.normalization})")
        if "boundary_fraction" in p.provenance:
            print(f"  boundary_fraction = {p.provenance['boundary_fraction']:.3e}")
        if p.provenance.get("diagnostic"):
            print(f"  diagnostic: {p.provenance['diagnostic']}", file=sys.stderr)
    if cfg.joint_out:
        write_joint_csv(cfg.joint_out, joint.grid.values, joint.values)
        print(f"wrote {cfg.joint_out} (joint rate)")
    return EXIT_OK


def _describe(p, window, period):
    info = {}
    try:
        info["visibility"] = visibility(p, window, period)
    except WindowTooSmallError as exc:
        info["visibility"] = float("nan")
        info["visibility_error"] = str(exc)
    try:
        info["peak_spacing"] = peak_spacing(p)
    except InsufficientPeaksError as exc:
        info["peak_spacing"] = float("nan")
        info["peak_spacing_error"] = str(exc)
    comb = comb_orders(p)
    info["peaks"] = " ".join(f"{x:.6g}" for x in comb["positions"])
    info["mixed_comb"] = comb["mixed"]
    return info


def compare_patterns(pa, pb, window=None, period=1.0):
    """Visibility, peak-spacing and comb metrics for two patterns on one grid."""
    if pa.q_values.shape != pb.q_values.shape or not np.allclose(pa.q_values, pb.q_values,
                                                                  rtol=0, atol=1e-12):
        raise GridMismatchError("the two configurations do not share a q-grid")
    if window is None:
        lo, hi = pa.q_values[0], pa.q_values[-1]
        quarter = 0.25 * (hi - lo)
        window = (lo + quarter, hi - quarter)
    a = _describe(pa, window, period)
    b = _describe(pb, window, period)
    report = [("window", f"{window[0]!r},{window[1]!r}")]
    for tag, info in (("a", a), ("b", b)):
        for key, value in info.items():
            report.append((f"{key}_{tag}", _fmt(value) if isinstance(value, float) else value))

    def ratio(x, y):
        return x / y if (y and math.isfinite(x) and math.isfinite(y)) else float("nan")

    report.append(("visibility_ratio", _fmt(ratio(a["visibility"], b["visibility"]))))
    report.append(("spacing_ratio", _fmt(ratio(a["peak_spacing"], b["peak_spacing"]))))
    return report


def cmd_compare(args):
    cfg_a = _load_config(args.a, _parse_sets(args.set_a))
    cfg_b = _load_config(args.b, _parse_sets(args.set_b))
    for cfg in (cfg_a, cfg_b):
        if cfg.detection == "both":
            raise ConfigError("detection: compare needs a single detection kind per configuration")
    if cfg_a.q_grid() != cfg_b.q_grid():
        raise GridMismatchError(f"q-grids differ: {cfg_a.q_grid()} vs {cfg_b.q_grid()}")
    pa = run_simulation(cfg_a)[0][cfg_a.detection]
    pb = run_simulation(cfg_b)[0][cfg_b.detection]
    window = None
    if args.window:
        try:
            lo, hi = (float(v) for v in args.window.split(","))
        except ValueError:
            raise ConfigError(f"--window expects LO,HI, got {args.window!r}") from None
        window = (lo, hi)
    report = compare_patterns(pa, pb, window, args.period)
    if args.out:
        write_columns_csv(args.out, ("q_norm", "intensity_a", "intensity_b"),
                          (pa.q_values, pa.intensities, pb.intensities))
    if args.report:
        write_keyvalue(args.report, report)
    for key, value in report:
        print(f"{key} = {value}")
    return EXIT_OK


def _fit_report(result):
    p = result.params
    items = [
        ("regime", result.regime),
        ("detection", result.detection),
        ("free", ",".join(result.free)),
        ("converged", str(result.converged).lower()),
        ("n_iterations", str(result.n_iterations)),
        ("residual_rms", _fmt(result.residual_rms)),
        ("gradient_norm", _fmt(result.gradient_norm)),
        ("start_ratio", _fmt(result.start_ratio) if result.start_ratio else "none"),
    ]
    for name in fitting.PARAM_NAMES:
        value = getattr(p, name)
        items.append((name, "none" if value is None else _fmt(value)))
        if name in result.stderr:
            items.append((f"{name}_stderr", _fmt(result.stderr[name])))
    items.append(("d_over_s", _fmt(result.ratio)))
    return items


def cmd_fit(args):
    q, y = read_pattern_csv(args.data)
    free = tuple(name.strip() for name in args.free.split(",") if name.strip())
    try:
        init = fitting.FitParams(scale=args.init_scale, background=args.init_background,
                                 d=args.init_d, s=args.init_s, w=args.init_w,
                                 q_offset=args.init_q_offset)
    except ParameterError as exc:
        raise ConfigError(f"init_{exc.field}: {exc.message}") from None
    result = fitting.fit_pattern((q, y), args.regime, args.detection, free, init,
                                 n_slits=args.slits, max_iter=args.max_iter)
    items = _fit_report(result)
    if args.out:
        write_keyvalue(args.out, items)
    width = max(len(k) for k, _ in items)
    for key, value in items:
        print(f"{key:<{width}}  {value}")
    if not result.converged:
        print("fit did not converge; parameters above are the best found", file=sys.stderr)
        return EXIT_FIT
    return EXIT_OK


def cmd_synth(args):
    cfg = _load_config(args.config, _flag_overrides(args))
    if cfg.detection == "both":
        raise ConfigError("detection: synth writes a single pattern; pick one detection kind")
    patterns, _ = run_simulation(cfg)
    p = patterns[cfg.detection].peak_normalized()
    y = p.intensities.copy()
    if cfg.noise > 0:
        rng = np.random.default_rng(cfg.seed)
        y = y + cfg.noise * rng.standard_normal(y.size)
    write_pattern_csv(cfg.out, p.q_values, y)
    print(f"wrote {cfg.out} ({cfg.detection}, noise={cfg.noise!r}, seed={cfg.seed})")
    return EXIT_OK


def cmd_config(args):
    cfg = _load_config(args.config, _flag_overrides(args))
    sys.stdout.write(serialize_config(cfg))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

_FLAG_KEYS = ("period", "slit_width", "slits", "amplitude", "kernel", "width", "q_min", "q_max",
              "q_points", "x_points", "detection", "normalization", "out", "joint_out")


def _flag_overrides(args):
    keys = _FLAG_KEYS + (("noise", "seed") if hasattr(args, "noise") else ())
    return {key: getattr(args, key, None) for key in keys}


def _add_run_flags(p):
    p.add_argument("--config", help="key = value configuration file; flags override it")
    g = p.add_argument_group("aperture")
    g.add_argument("--period", help="grating period d, e.g. 250um (default 1)")
    g.add_argument("--slit-width", dest="slit_width", help="slit width s, e.g. 125um or 0.5d")
    g.add_argument("--slits", type=int, help="number of slits N")
    g.add_argument("--amplitude", type=float, help="amplitude transmittance A0")
    g = p.add_argument_group("correlation")
    g.add_argument("--kernel", choices=("delta", "uniform", "gaussian"))
    g.add_argument("--width", help="gaussian correlation width, e.g. 0.56d or 140um")
    g = p.add_argument_group("grids")
    g.add_argument("--q-min", dest="q_min", type=float, help="in units of 2 pi / d")
    g.add_argument("--q-max", dest="q_max", type=float, help="in units of 2 pi / d")
    g.add_argument("--q-points", dest="q_points", type=int)
    g.add_argument("--x-points", dest="x_points", type=int)
    g = p.add_argument_group("output")
    g.add_argument("--detection", choices=("one-photon", "two-photon-diagonal", "both"))
    g.add_argument("--normalization", choices=("raw", "peak"))
    g.add_argument("--out", help="pattern CSV path")
    g.add_argument("--joint-out", dest="joint_out", help="optional joint-rate CSV path")


def build_parser():
    parser = _Parser(prog="biphoton", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="compute one- and/or two-photon patterns")
    _add_run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("synth", help="simulate, peak-normalise and add Gaussian noise")
    _add_run_flags(p)
    p.add_argument("--noise", type=float, help="noise standard deviation, fraction of peak")
    p.add_argument("--seed", type=int, help="random seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("compare", help="compare two configurations on a shared q-grid")
    p.add_argument("--a", required=True, help="configuration file A")
    p.add_argument("--b", required=True, help="configuration file B")
    p.add_argument("--set-a", action="append", metavar="KEY=VALUE", help="override for A")
    p.add_argument("--set-b", action="append", metavar="KEY=VALUE", help="override for B")
    p.add_argument("--window", help="visibility window LO,HI (default: central half)")
    p.add_argument("--period", type=float, default=1.0,
                   help="minimum window span for visibility, in units of 2 pi / d")
    p.add_argument("--out", help="aligned CSV q_norm,intensity_a,intensity_b")
    p.add_argument("--report", help="key = value report file")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("fit", help="fit a pattern CSV")
    p.add_argument("data", help="pattern CSV (q_norm,intensity)")
    p.add_argument("--regime", required=True, choices=("delta", "uniform", "gaussian"))
    p.add_argument("--detection", required=True, choices=fitting.DETECTIONS)
    p.add_argument("--free", default="scale,background,s",
                   help="comma-separated free parameters (default scale,background,s)")
    p.add_argument("--slits", type=int, default=20)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=fitting.MAX_ITER,
                   help="iteration cap per start")
    p.add_argument("--init-scale", type=float, default=1.0)
    p.add_argument("--init-background", type=float, default=0.0)
    p.add_argument("--init-d", type=float, default=1.0)
    p.add_argument("--init-s", type=float, default=0.5)
    p.add_argument("--init-w", type=float, default=None)
    p.add_argument("--init-q-offset", type=float, default=0.0)
    p.add_argument("--out", help="key = value result file")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("config", help="print the resolved configuration")
    _add_run_flags(p)
    p.set_defaults(func=cmd_config)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GridMismatchError, ParameterError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataParseError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (BiphotonError, ArithmeticError, MemoryError) as exc:
        print(f"compute error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
