"""Time the compiled and pure-numpy kernels side by side.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel is warmed up once (this triggers compilation) before timing.
The end-to-end rows run the gaussian amplitude in a subprocess per backend,
because the backend is fixed at import time by ``BIPHOTON_BACKEND``.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from biphoton import _kernels
from biphoton.aperture import XGrid, make_grating, quadrature_nodes

END_TO_END = """
import time
from biphoton import CorrelationKernel, make_grating
from biphoton.wavepacket import QGrid, biphoton_amplitude
ap = make_grating(1.0, 0.5, 20)
biphoton_amplitude(ap, CorrelationKernel.gaussian(0.56), QGrid(-1, 1, 5))
t = time.perf_counter()
biphoton_amplitude(ap, CorrelationKernel.gaussian(0.56), QGrid())
print(time.perf_counter() - t)
"""


def best_of(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not _kernels.HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")

    ap = make_grating(1.0, 0.5, 20)
    x, w, _ = quadrature_nodes(ap, XGrid.covering(ap, 4096))
    q = np.linspace(-8, 8, 200_001) * 2 * np.pi
    a = np.random.default_rng(0).standard_normal((x.size, 801))

    cases = [
        (f"grating_ft, {q.size} q", lambda: _kernels.grating_ft_numpy(q, 1.0, 0.5, 20, 1.0, 0.0),
         lambda: _kernels.grating_ft_numba(q, 1.0, 0.5, 20, 1.0, 0.0)),
        (f"gaussian_matrix, {x.size}^2", lambda: _kernels.gaussian_matrix_numpy(x, w, 0.56),
         lambda: _kernels.gaussian_matrix_numba(x, w, 0.56)),
        (f"coldot, {a.shape[0]}x{a.shape[1]}", lambda: _kernels.coldot_numpy(a, a),
         lambda: _kernels.coldot_numba(a, a)),
    ]
    print(f"{'kernel':<28}{'numpy [ms]':>12}{'numba [ms]':>12}{'speed-up':>10}")
    for name, slow, fast in cases:
        t_np, t_nb = best_of(slow, args.repeat), best_of(fast, args.repeat)
        print(f"{name:<28}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>10.2f}")

    times = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, BIPHOTON_BACKEND=backend)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, check=True,
                             capture_output=True, text=True)
        times[backend] = float(out.stdout.strip())
    print(f"{'gaussian amplitude 801^2':<28}{1e3 * times['numpy']:>12.2f}{1e3 * times['numba']:>12.2f}"
          f"{times['numpy'] / times['numba']:>10.2f}")


if __name__ == "__main__":
    main()
