"""Compare the numba kernels against the pure-numpy fallback.

Each backend runs in its own interpreter because the backend is fixed at
import time by MORREYLORENTZ_BACKEND.  The child prints JSON with the best
wall time of each workload and a checksum of its output; the parent prints
a table with the speedup and the largest relative difference between paths.

    python3 benchmarks/bench_kernels.py [--repeat N] [--size small|large]
"""

import argparse
import json
import os
import subprocess
import sys
import time

CHILD = r"""
import json, sys, time
import numpy as np
from morreylorentz import BACKEND
from morreylorentz import _kernels as K
from morreylorentz.exponent import VariableExponent
from morreylorentz.norms import local_morrey_norm
from morreylorentz.operators import OmegaKernel, marcinkiewicz_mu, maximal_2d
from morreylorentz.signal import GridFunction2D, StepFunction

repeat, scale = int(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(7)
edges = np.cumsum(rng.uniform(0.1, 1.0, 65))
vals = rng.uniform(-1.0, 1.0, 64)
xs = np.sort(rng.uniform(edges[0] - 5, edges[-1] + 5, 20000 * scale))
xs = xs[~np.isin(xs, edges)]
phi = StepFunction(np.cumsum(rng.uniform(0.1, 1.0, 32)), rng.uniform(0.1, 2.0, 32))
q = VariableExponent.log_interpolant(1.5, 3.0)
g = GridFunction2D((0.0, 0.0), 1.0, rng.uniform(0.0, 1.0, (8 * scale, 8 * scale)))
pts = np.column_stack((np.linspace(1.5, 4.0, 40 * scale), np.linspace(-0.5, 2.0, 40 * scale)))
omega = OmegaKernel("cos")

work = {
    "maximal_1d": lambda: K.maximal_1d_many(edges, np.abs(vals), xs),
    "hilbert": lambda: K.hilbert_many(edges, vals, xs),
    "morrey_variable_q": lambda: np.array([local_morrey_norm(phi, q, 0.3).value]),
    "maximal_2d": lambda: maximal_2d(g).ravel(),
    "marcinkiewicz_mu": lambda: marcinkiewicz_mu(g, omega, pts),
}
out = {"backend": BACKEND, "results": {}}
for name, fn in work.items():
    res = fn()  # warm-up, includes compilation on the numba path
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = fn()
        best = min(best, time.perf_counter() - t0)
    out["results"][name] = {"seconds": best, "values": np.asarray(res, dtype=float).tolist()}
print(json.dumps(out))
"""


def run_backend(backend: str, repeat: int, scale: int) -> dict:
    env = dict(os.environ, MORREYLORENTZ_BACKEND=backend)
    proc = subprocess.run([sys.executable, "-c", CHILD, str(repeat), str(scale)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def max_rel_diff(a, b) -> float:
    import numpy as np

    a = np.asarray(a)
    b = np.asarray(b)
    scale = np.maximum(np.abs(a), np.abs(b))
    scale[scale == 0] = 1.0
    return float(np.max(np.abs(a - b) / scale)) if a.size else 0.0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--size", choices=("small", "large"), default="small")
    args = parser.parse_args(argv)
    scale = 1 if args.size == "small" else 4
    fast = run_backend("numba", args.repeat, scale)
    slow = run_backend("numpy", args.repeat, scale)
    if fast["backend"] != "numba":
        print("numba is not importable; both runs used the numpy path")
    print(f"{'workload':<20} {'numba s':>10} {'numpy s':>10} {'speedup':>8} {'max rel diff':>13}")
    for name, r in fast["results"].items():
        s = slow["results"][name]
        diff = max_rel_diff(r["values"], s["values"])
        speed = s["seconds"] / r["seconds"] if r["seconds"] > 0 else float("inf")
        print(f"{name:<20} {r['seconds']:>10.4f} {s['seconds']:>10.4f} {speed:>8.1f} {diff:>13.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
