"""Compare the compiled and numpy grid kernels on the golden scenarios.

    python3 benchmarks/bench_kernels.py [--repeat N] [--resolution M]
"""

import argparse
import time

import numpy as np

from inbuilding_rt import _kernels
from inbuilding_rt.geometry import GridSpec
from inbuilding_rt.metrics import node_power_grid
from inbuilding_rt.scenario import golden_path, load_scenario


def time_backend(sc, spec, backend, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = [node_power_grid(n, sc.scene, spec, sc.frequency_hz, sc.tracer, backend=backend)
               for n in sc.nodes]
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--resolution", type=float, default=None, help="override the golden 0.05 m grid")
    args = ap.parse_args()
    print(f"default backend: {_kernels.BACKEND}; available: {', '.join(sorted(_kernels.BACKENDS))}")
    for name in ("case1", "case2"):
        sc = load_scenario(golden_path(name))
        g = sc.grid
        spec = g if args.resolution is None else GridSpec(g.height, g.x_range, g.y_range, args.resolution)
        rows, cols = spec.shape
        timings, grids = {}, {}
        for backend in sorted(_kernels.BACKENDS):
            timings[backend], grids[backend] = time_backend(sc, spec, backend, args.repeat)
        line = ", ".join(f"{b} {t:.3f} s" for b, t in timings.items())
        if len(grids) == 2:
            diff = max(float(np.nanmax(np.abs(a - b))) for a, b in zip(grids["cython"], grids["numpy"]))
            line += f", speedup x{timings['numpy'] / timings['cython']:.1f}, max |diff| {diff:.1e} dB"
        print(f"{name} ({rows}x{cols} cells, 2 nodes, order {sc.tracer.max_reflections}): {line}")


if __name__ == "__main__":
    main()
