"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import importlib
import timeit

import numpy as np

from motprobe import cloud as cloud_mod
from motprobe.cloud import CloudModel, _gl_on, _shell_nodes, effective_atom_number
from motprobe.physics import FiberSpec

FIBER = FiberSpec()
CLOUD = CloudModel()


def _cases(k):
    means = np.concatenate([np.linspace(0.0, 30.0, 50_000), np.linspace(30.0, 1e5, 50_000)])
    xs, ys, wxy = _shell_nodes(FIBER)
    zs, wz = _gl_on(-5000.0, 5000.0, 64)

    def swap_and_run():
        saved = cloud_mod.kernels
        cloud_mod.kernels = k
        try:
            effective_atom_number(CLOUD, FIBER)
        finally:
            cloud_mod.kernels = saved

    return {
        "poisson_draws (1e5 means)": lambda: k.poisson_draws(means, 12345),
        "shell_sum gaussian (512 x 64)": lambda: k.shell_sum(0, CLOUD.center_um, CLOUD.radii_um,
                                                             CLOUD.peak_density_per_um3,
                                                             xs, ys, wxy, zs, wz),
        "shell_sum flat-top (512 x 64)": lambda: k.shell_sum(1, CLOUD.center_um, CLOUD.radii_um,
                                                             CLOUD.peak_density_per_um3,
                                                             xs, ys, wxy, zs, wz),
        "effective_atom_number": swap_and_run,
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = {"python": importlib.import_module("motprobe._kernels_py")}
    try:
        backends["cython"] = importlib.import_module("motprobe._kernels")
    except ImportError:
        print("compiled extension not built; timing the fallback only")
    timings = {}
    for name, k in backends.items():
        for case, fn in _cases(k).items():
            timer = timeit.Timer(fn)
            number, _ = timer.autorange()
            best = min(timer.repeat(args.repeat, number)) / number
            timings.setdefault(case, {})[name] = best
    print(f"{'kernel':32s}" + "".join(f"{b:>14s}" for b in backends) + "     speed-up")
    for case, row in timings.items():
        cells = "".join(f"{row[b] * 1e3:11.3f} ms" for b in backends)
        ratio = f"{row['python'] / row['cython']:10.1f}x" if "cython" in row else ""
        print(f"{case:32s}{cells}{ratio}")


if __name__ == "__main__":
    main()
