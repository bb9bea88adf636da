"""Benchmark the compiled collision kernels against the pure-Python ones.

Runs the same BVH-vs-BVH distance and intersection queries through both
backends, checks that the answers agree, and reports median timings plus
the speedup. A second section times a small end-to-end synthesis run in
a subprocess per backend, since that loop is what the compiled kernels
exist for.

Usage:
    python benchmarks/bench_kernels.py [--repeats N] [--sizes 64,256,1024]
"""

import argparse
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from engrasp.geometry._kernels import _pycore, bvh

try:
    from engrasp.geometry._kernels import _core
except ImportError:
    _core = None


def random_soup(rng, n: int, offset) -> np.ndarray:
    """n small random triangles scattered in a unit box at ``offset``."""
    anchors = rng.uniform(0.0, 1.0, size=(n, 1, 3))
    tris = anchors + rng.uniform(-0.05, 0.05, size=(n, 3, 3))
    return tris + np.asarray(offset, dtype=np.float64)


def median_time(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def bench_queries(sizes, repeats: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    header = (f"{'triangles':>10} {'query':>10} {'python':>12} "
              f"{'compiled':>12} {'speedup':>8}")
    print(header)
    print("-" * len(header))
    for n in sizes:
        # two soups close enough that the trees genuinely overlap
        a = bvh.build_bvh(random_soup(rng, n, (0.0, 0.0, 0.0)))
        b = bvh.build_bvh(random_soup(rng, n, (0.9, 0.0, 0.0)))
        for name, fn in (("distance", "soup_min_distance"),
                         ("intersect", "soup_intersects")):
            py_fn = getattr(_pycore, fn)
            t_py = median_time(lambda: py_fn(a, b), repeats)
            if _core is None:
                print(f"{n:>10} {name:>10} {t_py * 1e3:>10.3f}ms "
                      f"{'n/a':>12} {'n/a':>8}")
                continue
            c_fn = getattr(_core, fn)
            assert c_fn(a, b) == py_fn(a, b), f"{fn} backends disagree"
            t_c = median_time(lambda: c_fn(a, b), repeats)
            print(f"{n:>10} {name:>10} {t_py * 1e3:>10.3f}ms "
                  f"{t_c * 1e3:>10.3f}ms {t_py / t_c:>7.1f}x")


SYNTH_SNIPPET = """
import time
from engrasp.fixtures import fixture_hand, fixture_object
from engrasp.geometry._kernels import BACKEND
from engrasp.synthesis.pipeline import SynthesisParams, synthesize
from engrasp.synthesis.sampling import SamplingRegion

region = SamplingRegion(target=fixture_object(), standoff=0.002, spin=4)
params = SynthesisParams(n=24, seed=1, step=0.005, delta=0.002)
start = time.perf_counter()
templates = synthesize(fixture_hand(), region, params)
print(f"{BACKEND}: {time.perf_counter() - start:.2f}s "
      f"({len(templates)} templates)")
"""


def bench_synthesis() -> None:
    print("\nend-to-end synthesis (n=24), one subprocess per backend:",
          flush=True)
    for pure in ("0", "1"):
        env = dict(os.environ, ENGRASP_PURE_PYTHON=pure)
        subprocess.run([sys.executable, "-c", SYNTH_SNIPPET], env=env,
                       check=True)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=9)
    parser.add_argument("--sizes", type=str, default="64,256,1024")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--skip-synthesis", action="store_true")
    args = parser.parse_args(argv)

    if _core is None:
        print("compiled backend not available; showing python timings only")
    sizes = [int(s) for s in args.sizes.split(",")]
    bench_queries(sizes, args.repeats, args.seed)
    if not args.skip_synthesis:
        bench_synthesis()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
