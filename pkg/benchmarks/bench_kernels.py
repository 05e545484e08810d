"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

The end-to-end row runs verify_containment in a subprocess per backend,
since the backend is fixed when robust_welfare.kernels is first imported.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from robust_welfare import _pykernels

try:
    from robust_welfare import _ckernels
except ImportError:
    _ckernels = None

HERE = os.path.dirname(os.path.abspath(__file__))
CANONICAL = os.path.join(HERE, os.pardir, "scenarios", "canonical.json")

END_TO_END = """
import time
from robust_welfare import kernels
from robust_welfare.oracle import SampleConfig, path_grid_for, verify_containment
from robust_welfare.scenario import load_scenario
sc = load_scenario({path!r})
cfg = SampleConfig(4000, 0, path_grid_for(sc, 512))
t = time.perf_counter()
rep = verify_containment(sc, cfg)
print(kernels.BACKEND, time.perf_counter() - t, rep.n_violations)
"""


def kernel_cases(rng):
    v = rng.uniform(1.0, 2.0, (1000, 512))
    cells = rng.uniform(-3.0, 1.0, (1000, 512))
    s = np.sort(rng.uniform(0.0, 2.0, 4096))
    return {
        "repair_to_mean": lambda m: m.repair_to_mean(v.copy(), 1.0, 2.0, 1.3),
        "cumulative_curve": lambda m: m.cumulative_curve(cells, 2.0 / 512, 100.0, -20.0, True),
        "eval_uniform_piecewise": lambda m: m.eval_uniform_piecewise(
            *m.cumulative_curve(cells, 2.0 / 512, 100.0, -20.0, True), cells, 0.0, 2.0 / 512, s),
    }


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def end_to_end(pure):
    env = dict(os.environ, ROBUST_WELFARE_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", END_TO_END.format(path=CANONICAL)], env=env,
                         capture_output=True, text=True, check=True).stdout.split()
    return out[0], float(out[1]), int(out[2])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; nothing to compare")
        return 1

    print(f"{'kernel':<26}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}")
    for name, fn in kernel_cases(np.random.default_rng(0)).items():
        tp = best_of(lambda: fn(_pykernels), args.repeat)
        tc = best_of(lambda: fn(_ckernels), args.repeat)
        print(f"{name:<26}{tp * 1e3:>12.2f}{tc * 1e3:>13.2f}{tp / tc:>8.1f}x")

    if not args.skip_end_to_end:
        rows = [end_to_end(pure) for pure in (True, False)]
        (bp, tp, vp), (bc, tc, vc) = rows
        print(f"{'verify_containment':<26}{tp * 1e3:>12.0f}{tc * 1e3:>13.0f}{tp / tc:>8.1f}x"
              f"   (backends {bp}/{bc}, violations {vp}/{vc})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
