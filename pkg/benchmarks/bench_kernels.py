"""Compare the compiled sequencing kernel with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--sizes 4,16,64] [--solve-seeds 5]

Part 1 times ``min_flowtime`` on random block sets with both backends.
Part 2 solves generated instances end to end, once per backend, in
subprocesses (``PTCSCHED_PURE=1`` forces the fallback at import).
"""

import argparse
import json
import os
import random
import subprocess
import sys
import timeit

from ptcsched import _pykernels

try:
    from ptcsched import _kernels
except ImportError:
    _kernels = None

SOLVE_SNIPPET = """
import json, sys, time
from ptcsched import BACKEND, GenConfig, SolverConfig, generate_instance, solve
seeds = json.loads(sys.argv[1])
t0 = time.perf_counter()
nodes = 0
for seed in seeds:
    res = solve(generate_instance(GenConfig(12, 2, 3, seed=seed)), SolverConfig())
    nodes += res.stats.nodes
print(json.dumps({"backend": BACKEND, "seconds": time.perf_counter() - t0, "nodes": nodes}))
"""


def random_blocks(rng, k):
    proc = [rng.randint(1, 20) for _ in range(k)]
    setup = [rng.randint(0, 10) for _ in range(k)]
    count = [rng.randint(1, 5) for _ in range(k)]
    return proc, setup, count


def time_kernel(kernel, cases, repeat):
    return min(
        timeit.repeat(lambda: [kernel.min_flowtime(*c) for c in cases], number=1, repeat=repeat)
    ) / len(cases)


def solve_in_subprocess(pure, seeds):
    env = dict(os.environ)
    env.pop("PTCSCHED_PURE", None)
    if pure:
        env["PTCSCHED_PURE"] = "1"
    out = subprocess.run(
        [sys.executable, "-c", SOLVE_SNIPPET, json.dumps(seeds)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="3,8,32,128", help="block counts, comma separated")
    parser.add_argument("--cases", type=int, default=300)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--solve-seeds", type=int, default=5, help="0 skips the solver comparison")
    args = parser.parse_args()

    if _kernels is None:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation` first")
        return 1

    rng = random.Random(0)
    print(f"{'blocks':>6} {'python us':>10} {'cython us':>10} {'speedup':>8}")
    for k in map(int, args.sizes.split(",")):
        cases = [random_blocks(rng, k) for _ in range(args.cases)]
        for c in cases:
            assert _kernels.min_flowtime(*c) == _pykernels.min_flowtime(*c)
        py = time_kernel(_pykernels, cases, args.repeat)
        cy = time_kernel(_kernels, cases, args.repeat)
        print(f"{k:>6} {py * 1e6:>10.2f} {cy * 1e6:>10.2f} {py / cy:>7.1f}x")

    if args.solve_seeds:
        seeds = list(range(args.solve_seeds))
        print(f"\nsolve N=12 M=2 F=3, seeds 0..{seeds[-1]}, rules A")
        runs = [solve_in_subprocess(pure, seeds) for pure in (True, False)]
        assert runs[0]["nodes"] == runs[1]["nodes"]
        for run in runs:
            print(f"  {run['backend']:<7} {run['seconds']:>7.2f}s  {run['nodes']} nodes")
        print(f"  speedup {runs[0]['seconds'] / runs[1]['seconds']:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
