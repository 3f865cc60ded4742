"""Time the compiled kernels against the pure numpy/Python fallback.

Each backend runs in its own interpreter because the backend is chosen at
import time from AIRSIDEKIT_DISABLE_NUMBA. Compile time is excluded by a
warm-up call.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from airsidekit import _kernels as K
from airsidekit.pushback import generate_paper_instance, lns_solve

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
x = rng.normal(size=200_000)
lat, lon = rng.uniform(-60, 70, 400), rng.uniform(-180, 180, 400)
t = np.cumsum(rng.uniform(30, 120, 100_000))
req = rng.uniform(30, 120, 100_000)
inst = generate_paper_instance(3)
route = np.arange(1, 9, dtype=np.int64)
args = (inst.cost[0], inst.travel, inst.op, inst.tw_a, inst.tw_b)

cases = {
    "prefix_max 200k": lambda: K.prefix_max(x),
    "haversine 400x400": lambda: K.haversine_matrix(lat, lon),
    "gap violations 100k": lambda: K.count_gap_violations(t, req),
    "step area 100k": lambda: K.step_area(t, req),
    "best_insertion x2000": lambda: [K.best_insertion(route, 9 + i % 8, *args) for i in range(2000)],
    "lns 300 iterations": lambda: lns_solve(inst, time_limit_s=None, max_iterations=300, seed=1),
}
out = {"backend": K.BACKEND, "times": {}}
for name, fn in cases.items():
    fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    out["times"][name] = best
print(json.dumps(out))
"""


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("AIRSIDEKIT_DISABLE_NUMBA", None)
    if disable:
        env["AIRSIDEKIT_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True,
                         check=True)
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="timed runs per case, best kept")
    args = ap.parse_args()
    fast = run(False, args.repeat)
    pure = run(True, args.repeat)
    print(f"{'case':<24}{fast['backend']:>12}{pure['backend']:>12}{'speed-up':>10}")
    for name, tf in fast["times"].items():
        tp = pure["times"][name]
        print(f"{name:<24}{tf * 1e3:>10.2f}ms{tp * 1e3:>10.2f}ms{tp / tf:>9.1f}x")


if __name__ == "__main__":
    main()
