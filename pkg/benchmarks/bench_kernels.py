"""Time the hot kernels with numba on and off.

Each backend runs in its own interpreter because the choice is fixed at
import time by PTAA_DISABLE_NUMBA.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from ptaa import LatticeConfig, PotentialTerm, backend, build_hamiltonian, eigenvalues, find_threshold

repeat = int(sys.argv[1])

def best(fn):
    fn()  # warm-up (includes JIT compile or cache load)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

out = {"backend": backend()}
for n in (50, 200):
    h = build_hamiltonian(LatticeConfig(n), [PotentialTerm(0.0, 0.5 / n, 0.3)])
    out[f"eigenvalues N={n}"] = best(lambda: eigenvalues(h))
out["threshold N=20"] = best(lambda: find_threshold(LatticeConfig(20), 0.0, 0.2, with_pairs=False))
out["threshold N=50"] = best(lambda: find_threshold(LatticeConfig(50), 0.0, 0.3, with_pairs=False))
print(json.dumps(out))
"""


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("PTAA_DISABLE_NUMBA", None)
    if disable:
        env["PTAA_DISABLE_NUMBA"] = "1"
    proc = subprocess.run(
        [sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    fast = run(False, args.repeat)
    slow = run(True, args.repeat)
    print(f"{'case':<22}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for key in fast:
        if key == "backend":
            continue
        a, b = fast[key], slow[key]
        print(f"{key:<22}{a * 1e3:>10.2f}ms{b * 1e3:>10.2f}ms{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
