"""Timing comparison between the einsum kernels and their compiled twins.

Two measurements:

* kernel microbenchmark: per-call time of each contraction in both variants,
  at a small and a moderate algebra dimension;
* trajectory macrobenchmark: wall time of a Gauss integration of the Kida
  collective system, run once per backend in a fresh subprocess so the
  LIEPOISSON_NUMBA flag is honored at import time.

Compilation happens during warmup and is excluded from all timings.

Usage: python3 benchmarks/backend_benchmark.py [--json out.json]
"""

import argparse
import json
import os
import subprocess
import sys
import time
import timeit

import numpy as np

KERNELS = ("bracket", "coadjoint", "momentum_plus", "mm_jac_p", "mm_jac_q")
TRAJ_DT = 0.01
TRAJ_T_END = 20.0


def random_structure(rng, n):
    c = rng.standard_normal((n, n, n))
    return c - np.swapaxes(c, 1, 2)  # antisymmetric in the lower indices


def kernel_bench(repeats):
    from liepoisson import backend, kernels
    from liepoisson.backend import warmup_warning_filter

    if not backend.USE_NUMBA:
        print("kernel microbenchmark skipped: numba backend not active")
        return {}

    warmup_warning_filter()
    rng = np.random.default_rng(0)
    rows = {}
    for n in (3, 9):
        c = random_structure(rng, n)
        x, y = rng.standard_normal(n), rng.standard_normal(n)
        args = {
            "bracket": (c, x, y),
            "coadjoint": (c, x, y),
            "momentum_plus": (c, x, y),
            "mm_jac_p": (c, x),
            "mm_jac_q": (c, x),
        }
        for name in KERNELS:
            fast = getattr(kernels, f"{name}_numba")
            slow = getattr(kernels, f"{name}_numpy")
            fast(*args[name])  # trigger compilation before timing
            per_call = {}
            for label, fn in (("numpy", slow), ("numba", fast)):
                t = timeit.Timer(lambda: fn(*args[name]))
                number = 5000
                per_call[label] = min(t.repeat(repeats, number)) / number
            rows[f"{name}[n={n}]"] = per_call
    return rows


def trajectory_bench():
    results = {}
    for flag in ("0", "1"):
        env = dict(os.environ)
        env["LIEPOISSON_NUMBA"] = flag
        proc = subprocess.run(
            [sys.executable, __file__, "--trajectory-worker"],
            capture_output=True, text=True, env=env, check=True,
        )
        payload = json.loads(proc.stdout.splitlines()[-1])
        results[payload["backend"]] = payload["seconds"]
    return results


def trajectory_worker():
    from liepoisson import GAUSS4, IntegratorConfig, backend, get_preset, integrate

    preset = get_preset("kida")
    field = preset.collective_field()
    z0 = preset.initial_phase_point().point.flat()
    cfg = IntegratorConfig(tableau=GAUSS4, dt=TRAJ_DT, sample_stride=1000)
    integrate(field, z0, cfg, 1.0, kind="phase")  # compile + cache warmup

    best = min(
        timeit.repeat(
            lambda: integrate(field, z0, cfg, TRAJ_T_END, kind="phase"),
            repeat=3, number=1, timer=time.perf_counter,
        )
    )
    name = "numba" if backend.USE_NUMBA else "numpy"
    print(json.dumps({"backend": name, "seconds": best}))


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--json", help="also write results to this file")
    ap.add_argument("--trajectory-worker", action="store_true",
                    help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.trajectory_worker:
        trajectory_worker()
        return 0

    kernels = kernel_bench(args.repeats)
    if kernels:
        width = max(len(k) for k in kernels)
        print(f"{'kernel':<{width}}  {'numpy':>10}  {'numba':>10}  speedup")
        for name, row in kernels.items():
            ratio = row["numpy"] / row["numba"]
            print(
                f"{name:<{width}}  {row['numpy'] * 1e6:>8.2f}us"
                f"  {row['numba'] * 1e6:>8.2f}us  {ratio:>6.1f}x"
            )

    steps = int(TRAJ_T_END / TRAJ_DT)
    print(f"\ntrajectory: kida collective, gl4, {steps} steps")
    traj = trajectory_bench()
    for name in ("numpy", "numba"):
        if name in traj:
            print(f"  {name:<6} {traj[name]:8.3f} s")
    if "numpy" in traj and "numba" in traj:
        print(f"  speedup {traj['numpy'] / traj['numba']:.1f}x")

    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"kernels": kernels, "trajectory": traj}, fh, indent=2)
        print(f"\nwrote {args.json}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
