"""Timing comparison of the compiled kernels against their numpy twins.

Runs each hot kernel on solver-shaped data under both backends and
prints a table of best-of-repeats times plus the speedup.  Finishes
with one full simulation step at 128 x 256 per backend.

Usage:  python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from thinflow import _kernels
from thinflow._backend import use
from thinflow.solver import SolverConfig, build_grid, run_simulation, suggest_dt
from thinflow.studies import reference_flow


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(rng):
    m, n = 256, 128
    diag = 4.0 + rng.uniform(0.0, 1.0, (m, n))
    lower = -1.0 + 0.1 * rng.uniform(0.0, 1.0, (m, n))
    upper = -1.0 + 0.1 * rng.uniform(0.0, 1.0, (m, n))
    rhs = rng.standard_normal((m, n))
    psi = rng.standard_normal((128, 256))
    vort = rng.standard_normal((128, 256))
    n_t, n_src = 4096, 2048
    tmap = (1.5 + rng.uniform(0.0, 3.0, n_t)) * np.exp(
        2j * np.pi * rng.uniform(0.0, 1.0, n_t))
    ctp = np.exp(2j * np.pi * rng.uniform(0.0, 1.0, n_t))
    src = (1.2 + rng.uniform(0.0, 0.5, n_src)) * np.exp(
        2j * np.pi * rng.uniform(0.0, 1.0, n_src))
    img = src / np.abs(src) ** 2
    wts = rng.standard_normal(n_src)
    return {
        "thomas_batch": lambda: _kernels.thomas_batch(lower, diag, upper, rhs),
        "cyclic_thomas_batch": lambda: _kernels.cyclic_thomas_batch(
            lower, diag, upper, rhs),
        "arakawa_jacobian": lambda: _kernels.arakawa_jacobian(
            psi, vort, 0.04, 0.0245),
        "biot_savart_sum": lambda: _kernels.biot_savart_sum(
            tmap, ctp, src, img, wts),
    }


def one_step():
    flow = reference_flow()
    probe = SolverConfig(eps=0.1, n_s=128, n_t=256)
    dt = suggest_dt(build_grid(0.1, 128, 256), flow, probe)
    cfg = SolverConfig(eps=0.1, n_s=128, n_t=256, dt=dt)
    run_simulation(flow, cfg, dt)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(11)

    results = {}
    for backend in ("numba", "numpy"):
        try:
            use(backend)
        except RuntimeError as exc:
            print(f"{backend}: unavailable ({exc})")
            continue
        cases = kernel_cases(rng)
        for name, fn in cases.items():
            fn()  # warm once: triggers compilation under numba
            results.setdefault(name, {})[backend] = best_of(fn, args.repeats)
        one_step()
        results.setdefault("solver_step_128x256", {})[backend] = best_of(
            one_step, max(2, args.repeats // 2))
    use("auto")

    width = max(map(len, results))
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name, row in results.items():
        nb = row.get("numba")
        npy = row.get("numpy")
        nb_s = f"{nb * 1e3:9.3f}ms" if nb else "      n/a"
        np_s = f"{npy * 1e3:9.3f}ms" if npy else "      n/a"
        ratio = f"{npy / nb:7.1f}x" if nb and npy else "     n/a"
        print(f"{name:<{width}}  {nb_s}  {np_s}  {ratio}")


if __name__ == "__main__":
    main()
