"""Compare the numba and numpy kernel paths.

    python3 benchmarks/bench_kernels.py [--repeat N] [--skip-e2e]

Kernel timings exclude JIT compilation (each numba kernel is called once
before timing; the first-call cost is printed separately). The end-to-end
section runs one default 3000-sample experiment in a fresh interpreter per
backend, so it includes import and compile/cache-load time.
"""

import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from fina import kernels


def _cases(rng):
    small_V = rng.uniform(0, 20, (21, 3))  # default grid, three humans
    big_V = rng.uniform(0, 20, (2000, 50))
    cands = np.arange(60.0, 81.0)[:, None]
    prefs = rng.uniform(60, 80, (3, 1))
    owner = np.arange(3)
    big_cands = rng.uniform(0, 20, (2000, 2))
    big_prefs = rng.uniform(0, 20, (150, 2))
    big_owner = np.repeat(np.arange(50), 3)
    u3, u50 = rng.uniform(0, 5, 3), rng.uniform(0, 5, 50)
    return [
        ("adverse_matrix 21x3", "adverse_matrix", (cands, prefs, owner, 3)),
        ("adverse_matrix 2000x50", "adverse_matrix", (big_cands, big_prefs, big_owner, 50)),
        ("dispersion 21x3", "dispersion_objective", (small_V, 1.0)),
        ("dispersion 2000x50", "dispersion_objective", (big_V, 1.0)),
        ("budget 21x3", "budget", (small_V, u3)),
        ("budget 2000x50", "budget", (big_V, u50)),
        ("fairness_y 21x3", "fairness_y", (small_V, u3)),
        ("fairness_y 2000x50", "fairness_y", (big_V, u50)),
    ]


def _integrator_args(n_steps, n_rooms):
    return lambda: (np.full(n_rooms, 15.0), np.zeros(n_rooms, np.int8), 21.0, np.full(n_steps, 5.0),
                    np.full(n_rooms, 1.7), np.full(n_rooms, 0.02), np.full(n_rooms, 2e6),
                    np.full(n_rooms, 500.0), 50.0, 10.0, 2.5, 30.0, -20.0, 60.0,
                    np.empty((n_steps, n_rooms), np.int8))


def bench_kernels(repeat):
    rng = np.random.default_rng(0)
    rows = []
    for label, name, args in _cases(rng):
        nb, npf = getattr(kernels, name + "_nb"), getattr(kernels, name + "_np")
        t0 = time.perf_counter()
        nb(*args)
        first = time.perf_counter() - t0
        number = 200 if "21x3" in label else 5
        t_nb = min(timeit.repeat(lambda: nb(*args), number=number, repeat=repeat)) / number
        t_np = min(timeit.repeat(lambda: npf(*args), number=number, repeat=repeat)) / number
        rows.append((label, first, t_np, t_nb))
    for label, steps, rooms, number in (("integrate 12x3", 12, 3, 200), ("integrate 100000x3", 100000, 3, 1)):
        make = _integrator_args(steps, rooms)
        t0 = time.perf_counter()
        kernels.integrate_nb(*make())
        first = time.perf_counter() - t0
        t_nb = min(timeit.repeat(lambda: kernels.integrate_nb(*make()), number=number, repeat=repeat)) / number
        t_np = min(timeit.repeat(lambda: kernels.integrate_np(*make()), number=number, repeat=repeat)) / number
        rows.append((label, first, t_np, t_nb))

    print(f"{'kernel':26s} {'first call':>11s} {'numpy':>11s} {'numba':>11s} {'speedup':>8s}")
    for label, first, t_np, t_nb in rows:
        print(f"{label:26s} {first * 1e3:9.1f}ms {t_np * 1e6:9.1f}us {t_nb * 1e6:9.1f}us {t_np / t_nb:7.1f}x")


E2E = ("import time; t=time.perf_counter(); from fina.config import ExperimentConfig; "
       "from fina.harness import run_experiment; run_experiment(ExperimentConfig(master_seed=1), 'approach5'); "
       "print(time.perf_counter()-t)")


def bench_end_to_end():
    print("\nend-to-end: one 3000-sample approach5 run (fresh interpreter, includes imports)")
    for label, flag in (("numpy", "1"), ("numba", "")):
        env = dict(os.environ, FINA_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True, check=True)
        print(f"  {label:6s} {float(out.stdout):.2f}s")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--skip-e2e", action="store_true")
    args = p.parse_args()
    if not kernels.HAS_NUMBA:
        sys.exit("numba is not installed; nothing to compare")
    bench_kernels(args.repeat)
    if not args.skip_e2e:
        bench_end_to_end()


if __name__ == "__main__":
    main()
