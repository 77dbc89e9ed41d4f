"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Each kernel is called on identical inputs under both backends; the table
reports the best wall time and the largest difference between outputs.
An end-to-end simulation timing is run in subprocesses so the backend is
picked at import exactly as in normal use.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from iprw import _fallback

try:
    from iprw import _kernels
except ImportError:  # pragma: no cover - extension not built
    _kernels = None


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_advance(mod, n_parents, horizon, seed):
    rng = np.random.default_rng(seed)
    parents = np.sort(rng.uniform(0, horizon, n_parents))
    n_draws = int(2 * n_parents * horizon) + 1024
    xi = rng.exponential(1.0, n_draws)
    eta = rng.exponential(1.0, n_draws)
    out = np.empty(n_draws)

    def run():
        res = mod.advance(parents, 0, float(parents[0]), 0, horizon, xi, eta, 0, out, 0, 10**7)
        return np.sort(out[: res[4]].copy()), res[5]

    return run


def bench_conv(mod, n, seed):
    rng = np.random.default_rng(seed)
    a = np.ascontiguousarray(rng.random(n))
    b = np.ascontiguousarray(rng.random(n))
    return lambda: mod.causal_conv(a, b)


def bench_renewal(mod, n, trapezoid):
    h = 20.0 / n
    F = 1.0 - np.exp(-np.arange(n + 1) * h)
    dF = np.ascontiguousarray(np.diff(F, prepend=0.0))
    return lambda: mod.renewal_solve(dF, trapezoid)


SIM_SNIPPET = """
import time
from iprw.kernels import BACKEND
from iprw.steps import JointStepModel, StepLaw
from iprw.branching import generation_counts
m = JointStepModel.equal(StepLaw.exponential(1.0))
t0 = time.perf_counter()
c, _ = generation_counts(m, {t}, 2, [1.0], {reps}, 7)
print(BACKEND, time.perf_counter() - t0, int(c.sum()))
"""


def bench_simulation(t, reps):
    rows = []
    for pure in ("0", "1"):
        env = dict(os.environ, IPRW_PURE_PYTHON=pure)
        res = subprocess.run([sys.executable, "-c", SIM_SNIPPET.format(t=t, reps=reps)],
                             env=env, capture_output=True, text=True, check=True)
        backend, secs, total = res.stdout.split()
        rows.append((backend, float(secs), int(total)))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not available; nothing to compare")
        return 1
    q = args.quick
    cases = [
        ("advance 2000 parents, t=50", lambda m: bench_advance(m, 2000, 50.0, 1)),
        (f"causal_conv n={4000 if q else 20000}", lambda m: bench_conv(m, 4000 if q else 20000, 2)),
        (f"renewal_solve trapezoid n={2000 if q else 10000}",
         lambda m: bench_renewal(m, 2000 if q else 10000, True)),
        (f"renewal_solve node n={2000 if q else 10000}",
         lambda m: bench_renewal(m, 2000 if q else 10000, False)),
    ]
    print(f"{'kernel':40s} {'cython s':>10s} {'python s':>10s} {'speedup':>8s} {'max diff':>10s}")
    for name, make in cases:
        tc, oc = best_of(make(_kernels), args.repeat)
        tp, op = best_of(make(_fallback), args.repeat)
        if isinstance(oc, tuple):
            diff = float(np.max(np.abs(oc[0] - op[0]))) if len(oc[0]) == len(op[0]) else float("nan")
        else:
            diff = float(np.max(np.abs(np.asarray(oc) - np.asarray(op))))
        print(f"{name:40s} {tc:10.4f} {tp:10.4f} {tp / tc:8.2f} {diff:10.2e}")
    reps = 200 if q else 1000
    print(f"\nsimulation: equal(exponential(1)), J=2, t=50, {reps} replicates")
    rows = bench_simulation(50.0, reps)
    for backend, secs, total in rows:
        print(f"  {backend:8s} {secs:8.3f} s   total count {total}")
    if rows[0][2] != rows[1][2]:
        print("  WARNING: backends disagree on counts")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
