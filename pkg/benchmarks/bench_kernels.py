"""Compare the compiled and numpy kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3] [--points 2000]

Each kernel is timed on identical inputs with every available backend and
the outputs are checked for agreement before timings are reported.
"""

import argparse
import time

import numpy as np
from scipy.integrate import solve_ivp

from symreeb import kernels, systems


def best_of(func, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = func()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_vector_field(mod, repeat):
    model = systems.henon_heiles(0.1)
    x0 = np.array([0.1, 0.2, 0.3, -0.1])
    y0 = np.concatenate([x0, np.eye(4).ravel()])
    rhs = mod.VectorField(model.kind, model.kind_params, True)

    def run():
        sol = solve_ivp(rhs, (0.0, 50.0), y0, method="DOP853", rtol=1e-11, atol=1e-13)
        return sol.y[:, -1]

    return best_of(run, repeat)


def bench_rhs_calls(mod, repeat, n=20000):
    model = systems.pcr3bp(0.5)
    rhs = mod.VectorField(model.kind, model.kind_params, False)
    y = np.array([0.3, 0.2, 0.1, -0.4])

    def run():
        acc = np.zeros(4)
        for _ in range(n):
            acc += rhs(0.0, y)
        return acc

    return best_of(run, repeat)


def curves(n):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    p = np.column_stack([np.cos(t), np.sin(t), 0 * t])
    q = np.column_stack([1 + np.cos(t), 0 * t, np.sin(t)])
    h = 2 * np.pi / n
    dp = np.column_stack([-np.sin(t), np.cos(t), 0 * t]) * h
    dq = np.column_stack([-np.sin(t), 0 * t, np.cos(t)]) * h
    return p, dp, q, dq


def bench_gauss(mod, repeat, n):
    p, dp, q, dq = curves(n)
    return best_of(lambda: mod.gauss_linking_sum(p, dp, q, dq), repeat)


def bench_distance(mod, repeat, n):
    p, _, q, _ = curves(n)
    return best_of(lambda: mod.min_pair_distance(p, q + 0.01), repeat)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--points", type=int, default=2000)
    args = parser.parse_args(argv)
    backends = kernels.backends()
    cases = [
        ("variational flow, T=50", lambda m: bench_vector_field(m, args.repeat)),
        ("20000 vector-field calls", lambda m: bench_rhs_calls(m, args.repeat)),
        (f"Gauss linking sum, {args.points}^2", lambda m: bench_gauss(m, args.repeat, args.points)),
        (f"min pair distance, {args.points}^2", lambda m: bench_distance(m, args.repeat, args.points)),
    ]
    names = list(backends)
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':34s}" + "".join(f"{n:>12s}" for n in names) + "     speedup   max diff")
    for label, fn in cases:
        results = {n: fn(backends[n]) for n in names}
        ref = np.asarray(results[names[0]][1])
        diff = max(float(np.max(np.abs(np.asarray(r[1]) - ref))) for r in results.values())
        row = f"{label:34s}" + "".join(f"{results[n][0]:11.4f}s" for n in names)
        if "compiled" in results:
            row += f"{results['python'][0] / results['compiled'][0]:11.1f}x"
        else:
            row += f"{'n/a':>12s}"
        print(row + f"   {diff:.1e}")


if __name__ == "__main__":
    main()
