"""Compare the compiled and pure-Python kernel backends.

Times the three matrix kernels in isolation and a full
forward/adjoint/variational sweep pipeline, switching backends through
`lieadj._kernels.set_backend`. Run as:

    python benchmarks/bench_backends.py [--repeats 5]
"""

import argparse
import time

import numpy as np

import lieadj as la
from lieadj import _kernels
from lieadj import problems


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def kernel_benchmarks(rng, repeats):
    mats3 = 0.5 * rng.standard_normal((2000, 3, 3))
    mats6 = 0.5 * rng.standard_normal((500, 6, 6))
    rots = _kernels.expm_stack(mats3 - mats3.transpose(0, 2, 1))
    cases = {
        "expm 3x3 x2000": lambda: [_kernels.expm(m) for m in mats3],
        "expm 6x6 x500": lambda: [_kernels.expm(m) for m in mats6],
        "logm SO(3) x2000": lambda: [_kernels.logm(m) for m in rots],
        "dexp 6x6 x500": lambda: [_kernels.dexp_series(m) for m in mats6],
        "dexp stack 6x6 x500": lambda: _kernels.dexp_series_stack(mats6),
    }
    return {name: time_call(fn, repeats) for name, fn in cases.items()}


def sweep_benchmark(rng, repeats):
    spec = la.se3()
    vf = problems.linear_projection_field(spec, 0.4 * rng.standard_normal((4, 4)))
    r = la.exp_retraction(spec)
    grid = la.TimeGrid(1.0, 2000)
    chart = la.exp_retraction(spec)
    g0 = chart.tau(la.AlgVec(spec, 0.3 * rng.standard_normal(6)))
    m_n = la.CoVec(spec, rng.standard_normal(6))
    eta0 = la.AlgVec(spec, rng.standard_normal(6))

    def pipeline():
        traj = la.forward_flow(vf, g0, grid, r)
        traj = la.adjoint_sweep(vf, traj, m_n, r)
        traj = la.variational_sweep(vf, traj, eta0, r)
        return traj

    return time_call(pipeline, repeats)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = _kernels.available_backends()
    if "cython" not in backends:
        print("note: compiled extension not built; timing the fallback only")

    results = {}
    for name in backends:
        _kernels.set_backend(name)
        rng = np.random.default_rng(0)
        rows = kernel_benchmarks(rng, args.repeats)
        rows["SE(3) sweep pipeline N=2000"] = sweep_benchmark(rng, args.repeats)
        results[name] = rows

    labels = list(next(iter(results.values())))
    width = max(len(label) for label in labels)
    header = f"{'benchmark':<{width}}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label in labels:
        line = f"{label:<{width}}"
        for b in backends:
            line += f"{results[b][label] * 1e3:>10.2f}ms"
        if len(backends) == 2:
            line += f"{results['python'][label] / results['cython'][label]:>9.2f}x"
        print(line)


if __name__ == "__main__":
    main()
