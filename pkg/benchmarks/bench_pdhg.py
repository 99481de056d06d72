"""Time the PDHG kernel on the compiled and pure-Python backends.

Usage::

    python benchmarks/bench_pdhg.py [--repeat 5] [--iters 20000]

Each row runs the same iteration from the same start on both backends, checks
that the iterates agree bit for bit, and reports the best wall time of
``--repeat`` runs.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from pencon import kernels
from pencon.builtins import builtin_phi
from pencon.solvers import ProblemInstance, _ball, _phi_op, _steps
from pencon.structured import structured_from_coordinates


def scalar_instance(name, params=None, norm="L2"):
    return ProblemInstance(structured_from_coordinates(1, builtin_phi(name, params), [0]), [[1.0]], norm)


def quad2d_instance(norm="L2"):
    phi = builtin_phi("quadratic", {"Q": [[2.0]], "b": [3.0]})
    return ProblemInstance(structured_from_coordinates(2, phi, [0], [1]), [[1.0, 0.0], [1.0, 1.0]], norm)


CASES = [
    ("piecewise_gdemo", lambda: scalar_instance("piecewise_gdemo")),
    ("piecewise_remark2", lambda: scalar_instance("piecewise_remark2", {"m": -4.0})),
    ("burg_shift", lambda: scalar_instance("burg_shift")),
    ("quad2d L1", lambda: quad2d_instance("L1")),
    ("quad2d L2", lambda: quad2d_instance("L2")),
]


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--iters", type=int, default=20000)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the python backend is available")
    print(f"{args.iters} iterations per run, best of {args.repeat}")
    print(f"{'instance':<20}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}{'bitwise':>9}")
    for label, make in CASES:
        pi = make()
        step = _steps(pi.L)
        ops = (_phi_op(pi.phi, step), _ball(pi.norm.dual_code, 1.0))
        u0, v0 = np.full(pi.n, 0.5), np.zeros(pi.L.shape[0])

        def run(backend):
            # a negative tolerance never triggers, so both backends run the full budget
            return kernels.run_pdhg(pi.L, u0, v0, step, step, *ops, args.iters, -1.0, backend=backend)

        t_py = best_time(lambda: run("python"), args.repeat)
        if "cython" in backends:
            t_cy = best_time(lambda: run("cython"), args.repeat)
            a, b = run("python"), run("cython")
            same = np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
            print(f"{label:<20}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>10.1f}{str(same):>9}")
        else:
            print(f"{label:<20}{t_py:>12.4f}{'-':>12}{'-':>10}{'-':>9}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
