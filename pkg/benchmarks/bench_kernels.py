"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 3]

Each case times the same call under both backends on identical inputs and
checks that the outputs agree.
"""

import argparse
import time

import numpy as np

from bvnpriors import kernels
from bvnpriors.core import ParamFn, SuffStats
from bvnpriors.priors import PI_RRHO


def _stats(B, rng):
    return SuffStats.unchecked(
        3, rng.normal(size=B), rng.normal(size=B), rng.uniform(0.5, 3, B), rng.uniform(0.5, 3, B), rng.uniform(-0.95, 0.95, B)
    )


def cases(rng):
    B, N = 250, 4000
    st = _stats(B, rng)
    z3, z1, z2 = rng.normal(size=(3, B, N))
    ca, cb = rng.chisquare(1, (B, N)), rng.chisquare(2, (B, N))
    u = rng.random((B, N))
    ks = [199, 3799]
    vals = rng.normal(size=(B, N))
    lw = rng.normal(size=(B, N))
    lu = np.log(rng.random((B, N)))

    def fill():
        out = np.empty((B, 1000))
        filled = np.zeros(B, dtype=np.int64)
        kernels.rejection_fill(ParamFn("mu2"), PI_RRHO, np.arange(B), st, z3, ca, cb, u, z1, z2, out, filled)
        return out, filled

    return {
        "kth_smallest_rows 250x4000": lambda: kernels.kth_smallest_rows(vals, ks),
        "imh_states 250x4000": lambda: kernels.imh_states(lw, lu),
        "ab_param_kth rho 250x4000": lambda: kernels.ab_param_kth(ParamFn("rho"), st, z3, ca, cb, ks=ks),
        "ab_param_kth mu2 250x4000": lambda: kernels.ab_param_kth(ParamFn("mu2"), st, z3, ca, cb, z1, z2, ks=ks),
        "rejection_fill mu2 250x4000": fill,
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-10, equal_nan=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not kernels.HAVE_COMPILED:
        raise SystemExit("compiled extension not built; run pip install -e . --no-build-isolation")
    prev = kernels.backend()
    print(f"{'kernel':32s} {'compiled ms':>12s} {'python ms':>12s} {'speedup':>8s}  agree")
    for name, fn in cases(np.random.default_rng(0)).items():
        timing, result = {}, {}
        for backend in ("compiled", "python"):
            kernels.use_backend(backend)
            best = float("inf")
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                result[backend] = fn()
                best = min(best, time.perf_counter() - t0)
            timing[backend] = best
        c, p = timing["compiled"], timing["python"]
        print(f"{name:32s} {c * 1e3:12.1f} {p * 1e3:12.1f} {p / c:8.1f}x  {_same(result['compiled'], result['python'])}")
    kernels.use_backend(prev)


if __name__ == "__main__":
    main()
