"""Timing of the compiled tilt kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat R]

Each case runs the same kernel call through both implementations, checks
that the results agree, and reports the best-of-R wall time per call.
"""

import argparse
import time

import numpy as np

from fblbounds import _kernels_py
from fblbounds.channels import InputDist, make_channel
from fblbounds.tilted import atoms_for

try:
    from fblbounds import _kernels
except ImportError:  # extension not built
    _kernels = None


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    bsc = atoms_for(make_channel("bsc", [0.11]), None)
    awgn = atoms_for(make_channel("biagc", [9.63]), None)
    z = atoms_for(make_channel("z", [0.5]), InputDist.uniform(2))
    lams = 64.0 * np.linspace(0.0, 1.0, 1025) ** 2
    for label, a in (("bsc", bsc), ("biagc 9.63dB", awgn), ("z uniform", z)):
        args = (a.values, a.logw, a.offsets, a.gw)
        tgt = a.mean0 + 0.5 * (a.raw(4.0)[1] - a.mean0)
        yield f"moments        {label}", lambda k, args=args: k.moments(*args, 0.7)
        yield f"moments_grid   {label}", lambda k, args=args: k.moments_grid(*args, lams)
        yield f"bisect_mean    {label}", lambda k, args=args, tgt=tgt: k.bisect_mean(
            *args, tgt, 0.0, 4.0, 1e-15, 1e-13, 0.0, 200)[0]
        yield f"bisect_log_g   {label}", lambda k, args=args: k.bisect_log_g(
            *args, 1000.0, np.log(1e-6), 0.0, 4.0, 1e-300, 2.3e-16, 1e-11, 200)[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled kernels not built; nothing to compare")
        return
    print(f"{'case':34s} {'python [us]':>12s} {'cython [us]':>12s} {'speedup':>8s}")
    for label, call in cases():
        rp, rc = np.asarray(call(_kernels_py)), np.asarray(call(_kernels))
        # the signed third moment can cancel to ~0; compare on the result's scale
        scale = np.max(np.abs(rc[np.isfinite(rc)]), initial=1.0)
        if not np.allclose(rp, rc, rtol=1e-9, atol=1e-12 * scale, equal_nan=True):
            raise SystemExit(f"{label}: implementations disagree")
        tp = best_time(lambda: call(_kernels_py), args.repeat)
        tc = best_time(lambda: call(_kernels), args.repeat)
        print(f"{label:34s} {tp * 1e6:12.1f} {tc * 1e6:12.1f} {tp / tc:8.1f}")


if __name__ == "__main__":
    main()
