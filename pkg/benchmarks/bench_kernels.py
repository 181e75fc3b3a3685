"""Benchmark the compiled kernels against the numpy fallback.

Times the two hot operations (run-to-alarm and full-horizon envelope) for
both chart variants on identical inputs, plus an end-to-end ARL estimate.
Run from a checkout with the extension built:

    python benchmarks/bench_kernels.py [--cap 10000] [--loops 50]
"""

import argparse
import time

import numpy as np

from sscusum import _pyref, kernels
from sscusum.charts import ChartConfig, NIGParams
from sscusum.metrics import estimate_arl0
from sscusum.simulate import ScenarioSpec

try:
    from sscusum import _speedups
except ImportError:
    _speedups = None


def time_call(fn, loops):
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(loops):
            fn()
        best = min(best, (time.perf_counter() - t0) / loops)
    return best


def bench_kernels(cap, loops):
    rng = np.random.default_rng(12345)
    z = rng.standard_normal(cap)
    prior = NIGParams.reference()
    backends = [("pyref", _pyref)]
    if _speedups is not None:
        backends.append(("speedups", _speedups))

    cases = [
        ("ssc_envelope", lambda mod: mod.ssc_envelope(z, 0.25, 0, kernels.ssc_state())),
        ("ssc_run h=4.8", lambda mod: mod.ssc_run(z, 0.5, 4.8, 0, kernels.ssc_state())),
        ("prc_envelope", lambda mod: mod.prc_envelope(z, 0.5, 0, kernels.prc_state(prior))),
        ("prc_run h=4.7", lambda mod: mod.prc_run(z, 1.0, 4.7, 0, kernels.prc_state(prior))),
    ]

    print(f"kernel timings over {cap} observations (best of 3 x {loops} loops)")
    header = f"{'operation':<16}" + "".join(f"{name:>14}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for label, call in cases:
        times = [time_call(lambda m=mod: call(m), loops) for _, mod in backends]
        row = f"{label:<16}" + "".join(f"{t * 1e3:>11.3f} ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row)


def bench_end_to_end(reps):
    spec = ScenarioSpec(
        chart=ChartConfig("ssc", k=0.5), reps=reps, master_seed=3, cap=5000
    )
    t0 = time.perf_counter()
    est = estimate_arl0(spec, h=4.77)
    dt = time.perf_counter() - t0
    print(
        f"\nend-to-end ARL estimate ({kernels.BACKEND} backend): "
        f"{reps} replications in {dt:.2f}s ({dt / reps * 1e3:.2f} ms/rep), "
        f"ARL {est.mean:.1f} +- {est.std_error:.1f}"
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cap", type=int, default=10000)
    parser.add_argument("--loops", type=int, default=50)
    parser.add_argument("--reps", type=int, default=2000)
    args = parser.parse_args()
    if _speedups is None:
        print("compiled backend not available; timing the fallback only")
    bench_kernels(args.cap, args.loops)
    bench_end_to_end(args.reps)


if __name__ == "__main__":
    main()
