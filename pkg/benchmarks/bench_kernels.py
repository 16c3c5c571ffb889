"""Throughput comparison of the compiled and pure-Python event kernels.

Runs the same workload through both implementations and reports events
per second.  Invoke directly:

    python3 benchmarks/bench_kernels.py [--sites 4096] [--t-macro 0.5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fepsim import _pykernels, kernels
from fepsim._rand import UniformStream


def run_once(fep_run, n_sites: int, t_macro: float, seed: int) -> tuple[int, float]:
    rng = np.random.default_rng(seed)
    occ = (rng.random(n_sites) < 0.75).astype(np.uint8)
    stream = UniformStream(np.random.default_rng(seed + 1))
    t_limit = t_macro * n_sites * n_sites
    start = time.perf_counter()
    _, n_events, _ = fep_run(occ, 0.0, t_limit, stream, None, False, 0, None, None, None)
    return n_events, time.perf_counter() - start


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sites", type=int, default=4096)
    parser.add_argument("--t-macro", type=float, default=0.25)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    lanes = [("pure-python", _pykernels.fep_run)]
    if kernels.IMPLEMENTATION == "cython":
        from fepsim import _ckernels

        lanes.append(("cython", _ckernels.fep_run))
    else:
        print("compiled kernel unavailable; benchmarking the fallback only")

    print(f"{args.sites} sites, t_macro={args.t_macro}, density 0.75")
    rates = {}
    for name, fep_run in lanes:
        # pure python is slow; shrink its horizon and scale the rate
        scale = 0.02 if name == "pure-python" else 1.0
        n_events, elapsed = run_once(fep_run, args.sites, args.t_macro * scale, args.seed)
        rate = n_events / elapsed
        rates[name] = rate
        print(f"  {name:12s} {n_events:>12,d} events  {elapsed:8.3f}s  {rate/1e6:8.2f} M ev/s")

    if len(rates) == 2:
        speedup = rates["cython"] / rates["pure-python"]
        print(f"  speedup: {speedup:.1f}x")


if __name__ == "__main__":
    main()
