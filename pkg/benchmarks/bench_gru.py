"""Time the GRU recurrence kernels: compiled extension vs numpy fallback.

Runs the forward and backward sequence kernels at a few representative
sizes and reports the median per-call time for every available backend.

    python3 benchmarks/bench_gru.py [--repeats N]
"""

import argparse
import statistics
import time

import numpy as np

from sepforge import _kernels

SIZES = [
    ("desk fwd pass", 160, 32),
    ("desk long clip", 600, 32),
    ("full scale", 160, 300),
]


def time_case(mod, frames: int, hidden: int, repeats: int):
    rng = np.random.default_rng(1)
    xs = [rng.standard_normal((frames, hidden)) for _ in range(3)]
    us = [rng.standard_normal((hidden, hidden)) * 0.3 for _ in range(3)]
    h0 = np.zeros(hidden)
    dh = rng.standard_normal((frames, hidden))

    fwd_times = []
    bwd_times = []
    caches = mod.gru_forward_seq(*xs, *us, h0)
    for _ in range(repeats):
        t0 = time.perf_counter()
        caches = mod.gru_forward_seq(*xs, *us, h0)
        t1 = time.perf_counter()
        mod.gru_backward_seq(*caches, *us, h0, dh)
        t2 = time.perf_counter()
        fwd_times.append(t1 - t0)
        bwd_times.append(t2 - t1)
    return statistics.median(fwd_times), statistics.median(bwd_times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=20,
                        help="timed calls per case (median is reported)")
    args = parser.parse_args()

    backends = _kernels.available_backends()
    print(f"backends: {', '.join(backends)} (active: {_kernels.ACTIVE_BACKEND})")
    header = f"{'case':<16} {'frames':>6} {'hidden':>6}"
    for name in backends:
        header += f" {name + ' fwd':>14} {name + ' bwd':>14}"
    if len(backends) == 2:
        header += f" {'speedup fwd':>12} {'speedup bwd':>12}"
    print(header)

    for label, frames, hidden in SIZES:
        row = f"{label:<16} {frames:>6} {hidden:>6}"
        results = {}
        for name in backends:
            mod = _kernels.load_backend(name)
            fwd, bwd = time_case(mod, frames, hidden, args.repeats)
            results[name] = (fwd, bwd)
            row += f" {fwd * 1e3:>12.3f}ms {bwd * 1e3:>12.3f}ms"
        if len(backends) == 2:
            fast, slow = results[backends[0]], results[backends[1]]
            row += f" {slow[0] / fast[0]:>11.1f}x {slow[1] / fast[1]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
