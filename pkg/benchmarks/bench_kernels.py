"""Time the numba bitset kernels against the pure-numpy ones.

    python benchmarks/bench_kernels.py [--bits 2e8] [--repeat 5]

Both backends must give identical counts; the script checks that before
printing timings.  Compilation happens in a warm-up call that is not timed.
"""

import argparse
import time

import numpy as np

from rankone import _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bits", type=float, default=2e8)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _kernels.numba_kernels is None:
        raise SystemExit("numba kernels unavailable (RANKONE_PURE_NUMPY set or numba missing)")

    nbits = int(args.bits)
    rng = np.random.default_rng(args.seed)
    words = _kernels.n_words(nbits)
    a = rng.integers(0, 2**63, size=words, dtype=np.uint64)
    b = rng.integers(0, 2**63, size=words, dtype=np.uint64)
    lags = rng.integers(0, nbits // 2, size=16)
    src_bits = nbits // 64
    src = a[: _kernels.n_words(src_bits)].copy()
    src[-1] &= np.uint64((1 << (src_bits % 64 or 64)) - 1)
    offsets = np.sort(rng.choice(nbits - src_bits, size=48, replace=False)).astype(np.int64)

    cases = {
        "popcount": lambda k: k.popcount(a),
        "count_shifted_and d=12345": lambda k: k.count_shifted_and(a, b, 12345),
        f"count_shifted_and d={nbits // 3}": lambda k: k.count_shifted_and(a, b, nbits // 3),
        "count_lags x16": lambda k: k.count_lags(a, b, lags),
        "tile x48": lambda k: k.tile(src, offsets, nbits),
    }

    print(f"{nbits:.3g} bits ({words * 8 / 2**20:.0f} MiB per bitset), best of {args.repeat}")
    print(f"{'kernel':32s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s}")
    for name, call in cases.items():
        call(_kernels.numba_kernels)  # compile
        t_np, r_np = best_of(lambda: call(_kernels.numpy_kernels), args.repeat)
        t_nb, r_nb = best_of(lambda: call(_kernels.numba_kernels), args.repeat)
        if not np.array_equal(np.asarray(r_np), np.asarray(r_nb)):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:32s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
