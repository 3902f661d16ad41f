"""Compare the numba and numpy kernel backends.

    python benchmarks/bench_kernels.py [--sizes 1024,65536,1048576] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from scmci.kernels import backends, expand_key


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="1024,65536,1048576")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rk = expand_key(bytes(range(16)))
    impls = backends()
    if "numba" in impls:
        impls["numba"].warmup()
    rows = []
    for size in (int(s) for s in args.sizes.split(",")):
        data = np.random.default_rng(size).integers(0, 256, size, dtype=np.uint8)
        ref = None
        for name, mod in impls.items():
            ct = mod.cbc_encrypt(data, rk)
            if ref is None:
                ref = bytes(ct)
            assert bytes(ct) == ref, f"{name} disagrees"
            enc = best_of(lambda: mod.cbc_encrypt(data, rk), args.repeat)
            dec = best_of(lambda: mod.cbc_decrypt(ct, rk), args.repeat)
            hist = best_of(lambda: mod.byte_histogram(data), args.repeat)
            rows.append((size, name, enc, dec, hist))
    print(f"{'bytes':>9} {'backend':>7} {'cbc_enc MB/s':>13} {'cbc_dec MB/s':>13} {'hist MB/s':>10}")
    for size, name, enc, dec, hist in rows:
        mb = size / 1e6
        print(f"{size:>9} {name:>7} {mb / enc:>13.2f} {mb / dec:>13.2f} {mb / hist:>10.1f}")


if __name__ == "__main__":
    main()
