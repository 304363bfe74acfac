"""Compare the compiled and pure-python engines on the hot kernels.

Usage:
    python benchmarks/bench_engines.py [--count 500000] [--dim 8] [--bucket 1] [--repeat 3]

Times the digit-encoding kernel, the tree-derivation kernel and the full
scaled build for every available engine, and reports the speedup of the
compiled extension over the numpy fallback.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from grayhilbert.curve import SCHEME_IDS, Scheme, root_state
from grayhilbert.engine import available_engines, get_engine
from grayhilbert.synth import SynthSpec, generate
from grayhilbert.tree import build_scaled, quantize


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        started = time.perf_counter()
        fn()
        times.append(time.perf_counter() - started)
    return min(times)


def bench_engine(name, cloud, bucket, blocks, repeat):
    eng = get_engine(name)
    u = quantize(cloud.points, 52)
    num, n = u.shape
    root = np.array(root_state(Scheme.RING, n).perm, np.uint64)
    digits = np.empty((num, blocks), np.uint64)

    def encode():
        perms = np.tile(root, (num, 1))
        masks = np.zeros(num, np.uint64)
        eng.encode_blocks(u, 52, 0, blocks, perms, masks, SCHEME_IDS[Scheme.RING], digits)

    t_encode = best_of(repeat, encode)
    order = np.lexsort(tuple(digits[:, j] for j in range(blocks - 1, -1, -1)))
    sorted_digits = np.ascontiguousarray(digits[order])
    t_derive = best_of(repeat, lambda: eng.derive_tree(sorted_digits, n, bucket))
    t_build = best_of(repeat, lambda: build_scaled(cloud, bucket, "ring", engine=name))
    return t_encode, t_derive, t_build


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=500_000)
    parser.add_argument("--dim", type=int, default=8)
    parser.add_argument("--bucket", type=int, default=1)
    parser.add_argument("--blocks", type=int, default=4)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    cloud = generate(SynthSpec("uniform", args.dim, args.count, seed=args.seed))
    print(f"cloud: {args.count} points x {args.dim}D, bucket={args.bucket}, best of {args.repeat}")
    print(f"{'engine':<10} {'encode_blocks':>14} {'derive_tree':>12} {'full build':>11}")
    results = {}
    for name in available_engines():
        enc, der, bld = bench_engine(name, cloud, args.bucket, args.blocks, args.repeat)
        results[name] = (enc, der, bld)
        print(f"{name:<10} {enc:>13.3f}s {der:>11.3f}s {bld:>10.3f}s")
    if {"python", "compiled"} <= results.keys():
        py, cy = results["python"], results["compiled"]
        print(
            "speedup    "
            f"{py[0] / cy[0]:>13.1f}x {py[1] / cy[1]:>11.1f}x {py[2] / cy[2]:>10.1f}x"
        )


if __name__ == "__main__":
    main()
