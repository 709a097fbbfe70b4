"""Benchmark the numba kernels against the pure-numpy fallback.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats 7]

Times both implementations of every kernel over a spread of shapes, then
times one small end-to-end training run per backend (selected through the
FREQREC_BACKEND environment variable in a subprocess).
"""

import argparse
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from freqrec import _kernels

TRAIN_SNIPPET = """
import time
import numpy as np
import freqrec as fr

ds = fr.generate_synthetic(6, 96, 20, 0.1, np.random.default_rng(0))
cfg = fr.ModelConfig(dim=32, max_len=20, heads=2, dropout=0.1, batch_size=16,
                     lr=5e-3, max_epochs=3, patience=3, seed=1)
start = time.perf_counter()
fr.train(cfg, ds)
print(f"{time.perf_counter() - start:.3f}")
"""


def time_call(fn, *args, repeats=7):
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def kernel_cases(rng):
    for rows, inner, cols in [(64, 16, 9), (512, 64, 33), (3200, 64, 33), (8192, 128, 65)]:
        x = rng.normal(size=(rows, inner))
        a = rng.normal(size=(inner, cols))
        b = rng.normal(size=(inner, cols))
        p = rng.normal(size=(rows, cols))
        q = rng.normal(size=(rows, cols))
        ia = rng.normal(size=(cols, inner))
        ib = rng.normal(size=(cols, inner))
        yield f"matmul2 {rows}x{inner}@{inner}x{cols}", "matmul2", (x, a)
        yield f"mat_pair {rows}x{inner}", "mat_pair", (x, a, b)
        yield f"mat_fuse {rows}x{cols}", "mat_fuse", (p, q, ia, ib)
    for n, dim, vocab in [(1000, 64, 500), (20000, 64, 5000)]:
        ids = rng.integers(0, vocab, size=n)
        vals = rng.normal(size=(n, dim))
        yield f"scatter_add {n}x{dim}->{vocab}", "scatter_add_rows", (
            np.zeros((vocab, dim)),
            ids,
            vals,
        )
    for size in [4096, 262144]:
        yield f"adam_update n={size}", "adam_update", (
            rng.normal(size=size),
            rng.normal(size=size),
            np.zeros(size),
            np.zeros(size),
            1e-3,
            0.9,
            0.999,
            1e-8,
            0.1,
            0.001,
        )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    parser.add_argument("--skip-train", action="store_true")
    args = parser.parse_args()

    try:
        numba_impl = _kernels._build_numba()
    except ImportError:
        print("numba is not importable; nothing to compare")
        return 1
    numpy_impl = _kernels.numpy_impl

    rng = np.random.default_rng(0)
    print(f"{'case':<36} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for label, name, kernel_args in kernel_cases(rng):
        numba_impl[name](*[np.array(a, copy=True) for a in kernel_args])  # warm the JIT
        t_np = time_call(numpy_impl[name], *[np.array(a, copy=True) for a in kernel_args],
                         repeats=args.repeats)
        t_nb = time_call(numba_impl[name], *[np.array(a, copy=True) for a in kernel_args],
                         repeats=args.repeats)
        print(f"{label:<36} {t_np * 1e3:>8.3f}ms {t_nb * 1e3:>8.3f}ms {t_np / t_nb:>7.2f}x")

    if not args.skip_train:
        print("\nend-to-end: 3 training epochs (96 users, dim 32),")
        print("fresh process per backend (timings include JIT cache loading)")
        for backend in ("numpy", "numba", "auto"):
            env = dict(os.environ, FREQREC_BACKEND=backend)
            out = subprocess.run(
                [sys.executable, "-c", TRAIN_SNIPPET], env=env, capture_output=True, text=True
            )
            if out.returncode != 0:
                print(f"  {backend}: failed\n{out.stderr}")
            else:
                print(f"  {backend}: {out.stdout.strip()}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
