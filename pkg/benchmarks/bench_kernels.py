"""Time the compiled kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]
"""
import argparse
import importlib
import timeit

import numpy as np

from maxent_reweight import _pykernels


def cases(k, n):
    u = _pykernels.counter_uniforms(1, 0, n, 2)
    f = u.sum(axis=1)
    edges = np.linspace(f.min(), f.max(), 257)
    fs = np.sort(f)
    w = np.full(n, 1.0 / n)
    cdf = np.clip(fs / 2, 0, 1)
    small = np.column_stack([u, f, w, w])[: n // 10]
    return {
        "counter_uniforms": lambda: k.counter_uniforms(1, 0, n, 2),
        "counter_normals": lambda: k.counter_normals(1, 0, n, 3),
        "bin_index": lambda: k.bin_index(f, edges),
        "bin_counts": lambda: k.bin_counts(f, edges),
        "linear_bin": lambda: k.linear_bin(f, -0.1, 2.2 / 1023, 1024),
        "weighted_ks_sorted": lambda: k.weighted_ks_sorted(fs, w, cdf),
        "format_rows (n/10 rows)": lambda: k.format_rows(small),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = {"python": _pykernels}
    try:
        backends["cython"] = importlib.import_module("maxent_reweight._ckernels")
    except ImportError:
        print("compiled extension not built; timing the numpy kernels only")

    results = {}
    for name, mod in backends.items():
        for label, fn in cases(mod, args.n).items():
            results.setdefault(label, {})[name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))

    print(f"n = {args.n:,}, best of {args.repeat}")
    print(f"{'kernel':<26}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for label, t in results.items():
        py, cy = t["python"], t.get("cython")
        line = f"{label:<26}{py * 1e3:>12.2f}"
        if cy is not None:
            line += f"{cy * 1e3:>12.2f}{py / cy:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
