"""Time each hot kernel under the numba and pure-numpy backends.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``. JIT compilation
happens in a warm-up call and is not counted. Results of the two backends
are compared before timing so a fast but wrong kernel shows up immediately.
"""

import argparse
import time

import numpy as np

from noded_schottky import _kernels
from noded_schottky.family import ParameterPoint, generator_stack, generators
from noded_schottky.witness import _to_vector, base_starts
from noded_schottky.words import iterate_levels


def _words(stack, depth):
    level = None
    for level in iterate_levels(stack, depth):
        pass
    return level


def build_cases(depth):
    gens = generators(ParameterPoint(0.8, 0.2))
    stack = generator_stack(gens)
    level = _words(stack, depth)
    mats, letters = level.mats, level.letters
    lengths = np.full(len(letters), depth, dtype=np.int64)
    x, signs = _to_vector(base_starts(gens)[0])
    inv_gens = np.ascontiguousarray(stack[1::2])
    parents = _words(stack, depth - 1)
    parent_mats, parent_last = parents.mats, parents.letters[:, -1]
    return {
        f"expand_level ({len(parent_mats)} parents)": lambda: _kernels.expand_level(parent_mats, parent_last, stack),
        f"trace_stats ({len(mats)} words)": lambda: _kernels.trace_stats(mats),
        f"attracting_fixed_points ({len(mats)} words)": lambda: _kernels.attracting_fixed_points(mats, 1e-9),
        f"word_trace_squared_dd ({len(letters)} words)": lambda: _kernels.word_trace_squared_dd(stack, letters, lengths),
        "witness_margin (x1000)": lambda: [_kernels.witness_margin(x, signs, inv_gens) for _ in range(1000)],
    }


def _first_array(out):
    while isinstance(out, (tuple, list)):
        out = out[0]
    return np.asarray(out)


def time_call(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depth", type=int, default=7)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    cases = build_cases(args.depth)
    print(f"{'kernel':48s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for name, fn in cases.items():
        with _kernels.use_backend("numba"):
            ref = _first_array(fn())
            t_nb = time_call(fn, args.repeat)
        with _kernels.use_backend("numpy"):
            alt = _first_array(fn())
            t_np = time_call(fn, args.repeat)
        if not np.allclose(ref, alt, rtol=1e-9, atol=1e-12, equal_nan=True):
            print(f"  warning: backends disagree on {name}")
        print(f"{name:48s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
