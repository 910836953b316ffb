"""Compare the compiled and numpy coordinate kernels.

Times the raw kernels on random inputs and the full analytic Jacobian with
each backend swapped in. Usage::

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from enslen import _backend
from enslen.herm import SystemShape, traceless_basis
from enslen.mixing import jacobian_matrix, random_ensemble
from enslen.parallel import sample_rng

CASES = [((2, 2), 4), ((2, 3), 6), ((3, 3), 10), ((2, 2, 2), 8), ((2, 2, 2, 2), 16)]


def best_of(func, repeat, number):
    return min(timeit.repeat(func, repeat=repeat, number=number)) / number


def random_herm(rng, n, m=None):
    shape = (n, n) if m is None else (m, n, n)
    G = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return 0.5 * (G + np.swapaxes(G, -1, -2).conj())


def kernel_rows(backends, repeat):
    rng = np.random.default_rng(0)
    rows = []
    for N in (4, 8, 16):
        X = random_herm(rng, N)
        Xs = random_herm(rng, N, 32)
        row = [f"herm_coords N={N}"] + [best_of(lambda k=k: k.herm_coords(X), repeat, 200) for k in backends.values()]
        rows.append(row)
        row = [f"herm_coords_stack N={N} m=32"]
        row += [best_of(lambda k=k: k.herm_coords_stack(Xs), repeat, 50) for k in backends.values()]
        rows.append(row)
    for left, n, right in ((1, 2, 2), (2, 3, 1), (4, 2, 2)):
        L = random_herm(rng, left)
        R = random_herm(rng, right)
        D = traceless_basis(n)
        row = [f"sandwich_coords {left}x{n}x{right}"]
        row += [best_of(lambda k=k: k.sandwich_coords(L, D, R, 0.3), repeat, 200) for k in backends.values()]
        rows.append(row)
    return rows


def jacobian_rows(backends, repeat):
    rows = []
    saved = _backend.kernels
    try:
        for dims, k in CASES:
            for model in ("general", "pure"):
                ens = random_ensemble(SystemShape(dims), k, model, sample_rng(1, 0))
                row = [f"jacobian {model} {dims} k={k}"]
                for mod in backends.values():
                    _backend.kernels = mod
                    row.append(best_of(lambda: jacobian_matrix(ens, model), repeat, 5))
                rows.append(row)
    finally:
        _backend.kernels = saved
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = _backend.available_backends()
    names = list(backends)
    print(f"active backend: {_backend.BACKEND}")
    header = f"{'case':<38}" + "".join(f"{n + ' (ms)':>14}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for row in kernel_rows(backends, args.repeat) + jacobian_rows(backends, args.repeat):
        line = f"{row[0]:<38}" + "".join(f"{1e3 * t:>14.4f}" for t in row[1:])
        if len(names) == 2:
            line += f"{row[1] / row[2]:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
