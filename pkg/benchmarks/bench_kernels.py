"""Compare the compiled and numpy covariance kernels.

Usage: python benchmarks/bench_kernels.py [--sizes 50 100 200] [--repeat 5]

Times each hot kernel per backend, then one full mixture fit with each
backend switched in, and prints the speedups.
"""
import argparse
import time
import timeit

import numpy as np

from omgp import _backend, _pykernels
from omgp.bench import OutputScaler, default_config
from omgp.data import DataSet
from omgp.inference import fit
from omgp.scenarios import gen_missile_to_air

try:
    from omgp import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def kernel_table(sizes, repeat, rng):
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    print(f"{'kernel':<22}{'N':>6}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for n in sizes:
        A = np.ascontiguousarray(rng.normal(size=(n, 3)))
        ls = np.array([0.5, 1.0, 2.0])
        K = _pykernels.se_ard_gram(A, A, 1.0, ls)
        cases = {
            "se_ard_gram": lambda impl: impl.se_ard_gram(A, A, 1.0, ls),
            "se_ard_length_grads": lambda impl: impl.se_ard_length_grads(A, K, ls),
            "exact_match": lambda impl: impl.exact_match(A, A),
        }
        for name, call in cases.items():
            times = {b: best_of(lambda impl=impl: call(impl), repeat)
                     for b, impl in backends.items()}
            row = "".join(f"{t * 1e3:>10.3f}ms" for t in times.values())
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{name:<22}{n:>6}{row}{speed:>9.1f}x")


def end_to_end(seed):
    sc = gen_missile_to_air(seed=seed)
    data = DataSet(sc.inputs, OutputScaler.fit(sc.outputs).transform(sc.outputs))
    config = default_config("missile", 1, seed)
    results = {}
    impls = {"python": _pykernels}
    if _ckernels is not None:
        impls["cython"] = _ckernels
    saved = _backend.impl
    try:
        for name, impl in impls.items():
            _backend.impl = impl
            t0 = time.perf_counter()
            model = fit(data, config)
            results[name] = (time.perf_counter() - t0, model.final_bound)
    finally:
        _backend.impl = saved
    print("\nfull missile fit (N=90, M=3, 15 restarts)")
    for name, (t, bound) in results.items():
        print(f"  {name:<8}{t:>8.2f}s   final bound {bound:.10f}")
    if len(results) == 2:
        print(f"  speedup {results['python'][0] / results['cython'][0]:.2f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    print(f"active backend: {_backend.NAME}\n")
    kernel_table(args.sizes, args.repeat, np.random.default_rng(args.seed))
    end_to_end(args.seed)


if __name__ == "__main__":
    main()
