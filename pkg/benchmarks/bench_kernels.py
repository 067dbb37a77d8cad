"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5]

Times each kernel on representative inputs and reports the largest relative
difference between the two backends.
"""

import argparse
import sys
import timeit

import numpy as np

from cycleint import kernels
from cycleint.bqf import QuadForm
from cycleint.cycle import cycle_integral
from cycleint.forms import coprime_pairs, harmonic_eisenstein, product_form, standard_qexp


def _cases():
    rng = np.random.default_rng(7)
    z = rng.uniform(-0.5, 0.5, 256) + 1j * rng.uniform(0.87, 3.0, 256)
    F = product_form(standard_qexp("E4", 40), standard_qexp("E6", 40)).evaluator
    coeff, ypow, alpha, beta = F.arrays
    seed = harmonic_eisenstein(2).evaluator.seed
    sc, sp, sa, sb = seed.arrays
    pairs = coprime_pairs(200)
    Q = QuadForm(1, 1, -1)
    G = harmonic_eisenstein(2).apply("xi")
    return {
        "eval_atoms (1681 atoms x 256 pts)": lambda: kernels.eval_atoms(coeff, ypow, alpha, beta, z),
        "lattice_block (C=10, N=400, 256 pts)": lambda: kernels.lattice_block(z, -2, sc, sp, 10, 400),
        "coset_sum (N=200, 256 pts)": lambda: kernels.coset_sum(z, -2, sc, sp, sa, sb, pairs),
        "cycle_integral (Eisenstein, D=5)": lambda: cycle_integral(G, Q).value,
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled backend not built; only the numpy fallback is available", file=sys.stderr)
    cases = _cases()
    prev = kernels.backend_name()
    print(f"{'kernel':40s} " + " ".join(f"{b:>12s}" for b in backends) + "   speedup   max rel diff")
    try:
        for name, fn in cases.items():
            times, vals = {}, {}
            for b in backends:
                kernels.use_backend(b)
                vals[b] = np.asarray(fn())
                times[b] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
            cells = " ".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
            if len(backends) == 2:
                a, c = vals["compiled"], vals["python"]
                diff = float(np.max(np.abs(a - c) / np.maximum(np.abs(c), 1e-300)))
                print(f"{name:40s} {cells}   {times['python'] / times['compiled']:6.1f}x   {diff:.1e}")
            else:
                print(f"{name:40s} {cells}")
    finally:
        kernels.use_backend(prev)


if __name__ == "__main__":
    main()
