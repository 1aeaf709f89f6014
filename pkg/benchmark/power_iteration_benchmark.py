import timeit
from argparse import ArgumentParser

import numpy as np

from pyage.data import generate_sbm
from pyage.graph import laplacians
from pyage.spectral import dense_sym_eig, lambda_max_power_iteration


def run_benchmark(n, p_in, p_out, repeats=3):
    g, _ = generate_sbm((n // 2, n - n // 2), p_in, p_out, seed=0)
    l_sym = laplacians(g).l_sym

    power_times = []
    dense_times = []
    for seed in range(repeats):
        start = timeit.default_timer()
        estimate = lambda_max_power_iteration(l_sym, seed=seed)
        power_times.append(timeit.default_timer() - start)

        start = timeit.default_timer()
        values, _ = dense_sym_eig(l_sym, cap=n)
        dense_times.append(timeit.default_timer() - start)

    return {
        "n": n,
        "edges": g.num_edges,
        "iterations": estimate.iterations,
        "error": abs(estimate.value - float(np.max(values))),
        "power_time": sum(power_times) / repeats,
        "dense_time": sum(dense_times) / repeats,
    }


def main():
    parser = ArgumentParser()
    parser.add_argument("--sizes", type=int, nargs="+", default=[250, 500, 1000, 2000])
    parser.add_argument("--p-in", type=float, default=0.05)
    parser.add_argument("--p-out", type=float, default=0.005)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    results = [
        run_benchmark(n, args.p_in, args.p_out, args.repeats) for n in args.sizes
    ]

    print("Configuration:")
    print(f"  p_in:    {args.p_in}")
    print(f"  p_out:   {args.p_out}")
    print(f"  Repeats: {args.repeats}")
    print()
    print("lambda_max: power iteration against the dense solver")
    print(
        f"{'n':>6} | {'Edges':>7} | {'Iters':>5} | {'Error':>9} | "
        f"{'Power (s)':>10} | {'Dense (s)':>10}"
    )
    print("-" * 62)

    for r in results:
        print(
            f"{r['n']:>6} | {r['edges']:>7} | {r['iterations']:>5} | "
            f"{r['error']:.3e} | {r['power_time']:>10.6f} | {r['dense_time']:>10.6f}"
        )

    print()


if __name__ == "__main__":
    main()
