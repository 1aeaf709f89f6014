import timeit
from argparse import ArgumentParser

import numpy as np

from pyage.encoder import similarity
from pyage.sampling import ThresholdSchedule, select_samples


def run_benchmark(n, dim, quantile_samples, repeats=3):
    rng = np.random.default_rng(0)
    s = similarity(rng.random((n, dim)))
    sched = ThresholdSchedule.from_ratios(n, 0.01, 0.005, 0.5, 0.6, 1)

    exact_times = []
    sampled_times = []
    for seed in range(repeats):
        start = timeit.default_timer()
        exact = select_samples(s, sched, pair_budget=n * n, seed=seed)
        exact_times.append(timeit.default_timer() - start)

        start = timeit.default_timer()
        sampled = select_samples(
            s, sched, pair_budget=0, quantile_samples=quantile_samples, seed=seed
        )
        sampled_times.append(timeit.default_timer() - start)

    exact_pos = {tuple(pair) for pair in exact.positives.tolist()}
    sampled_pos = {tuple(pair) for pair in sampled.positives.tolist()}
    return {
        "n": n,
        "overlap": len(exact_pos & sampled_pos) / max(1, len(exact_pos)),
        "exact_time": sum(exact_times) / repeats,
        "sampled_time": sum(sampled_times) / repeats,
    }


def main():
    parser = ArgumentParser()
    parser.add_argument("--sizes", type=int, nargs="+", default=[500, 1000, 2000])
    parser.add_argument("--dim", type=int, default=16)
    parser.add_argument("--samples", type=int, default=10**6)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    results = [
        run_benchmark(n, args.dim, args.samples, args.repeats) for n in args.sizes
    ]

    print("Configuration:")
    print(f"  Embedding width:  {args.dim}")
    print(f"  Quantile samples: {args.samples}")
    print(f"  Repeats:          {args.repeats}")
    print()
    print("Pair selection: full ranking against sampled cutoffs")
    print(f"{'n':>6} | {'Overlap':>7} | {'Exact (s)':>10} | {'Sampled (s)':>11}")
    print("-" * 44)

    for r in results:
        print(
            f"{r['n']:>6} | {r['overlap']:>7.3f} | {r['exact_time']:>10.6f} | "
            f"{r['sampled_time']:>11.6f}"
        )

    print()


if __name__ == "__main__":
    main()
