"""Map the stable and collapsed regions on the r-k and r-v planes.

Writes results/phase_r_k.csv and results/phase_r_v.csv, one row per grid
cell with mean tau, p_inf, and n_inf over replicas.
"""

import argparse
import pathlib
import time

from margincascade import MarketParams, phase_diagram
from margincascade.io import write_grid


def grid(start, stop, step):
    count = int(round((stop - start) / step)) + 1
    return [round(start + i * step, 10) for i in range(count)]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--replicas", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--outdir", default="results")
    args = parser.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    base = MarketParams()
    jobs = [
        ("phase_r_k.csv", base, "r", grid(1.2, 2.0, 0.05), "k", grid(0.3, 0.7, 0.02)),
        ("phase_r_v.csv", base, "r", grid(1.2, 2.0, 0.1), "v", grid(10, 50, 5)),
    ]
    for name, params, axis1, values1, axis2, values2 in jobs:
        cells = len(values1) * len(values2)
        print(f"{name}: {len(values1)} x {len(values2)} grid, "
              f"{cells * args.replicas} runs")
        t0 = time.perf_counter()
        result = phase_diagram(params, axis1, values1, axis2, values2,
                               replicas=args.replicas, master_seed=args.seed)
        elapsed = time.perf_counter() - t0
        path = outdir / name
        rows = write_grid(str(path), result)
        print(f"wrote {path} ({rows} rows, {elapsed:.1f}s)")


if __name__ == "__main__":
    main()
