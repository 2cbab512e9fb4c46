"""Timing table: Comb-Bernoulli simulation against the subset-process scheme.

    python3 scripts/run_bench.py --output bench.csv
"""

from __future__ import annotations

import argparse
import json

from combfit.bench import BenchConfig, run_bench, write_bench_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", default="2,3,4,5,6,7,8,9,10,20,50,100")
    ap.add_argument("--rows", type=int, default=1000)
    ap.add_argument("--repetitions", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--output", default="bench.csv")
    args = ap.parse_args()

    dims = tuple(sorted(int(v) for v in args.dims.split(",")))
    rep = run_bench(BenchConfig(dims=dims, n_rows=args.rows, repetitions=args.repetitions, seed=args.seed))
    write_bench_csv(args.output, rep)
    for r in rep.rows:
        lv = "-" if r.levy_seconds is None else f"{r.levy_seconds:.4g}"
        print(f"d={r.d:<4} comb {r.comb_seconds:.4g} s   subsets {lv} s   {r.levy_status}")
    print(json.dumps({"comb": rep.comb_fit, "subsets": rep.levy_fit}, indent=2))


if __name__ == "__main__":
    main()
