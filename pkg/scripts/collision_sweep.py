#!/usr/bin/env python3
"""Sweep collision rates over signalized/unsignalized mixes and RV shares.

Each (config, rv rate, demand) cell runs a fixed number of seeded rollouts
on a 2x7 grid; per-rollout rows land in results.csv and per-cell
mean/std percentages in summary.csv.
"""

import argparse
import sys

from stopgo.metrics import (
    ExperimentSpec,
    run_sweep,
    write_results_csv,
    write_summary_csv,
)
from stopgo.training import make_policy

DEFAULT_CONFIGS = ("12U+2S", "10U+4S", "8U+6S", "6U+8S", "4U+10S")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", default=",".join(DEFAULT_CONFIGS),
                    help="comma-separated nU+mS control mixes")
    ap.add_argument("--rv-rates", default="0.25,0.4,0.6,0.8")
    ap.add_argument("--demands", default="120")
    ap.add_argument("--rollouts", type=int, default=10)
    ap.add_argument("--duration", type=float, default=1000.0)
    ap.add_argument("--base-seed", type=int, default=1)
    ap.add_argument("--rows", type=int, default=2)
    ap.add_argument("--cols", type=int, default=7)
    ap.add_argument("--no-left-turns", action="store_true")
    ap.add_argument("--policy", default="random",
                    help="random, always-go, or a checkpoint path")
    ap.add_argument("--results", default="results.csv")
    ap.add_argument("--summary", default="summary.csv")
    args = ap.parse_args()

    spec = ExperimentSpec(
        configs=tuple(c.strip() for c in args.configs.split(",")),
        rv_rates=tuple(float(r) for r in args.rv_rates.split(",")),
        demands=tuple(int(d) for d in args.demands.split(",")),
        remove_lefts=args.no_left_turns,
        rollouts=args.rollouts,
        base_seed=args.base_seed,
        duration=args.duration,
        rows=args.rows,
        cols=args.cols)

    total = (len(spec.configs) * len(spec.rv_rates) * len(spec.demands)
             * spec.rollouts)
    done = [0]

    def progress(cell_index, label, rate, demand, seed):
        done[0] += 1
        sys.stderr.write(f"\r{done[0]}/{total} rollouts ({label} "
                         f"rv={rate} demand={demand})")
        sys.stderr.flush()

    rows = run_sweep(spec, make_policy(args.policy), progress=progress)
    sys.stderr.write("\n")
    write_results_csv(rows, args.results)
    cells = write_summary_csv(rows, args.summary)
    print(f"{len(rows)} rollouts -> {args.results}, "
          f"{len(cells)} cells -> {args.summary}")


if __name__ == "__main__":
    main()
