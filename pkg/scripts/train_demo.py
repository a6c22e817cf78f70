#!/usr/bin/env python3
"""Train a Stop/Go policy on one unsignalized intersection, then pit the
greedy snapshot against the random and always-go baselines on held-out seeds.

Runs in a couple of minutes at the default settings.
"""

import argparse
import statistics

from stopgo.engine import AlwaysGoPolicy, DemandSchedule, RandomPolicy, run_rollout
from stopgo.netmodel import GridGeometry, generate_grid
from stopgo.rainbow import LearnerConfig
from stopgo.training import ScenarioConfig, train


def evaluate(net, policy, demand, rv_rate, seeds, duration, horizon):
    rates = []
    for seed in seeds:
        schedule = DemandSchedule(total_vehicles=demand, horizon=horizon,
                                  rv_penetration=rv_rate)
        _, summary = run_rollout(net, schedule, policy, seed=seed,
                                 duration=duration, log_decisions=False)
        rates.append(summary.collided / max(1, summary.departed))
    return statistics.mean(rates), statistics.stdev(rates)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--episodes", type=int, default=200)
    ap.add_argument("--demand", type=int, default=60)
    ap.add_argument("--rv-rate", type=float, default=0.6)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--eval-seeds", type=int, default=20)
    ap.add_argument("--checkpoint-dir", default="runs/demo")
    args = ap.parse_args()

    net = generate_grid(1, 0, GridGeometry(rows=1, cols=1))
    learner_config = LearnerConfig(hidden=(128, 128), momentum=0.9,
                                   warmup=500, episodes=args.episodes)
    scenario = ScenarioConfig(demand=args.demand, episode_duration=400.0,
                              rv_penetration=args.rv_rate)
    learner = train(net, episodes=args.episodes, seed=args.seed,
                    checkpoint_dir=args.checkpoint_dir,
                    learner_config=learner_config, scenario=scenario)

    seeds = range(1000, 1000 + args.eval_seeds)
    horizon = args.demand * 4.0  # same arrival density as training episodes
    print(f"\ncollision rate over {args.eval_seeds} held-out seeds "
          f"(demand {args.demand}, {args.rv_rate:.0%} RVs):")
    for name, policy in (("trained", learner.snapshot()),
                         ("random", RandomPolicy()),
                         ("always-go", AlwaysGoPolicy())):
        mean, std = evaluate(net, policy, args.demand, args.rv_rate, seeds,
                             duration=400.0, horizon=horizon)
        print(f"  {name:<10} {mean:.4f} +/- {std:.4f}")
    print(f"\ncheckpoint written to {args.checkpoint_dir}")


if __name__ == "__main__":
    main()
