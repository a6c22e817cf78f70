"""Command-line surface: netgen, transform, train, simulate, sweep.

Exit codes: 0 success, 1 usage error (bad flags/arguments), 2 runtime
error (unreadable files, invalid documents, failed runs). Options may also
be supplied through `key = value` config files; explicit flags win.
"""

from __future__ import annotations

import argparse
import sys

from . import configfile, metrics, netmodel, training
from .agent import RewardWeights
from .configfile import as_bool, as_float, as_int, as_list
from .engine import DemandSchedule, EngineConfig, run_rollout, write_events_csv
from .rainbow import LearnerConfig
from .training import ScenarioConfig


class _Parser(argparse.ArgumentParser):
    """argparse maps usage errors to exit code 2; this tool reserves 2 for
    runtime failures, so remap usage problems to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> _Parser:
    parser = _Parser(prog="stopgo", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("netgen", help="generate a grid network document")
    p.add_argument("--unsignalized", type=int, required=True)
    p.add_argument("--signalized", type=int, required=True)
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--block-length", type=float, default=150.0)
    p.add_argument("--stub-length", type=float, default=120.0)
    p.add_argument("--speed-limit", type=float, default=13.9)
    p.add_argument("--cycle", type=float, default=60.0)

    p = sub.add_parser("transform", help="rewrite a network document")
    p.add_argument("--no-left-turns", action="store_true",
                   help="replace every left turn with its straight movement")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train the Stop/Go policy")
    p.add_argument("--network", required=True)
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--checkpoint", required=True,
                   help="directory for checkpoint.npz and training_curve.csv")
    p.add_argument("--config", default=None, help="learner/scenario config file")
    p.add_argument("--resume", action="store_true",
                   help="continue from the checkpoint already in the directory")
    p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("simulate", help="run one rollout")
    p.add_argument("--network", required=True)
    p.add_argument("--demand", type=int, default=None)
    p.add_argument("--rv-rate", type=float, default=None)
    p.add_argument("--policy", default=None,
                   help="checkpoint path, 'random', or 'always-go'")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--duration", type=float, default=None)
    p.add_argument("--events", default=None, help="event log CSV path")
    p.add_argument("--summary", default=None, help="summary text path")
    p.add_argument("--config", default=None)
    p.add_argument("--no-decision-log", action="store_true",
                   help="omit per-decision rows from the event log")

    p = sub.add_parser("sweep", help="run the experiment grid")
    p.add_argument("--spec", required=True, help="sweep spec config file")
    p.add_argument("--policy", default=None)
    p.add_argument("--out", required=True, help="per-rollout results CSV")
    p.add_argument("--summary", default=None, help="per-cell summary CSV")
    p.add_argument("--quiet", action="store_true")

    return parser


def _load_optional_config(path) -> dict:
    return configfile.load_config(path) if path else {}


def _learner_config(values: dict) -> LearnerConfig:
    base = LearnerConfig()
    hidden = tuple(int(h) for h in as_list(
        values, "hidden", [str(w) for w in base.hidden]))
    return LearnerConfig(
        gamma=as_float(values, "gamma", base.gamma),
        learning_rate=as_float(values, "learning_rate", base.learning_rate),
        batch_size=as_int(values, "batch_size", base.batch_size),
        atoms=as_int(values, "atoms", base.atoms),
        v_min=as_float(values, "v_min", base.v_min),
        v_max=as_float(values, "v_max", base.v_max),
        hidden=hidden,
        target_sync=as_int(values, "target_sync", base.target_sync),
        eps_start=as_float(values, "eps_start", base.eps_start),
        eps_end=as_float(values, "eps_end", base.eps_end),
        eps_fraction=as_float(values, "eps_fraction", base.eps_fraction),
        buffer_capacity=as_int(values, "buffer_capacity", base.buffer_capacity),
        alpha_per=as_float(values, "alpha_per", base.alpha_per),
        beta_start=as_float(values, "beta_start", base.beta_start),
        beta_end=as_float(values, "beta_end", base.beta_end),
        priority_floor=as_float(values, "priority_floor", base.priority_floor),
        momentum=as_float(values, "momentum", base.momentum),
        grad_clip=as_float(values, "grad_clip", base.grad_clip),
        warmup=as_int(values, "warmup", base.warmup),
        episodes=as_int(values, "episodes", base.episodes),
    )


def _engine_config(values: dict) -> EngineConfig:
    base = EngineConfig()
    return EngineConfig(
        dt=as_float(values, "dt", base.dt),
        zone_length=as_float(values, "zone_length", base.zone_length),
        vehicle_length=as_float(values, "vehicle_length", base.vehicle_length),
        gap_accept_tta=as_float(values, "gap_accept_tta", base.gap_accept_tta),
        engage_range=as_float(values, "engage_range", base.engage_range),
        collision_dwell=as_float(values, "collision_dwell", base.collision_dwell),
        all_red=as_float(values, "all_red", base.all_red),
        control_zone=as_float(values, "control_zone", base.control_zone),
        decision_period=as_float(values, "decision_period", base.decision_period),
    )


def _reward_weights(values: dict) -> RewardWeights:
    base = RewardWeights()
    return RewardWeights(alpha=as_float(values, "alpha", base.alpha),
                         beta_penalty=as_float(values, "beta_penalty",
                                               base.beta_penalty))


def _cmd_netgen(args) -> int:
    geometry = netmodel.GridGeometry(
        rows=args.rows, cols=args.cols, block_length=args.block_length,
        stub_length=args.stub_length, speed_limit=args.speed_limit,
        cycle_length=args.cycle)
    net = netmodel.generate_grid(args.unsignalized, args.signalized, geometry)
    netmodel.save_network(net, args.out)
    print(f"wrote {args.out}: {len(net.intersections)} intersections, "
          f"{len(net.lanes)} lanes, {len(net.routes)} routes")
    return 0


def _cmd_transform(args) -> int:
    if not args.no_left_turns:
        print("transform: no transform selected (use --no-left-turns)",
              file=sys.stderr)
        return 1
    net = netmodel.load_network(args.in_path)
    out = netmodel.remove_left_turns(net)
    netmodel.save_network(out, args.out)
    lefts = sum(1 for m in out.movements if m.turn == netmodel.LEFT)
    print(f"wrote {args.out}: {len(out.movements)} movements "
          f"({lefts} left turns), {len(out.routes)} routes")
    return 0


def _cmd_train(args) -> int:
    values = configfile.merge_options(
        _load_optional_config(args.config),
        {"episodes": args.episodes, "seed": args.seed})
    learner_config = _learner_config(values)
    scenario = ScenarioConfig(
        demand=as_int(values, "demand", 120),
        episode_duration=as_float(values, "duration", 240.0),
        rv_penetration=as_float(values, "rv_rate", 0.6),
        axis_bias=as_float(values, "axis_bias", 2.0))
    net = netmodel.load_network(args.network)
    episodes = as_int(values, "episodes", learner_config.episodes)
    seed = as_int(values, "seed", 0)
    resume = None
    if args.resume:
        resume = training.resolve_checkpoint(args.checkpoint)
    training.train(net, episodes, seed, args.checkpoint,
                   learner_config=learner_config, scenario=scenario,
                   engine_config=_engine_config(values),
                   weights=_reward_weights(values),
                   resume_from=resume, quiet=args.quiet)
    print(f"checkpoint written to {args.checkpoint}")
    return 0


def _cmd_simulate(args) -> int:
    values = configfile.merge_options(
        _load_optional_config(args.config),
        {"demand": args.demand, "rv_rate": args.rv_rate,
         "policy": args.policy, "seed": args.seed,
         "duration": args.duration})
    if "demand" not in values:
        print("simulate: --demand is required (flag or config)", file=sys.stderr)
        return 1
    net = netmodel.load_network(args.network)
    duration = as_float(values, "duration", 1000.0)
    schedule = DemandSchedule(
        total_vehicles=as_int(values, "demand", 0),
        horizon=as_float(values, "horizon", duration),
        rv_penetration=as_float(values, "rv_rate", 0.0),
        axis_bias=as_float(values, "axis_bias", 2.0))
    policy = training.make_policy(str(values.get("policy", "random")))
    seed = as_int(values, "seed", 0)
    events, summary = run_rollout(
        net, schedule, policy, seed, duration, _engine_config(values),
        weights=_reward_weights(values),
        log_decisions=not args.no_decision_log)
    if args.events:
        write_events_csv(events, args.events)
    text = (f"network = {args.network}\n"
            f"policy = {values.get('policy', 'random')}\n"
            f"seed = {seed}\n"
            f"demand = {schedule.total_vehicles}\n"
            f"rv_penetration = {schedule.rv_penetration:g}\n"
            + summary.as_text())
    if args.summary:
        with open(args.summary, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    else:
        print(text, end="")
    return 0


def _cmd_sweep(args) -> int:
    values = configfile.load_config(args.spec)
    if args.policy is not None:
        values["policy"] = args.policy
    spec = metrics.ExperimentSpec(
        configs=tuple(as_list(values, "configs", [])),
        rv_rates=tuple(float(x) for x in as_list(values, "rv_rates", [])),
        demands=tuple(int(x) for x in as_list(values, "demands", [])),
        remove_lefts=as_bool(values, "remove_left_turns", False),
        rollouts=as_int(values, "rollouts", 10),
        base_seed=as_int(values, "base_seed", 1),
        duration=as_float(values, "duration", 1000.0),
        rows=as_int(values, "rows", 2),
        cols=as_int(values, "cols", 7),
        axis_bias=as_float(values, "axis_bias", 2.0))
    policy = training.make_policy(str(values.get("policy", "random")))

    def progress(cell_index, label, rate, demand, seed):
        if not args.quiet:
            print(f"cell {cell_index} [{label} rate={rate:g} "
                  f"demand={demand}] seed {seed}", flush=True)

    rows = metrics.run_sweep(spec, policy, _engine_config(values),
                             progress=progress)
    metrics.write_results_csv(rows, args.out)
    if args.summary:
        cells = metrics.write_summary_csv(rows, args.summary)
        print(f"wrote {args.out} ({len(rows)} rows) and "
              f"{args.summary} ({len(cells)} cells)")
    else:
        print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


_COMMANDS = {
    "netgen": _cmd_netgen,
    "transform": _cmd_transform,
    "train": _cmd_train,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
}

_RUNTIME_ERRORS = (OSError, ValueError, KeyError, FloatingPointError,
                   netmodel.ParseError, netmodel.NetworkError,
                   configfile.ConfigError, metrics.MetricError)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        return int(exit_request.code or 0)
    if args.command is None:
        parser.print_help()
        return 1
    try:
        return _COMMANDS[args.command](args)
    except _RUNTIME_ERRORS as error:
        print(f"stopgo {args.command}: {error}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
