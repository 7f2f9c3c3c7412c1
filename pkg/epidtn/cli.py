# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""
Command line interface.

Subcommands write CSV (or a key/value report for `estimate`) to the
`--out` target and diagnostics to stderr. Exit codes: 0 success,
1 model or data error, 2 usage error.

Option values are taken from the command line, then from the YAML
file given with `--config` (keys are long option names without the
leading dashes), then from the package settings.

"""
import argparse
import logging
from pathlib import Path
import sys
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

import pandas as pd

from .common import pkg_config
from .common.exceptions import EpidtnError, ParameterError
from .common.utility import parse_number_list
from .experiments.results import (
    analytic_row,
    make_result_table,
    to_analytic_frame,
    to_replay_frame,
    write_csv,
)
from .experiments.sweeps import (
    SweepSpec,
    analytic_table,
    evaluate_sweep,
    preset_sweep,
    simulate_table,
    sweep_presets,
)
from .model.delivery import (
    DeliveryQuery,
    delivery_ratio,
    max_bundle_size,
    min_delay_for_ratio,
)
from .model.edge_markov import EdgeMarkovParams, TraceStats, estimate_params
from .model.epidemic_chain import LowerBoundMode
from .sim.flooding import SimConfig
from .sim.trace_replay import (
    ReplayConfig,
    component_ceiling,
    duration_summary,
    link_durations,
    parse_trace,
    replay_experiment,
    trace_stats,
)
from ._version import VERSION

__version__ = VERSION
__author__ = "epidtn contributors"

logger = logging.getLogger(__name__)

_MODEL_SETTINGS: Dict[str, Tuple[str, str]] = {
    "n": ("ModelDefaults", "n_nodes"),
    "p_up": ("ModelDefaults", "p_up"),
    "p_down": ("ModelDefaults", "p_down"),
    "tau": ("ModelDefaults", "tau"),
    "alpha": ("ModelDefaults", "alpha"),
    "delay": ("ModelDefaults", "delay"),
    "lower_bound_mode": ("ModelDefaults", "lower_bound_mode"),
    "runs": ("Simulation", "runs"),
    "seed": ("Simulation", "seed"),
    "block_size": ("Simulation", "block_size"),
}
_TRACE_SETTINGS: Dict[str, Tuple[str, str]] = {
    **_MODEL_SETTINGS,
    "tau": ("Replay", "tau"),
    "alpha": ("Replay", "alpha_values"),
    "delay": ("Replay", "delay_values"),
    "seed": ("Replay", "seed"),
    "horizon": ("Replay", "horizon"),
    "injection_interval": ("Replay", "injection_interval"),
    "pairs_per_batch": ("Replay", "pairs_per_batch"),
}
_NOT_IN_FILE = frozenset({"out", "config", "verbose", "help", "version"})
_TUNE_CANDIDATES = "1/8,1/4,1/2,1,2,3,4,5,6,7,8"


class UsageError(Exception):
    """Raised for invalid option values or combinations."""


def _number_list(value: Any, name: str, value_type: Callable = float) -> List[Any]:
    try:
        values = parse_number_list(value, value_type)
    except (ParameterError, ValueError) as err:
        raise UsageError(f"--{name}: {err}") from None
    if not values:
        raise UsageError(f"--{name} needs at least one value")
    return values


def _at_least(value: Any, name: str, minimum: int) -> int:
    number = int(value)
    if number < minimum:
        raise UsageError(f"--{name} must be at least {minimum}, got {number}")
    return number


def _model_params(opts: Dict[str, Any]) -> EdgeMarkovParams:
    return EdgeMarkovParams(p_up=opts["p_up"], p_down=opts["p_down"], tau=opts["tau"])


def _sim_config(opts: Dict[str, Any]) -> SimConfig:
    return SimConfig(
        runs=_at_least(opts["runs"], "runs", 1),
        seed=_at_least(opts["seed"], "seed", 0),
        block_size=_at_least(opts["block_size"], "block-size", 1),
        workers=_at_least(opts["workers"] or 1, "workers", 1),
    )


def _cmd_analytic(opts: Dict[str, Any]) -> pd.DataFrame:
    table = analytic_table(
        _model_params(opts),
        opts["n"],
        _number_list(opts["alpha"], "alpha"),
        _number_list(opts["delay"], "delay", int),
        opts["lower_bound_mode"],
    )
    return to_analytic_frame(table)


def _cmd_simulate(opts: Dict[str, Any]) -> pd.DataFrame:
    params = _model_params(opts)
    alphas = _number_list(opts["alpha"], "alpha")
    delays = _number_list(opts["delay"], "delay", int)
    table = simulate_table(params, opts["n"], alphas, delays, _sim_config(opts))
    if opts["with_analytic"]:
        analytic = analytic_table(
            params, opts["n"], alphas, delays, opts["lower_bound_mode"]
        )
        table = pd.concat([analytic, table], ignore_index=True)
    return to_analytic_frame(table, with_simulation=True)


def _cmd_sweep(opts: Dict[str, Any]) -> pd.DataFrame:
    overrides: Dict[str, Any] = {}
    if opts["outputs"]:
        overrides["outputs"] = [item.strip() for item in opts["outputs"].split(",")]
    if opts["alphas"]:
        overrides["alphas"] = _number_list(opts["alphas"], "alphas")
    if opts["delays"]:
        overrides["delays"] = _number_list(opts["delays"], "delays", int)
    if opts["values"]:
        overrides["values"] = _number_list(opts["values"], "values")
    if "montecarlo" in overrides.get("outputs", ()):
        overrides["simulation"] = _sim_config(opts)
    fixed = dict(
        params=_model_params(opts),
        n_nodes=opts["n"],
        alpha=_number_list(opts["alpha"], "alpha")[0],
        delay=_number_list(opts["delay"], "delay", int)[0],
        lower_bound_mode=opts["lower_bound_mode"],
    )
    if opts["preset"]:
        if opts["preset"] not in sweep_presets():
            raise UsageError(
                f"unknown preset {opts['preset']}; choose from "
                + ", ".join(sweep_presets())
            )
        if opts["variable"]:
            overrides["variable"] = opts["variable"]
        spec = preset_sweep(opts["preset"], **fixed, **overrides)
    else:
        if not opts["variable"] or "values" not in overrides:
            raise UsageError("sweep needs --preset or both --variable and --values")
        spec = SweepSpec(variable=opts["variable"], **fixed, **overrides)
    table = evaluate_sweep(spec, workers=_at_least(opts["workers"] or 1, "workers", 1))
    return to_analytic_frame(table, with_simulation="montecarlo" in spec.outputs)


def _load_trace(opts: Dict[str, Any]):
    tau = float(opts["tau"])
    if not tau > 0:
        raise UsageError(f"--tau must be positive, got {tau}")
    return parse_trace(opts["trace"], tau)


def _trace_node_stats(graph, n_override: Optional[int]) -> TraceStats:
    stats = trace_stats(graph)
    if n_override is None:
        return stats
    if n_override < graph.n_nodes:
        raise UsageError(
            f"--n {n_override} is smaller than the {graph.n_nodes} nodes in the trace"
        )
    return TraceStats(
        n_nodes=n_override,
        mean_link_lifetime=stats.mean_link_lifetime,
        mean_degree=stats.mean_degree * graph.n_nodes / n_override,
        tau=stats.tau,
    )


def _cmd_estimate(opts: Dict[str, Any]) -> pd.DataFrame:
    graph = _load_trace(opts)
    stats = _trace_node_stats(graph, opts["n_override"])
    params = estimate_params(stats)
    durations = link_durations(graph)
    contacts = durations[durations["state"] == "up"]
    summary = duration_summary(graph, params)
    one_step = summary.loc[summary["length"] == 1, "fraction"]
    report = [
        ("n_nodes", stats.n_nodes),
        ("snapshots", len(graph)),
        ("tau", stats.tau),
        ("mean_link_lifetime", stats.mean_link_lifetime),
        ("mean_degree", stats.mean_degree),
        ("contacts", len(contacts)),
        ("censored_contacts", int(contacts["censored"].sum())),
        ("one_step_fraction", float(one_step.iloc[0]) if len(one_step) else 0.0),
        ("p_up", params.p_up),
        ("p_down", params.p_down),
        ("pi_up", params.pi_up),
    ]
    return pd.DataFrame(report, columns=["key", "value"])


def _cmd_replay(opts: Dict[str, Any]) -> pd.DataFrame:
    graph = _load_trace(opts)
    config = ReplayConfig(
        horizon=opts["horizon"],
        injection_interval=opts["injection_interval"],
        pairs_per_batch=_at_least(opts["pairs_per_batch"], "pairs-per-batch", 1),
        alpha_values=_number_list(opts["alpha"], "alpha"),
        delay_values=_number_list(opts["delay"], "delay"),
        seed=opts["seed"],
    )
    tables = [replay_experiment(graph, config)]
    if opts["ceiling"]:
        tables.append(component_ceiling(graph, config))
    if opts["with_bounds"]:
        tables.append(_replay_bounds(graph, config, opts["lower_bound_mode"]))
    table = pd.concat(tables, ignore_index=True)
    return to_replay_frame(table, with_bounds=bool(opts["with_bounds"]))


def _replay_bounds(graph, config: ReplayConfig, mode: str) -> pd.DataFrame:
    """Return analytic rows from parameters estimated on the trace itself."""
    params = estimate_params(trace_stats(graph))
    logger.info("Estimated p_up=%.6f p_down=%.6f", params.p_up, params.p_down)
    rows = []
    for alpha in config.alpha_values:
        for delay in config.delay_values:
            steps = config.steps(delay, graph.tau, "delay")
            query = DeliveryQuery(n_nodes=graph.n_nodes, alpha=alpha, max_delay=steps)
            row = analytic_row(
                params, graph.n_nodes, alpha, steps, delivery_ratio(params, query, mode)
            )
            row["delay"] = float(delay)
            rows.append(row)
    return make_result_table(rows)


def _cmd_tune(opts: Dict[str, Any]) -> pd.DataFrame:
    if opts["target"] is None:
        raise UsageError("--target is required")
    params = _model_params(opts)
    target = float(opts["target"])
    if not 0 < target <= 1:
        raise UsageError(f"--target must be in (0, 1], got {target}")
    alphas = _number_list(opts["alpha"], "alpha")
    limit = _at_least(
        1000 if opts["max_delay"] is None else opts["max_delay"], "max-delay", 0
    )
    rows = []
    for alpha in alphas:
        delay = min_delay_for_ratio(
            params, opts["n"], alpha, target, limit, opts["lower_bound_mode"]
        )
        rows.append(("min_delay", alpha, None, target, delay))
    candidates = _number_list(opts["candidates"] or _TUNE_CANDIDATES, "candidates")
    for delay in _number_list(opts["delay"], "delay", int):
        best = max_bundle_size(
            params, opts["n"], delay, target, candidates, opts["lower_bound_mode"]
        )
        rows.append(("max_bundle_size", None, delay, target, best))
    frame = pd.DataFrame(rows, columns=["quantity", "alpha", "d", "target", "result"])
    return frame


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--out", default="-", help="Output file path, '-' for stdout (default)"
    )
    parser.add_argument("--config", help="YAML file of option values")
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log progress to stderr (-vv for debug output)",
    )


def _add_model(parser: argparse.ArgumentParser, trace: bool = False):
    if not trace:
        parser.add_argument("--n", type=int, help="Number of nodes")
        parser.add_argument(
            "--p-up", type=float, help="Probability of a link appearing"
        )
        parser.add_argument(
            "--p-down", type=float, help="Probability of a link disappearing"
        )
    parser.add_argument("--tau", type=float, help="Seconds per time step")
    parser.add_argument(
        "--alpha", help="Bundle size(s) in link sizes, comma separated (e.g. 1/8,1,2)"
    )
    parser.add_argument(
        "--delay",
        help="Maximum delay(s), comma separated"
        + (" (seconds)" if trace else " (time steps)"),
    )
    parser.add_argument(
        "--lower-bound-mode",
        choices=[mode.name for mode in LowerBoundMode],
        help="p_up substitution in the alpha > 1 lower bound",
    )


def _add_simulation(parser: argparse.ArgumentParser):
    parser.add_argument("--runs", type=int, help="Number of Monte Carlo runs")
    parser.add_argument("--seed", type=int, help="Master random seed")
    parser.add_argument(
        "--block-size",
        type=int,
        help="Runs simulated per block (with --seed, fixes the draws)",
    )
    parser.add_argument("--workers", type=int, help="Concurrent worker threads")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epidtn",
        description="Epidemic routing delivery ratio on edge-Markovian dynamic graphs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    analytic = subparsers.add_parser("analytic", help="Analytic delivery ratio")
    _add_model(analytic)
    analytic.set_defaults(func=_cmd_analytic, settings=_MODEL_SETTINGS)

    simulate = subparsers.add_parser("simulate", help="Monte Carlo delivery ratio")
    _add_model(simulate)
    _add_simulation(simulate)
    simulate.add_argument(
        "--with-analytic",
        action="store_true",
        default=None,
        help="Also emit the analytic rows",
    )
    simulate.set_defaults(func=_cmd_simulate, settings=_MODEL_SETTINGS)

    sweep = subparsers.add_parser("sweep", help="Single-variable parameter sweep")
    _add_model(sweep)
    _add_simulation(sweep)
    sweep.add_argument("--preset", help="Named sweep from the package settings")
    sweep.add_argument(
        "--variable",
        choices=["alpha", "delay", "n_nodes", "contact_time", "degree"],
        help="Swept quantity",
    )
    sweep.add_argument("--values", help="Swept values, comma separated")
    sweep.add_argument("--alphas", help="One series per bundle size")
    sweep.add_argument("--delays", help="One series per delay")
    sweep.add_argument(
        "--outputs", help="Row kinds: exact,bounds,montecarlo (default exact,bounds)"
    )
    sweep.set_defaults(func=_cmd_sweep, settings=_MODEL_SETTINGS)

    estimate = subparsers.add_parser(
        "estimate", help="Estimate model parameters from a contact trace"
    )
    estimate.add_argument("trace", help="Contact trace (time,node_a,node_b)")
    estimate.add_argument("--tau", type=float, help="Sampling period in seconds")
    estimate.add_argument(
        "--n", dest="n_override", type=int, help="Node count if larger than the trace's"
    )
    estimate.set_defaults(func=_cmd_estimate, settings=_TRACE_SETTINGS)

    replay = subparsers.add_parser("replay", help="Replay epidemic routing on a trace")
    replay.add_argument("trace", help="Contact trace (time,node_a,node_b)")
    _add_model(replay, trace=True)
    replay.add_argument("--horizon", type=float, help="Seconds of bundle injection")
    replay.add_argument(
        "--injection-interval", type=float, help="Seconds between injection batches"
    )
    replay.add_argument("--pairs-per-batch", type=int, help="Pairs per batch")
    replay.add_argument("--seed", type=int, help="Pair sampling seed")
    replay.add_argument(
        "--with-bounds",
        action="store_true",
        default=None,
        help="Add analytic rows from parameters estimated on the trace",
    )
    replay.add_argument(
        "--ceiling",
        action="store_true",
        default=None,
        help="Add rows for a bundle that floods whole components (alpha 0)",
    )
    replay.set_defaults(func=_cmd_replay, settings=_TRACE_SETTINGS)

    tune = subparsers.add_parser(
        "tune", help="Delay threshold and largest bundle size for a target ratio"
    )
    _add_model(tune)
    tune.add_argument("--target", type=float, help="Target ratio (required)")
    tune.add_argument(
        "--max-delay", type=int, help="Largest delay searched (default 1000)"
    )
    tune.add_argument(
        "--candidates",
        help="Candidate bundle sizes for the largest bundle search "
        + "(default 1/8,1/4,1/2,1,2,...,8)",
    )
    tune.set_defaults(func=_cmd_tune, settings=_MODEL_SETTINGS)

    for name, subparser in subparsers.choices.items():
        subparser.set_defaults(command=name, file_keys=_file_keys(subparser))
        _add_common(subparser)
    return parser


def _file_keys(parser: argparse.ArgumentParser) -> FrozenSet[Tuple[str, str]]:
    """Return (long option name without dashes, destination) pairs."""
    keys = set()
    # pylint: disable=protected-access
    for action in parser._actions:
        for option in action.option_strings:
            if option.startswith("--") and option[2:] not in _NOT_IN_FILE:
                keys.add((option[2:], action.dest))
    # pylint: enable=protected-access
    return frozenset(keys)


def _read_option_file(path: str, keys: FrozenSet[Tuple[str, str]]) -> Dict[str, Any]:
    if not Path(path).is_file():
        raise UsageError(f"--config file {path} not found")
    values = pkg_config.read_config_file(path)
    known = {key for key, _ in keys}
    unknown = sorted(set(values) - known)
    if unknown:
        raise UsageError(f"unknown option(s) in {path}: {', '.join(unknown)}")
    return values


def _resolve_options(args: argparse.Namespace) -> Dict[str, Any]:
    """Merge flags, the option file and package settings."""
    file_values = _read_option_file(args.config, args.file_keys) if args.config else {}
    opts = dict(vars(args))
    for key, dest in args.file_keys:
        value = getattr(args, dest, None)
        if value is None and file_values.get(key) is not None:
            value = file_values[key]
        if value is None and dest in args.settings:
            value = pkg_config.get_config(*args.settings[dest])
        opts[dest] = value
    if opts.get("lower_bound_mode") is None:
        opts["lower_bound_mode"] = LowerBoundMode.corrected.name
    return opts


def _configure_logging(verbosity: int):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(
        stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s"
    )
    logging.getLogger("epidtn").setLevel(level)


def _write_output(frame: pd.DataFrame, target: str):
    if target == "-":
        write_csv(frame, sys.stdout)
    else:
        write_csv(frame, target)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the epidtn command line.

    Parameters
    ----------
    argv : Optional[Sequence[str]], optional
        Arguments, by default None (sys.argv)

    Returns
    -------
    int
        Exit code: 0 ok, 1 model or data error, 2 usage error

    """
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_err:
        return int(exit_err.code or 0)
    _configure_logging(args.verbose)
    try:
        opts = _resolve_options(args)
        frame = args.func(opts)
        _write_output(frame, opts["out"])
    except UsageError as err:
        print(f"epidtn {args.command}: error: {err}", file=sys.stderr)
        return 2
    except (EpidtnError, OSError) as err:
        print(f"epidtn {args.command}: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
