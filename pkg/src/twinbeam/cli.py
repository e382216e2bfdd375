"""Command-line front end: scenario runs, the catalog, and click sampling.

Exit codes: 0 success, 2 usage or parameter validation error, 3
scenario error (for example an impossible post-selection).  Identical
arguments and seed produce byte-identical JSON output.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import TwinbeamError
from .fock import Statistics
from .interferometer import (
    Network,
    build_tree,
    coincidence,
    detect,
    fig1_network,
    fig2_network,
    opposite_spin_input,
    run_network,
    sample_clicks,
)
from .reporting import SAMPLED, Scalar, ScenarioReport, canonical_json
from .scenarios import (
    DEFAULT_SEED,
    list_scenarios,
    scenario_complementarity,
    scenario_dual,
    scenario_feedback,
    scenario_fig1,
    scenario_fig2,
    scenario_gaussian,
    scenario_mixed_input,
    scenario_statistics_test,
    scenario_tree,
)

_FORMATS = ("table", "json", "csv")

#: per-scenario CLI parameters beyond --statistics, with defaults
_SCENARIO_PARAMS: dict[str, dict[str, Any]] = {
    "fig1": {},
    "fig2": {},
    "tree": {"depth": 2},
    "feedback": {"depth": 7, "trials": 0, "seed": DEFAULT_SEED},
    "statistics-test": {},
    "mixed-input": {},
    "complementarity": {"grid": 21},
    "gaussian": {"velocity": 1.0, "width": 1.0, "delay_max": 3.0, "grid": 21},
    "dual": {},
}


@dataclass
class RunConfig:
    """Validated scenario invocation."""

    scenario: str
    statistics: Statistics
    params: dict[str, Any] = field(default_factory=dict)
    fmt: str = "table"
    output: Path | None = None


def _build_run_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> RunConfig:
    if args.scenario not in _SCENARIO_PARAMS:
        parser.error(
            f"unknown scenario {args.scenario!r}; run 'twinbeam list' for the catalog"
        )
    allowed = _SCENARIO_PARAMS[args.scenario]
    params = dict(allowed)
    for name in ("depth", "trials", "seed", "grid", "velocity", "width", "delay_max"):
        value = getattr(args, name)
        if value is None:
            continue
        if name not in allowed:
            flag = "--" + name.replace("_", "-")
            parser.error(f"scenario {args.scenario!r} does not take {flag}")
        params[name] = value
    return RunConfig(
        scenario=args.scenario,
        statistics=Statistics.from_name(args.statistics),
        params=params,
        fmt=args.format,
        output=args.output,
    )


def _run_scenario(config: RunConfig) -> ScenarioReport:
    s, p = config.statistics, config.params
    if config.scenario == "fig1":
        return scenario_fig1(s)
    if config.scenario == "fig2":
        return scenario_fig2(s)
    if config.scenario == "tree":
        return scenario_tree(p["depth"], s)
    if config.scenario == "feedback":
        return scenario_feedback(p["depth"], s, trials=p["trials"], seed=p["seed"])
    if config.scenario == "statistics-test":
        return scenario_statistics_test(s)
    if config.scenario == "mixed-input":
        return scenario_mixed_input(s)
    if config.scenario == "complementarity":
        return scenario_complementarity(p["grid"], s)
    if config.scenario == "gaussian":
        return scenario_gaussian(p["velocity"], p["width"], p["delay_max"], p["grid"], s)
    if config.scenario == "dual":
        return scenario_dual(s)
    raise TwinbeamError(f"no runner for scenario {config.scenario!r}")


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)


def _render(report: ScenarioReport, fmt: str) -> str:
    if fmt == "json":
        return report.to_json()
    if fmt == "csv":
        return report.to_csv()
    return report.to_table()


def _clicks_network(args: argparse.Namespace, parser: argparse.ArgumentParser) -> Network:
    sources = [args.network is not None, args.depth is not None, args.fig is not None]
    if sum(sources) != 1:
        parser.error("choose exactly one of --network, --depth, --fig")
    if args.network is not None:
        try:
            data = json.loads(Path(args.network).read_text())
            return Network.from_dict(data)
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            parser.error(f"cannot load network file {args.network!r}: {exc}")
    if args.depth is not None:
        if not 1 <= args.depth <= 7:
            parser.error("--depth must be between 1 and 7")
        return build_tree(args.depth)
    return fig1_network() if args.fig == 1 else fig2_network()


def _run_clicks(args: argparse.Namespace, parser: argparse.ArgumentParser) -> ScenarioReport:
    net = _clicks_network(args, parser)
    if len(net.inputs) < 2:
        parser.error("the network needs two input paths for the opposite-spin pair")
    if args.trials < 1:
        parser.error("--trials must be at least 1")
    statistics = Statistics.from_name(args.statistics)
    state = opposite_spin_input(statistics, net)
    histogram = sample_clicks(net, state, args.trials, args.seed)
    exact = {
        b.pattern: b.probability
        for b in detect(run_network(net, state), net.monitored)
    }
    rows = []
    for pattern in sorted(set(exact) | set(histogram), key=lambda p: (len(p), sorted(p))):
        count = histogram.get(pattern, 0)
        rows.append(
            {
                "pattern": "+".join(sorted(pattern)) or "none",
                "count": count,
                "frequency": count / args.trials,
                "probability": exact.get(pattern, 0.0),
            }
        )
    coincidence_count = sum(histogram.get(p, 0) for p in histogram if coincidence(p))
    return ScenarioReport(
        scenario="clicks",
        statistics=statistics.value,
        parameters={"trials": args.trials, "seed": args.seed},
        scalars={
            "trials": Scalar(args.trials),
            "coincidence_frequency": Scalar(coincidence_count / args.trials, SAMPLED),
            "coincidence_probability": Scalar(
                sum(p for pat, p in exact.items() if coincidence(pat))
            ),
        },
        table=rows,
    )


def _catalog_report() -> list[dict[str, str]]:
    rows = [
        {"name": info.name, "parameters": " ".join(info.parameters), "claim": info.claim}
        for info in list_scenarios()
    ]
    return rows


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twinbeam",
        description="Two identical particles through beam-splitter networks with "
        "which-way detectors: post-selected entanglement, statistics tests, and "
        "complementarity sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    list_p = sub.add_parser("list", help="show the scenario catalog")
    list_p.add_argument("--format", choices=("table", "json"), default="table")

    run_p = sub.add_parser("run", help="run one scenario and emit its report")
    run_p.add_argument("scenario", help="scenario name (see 'twinbeam list')")
    run_p.add_argument(
        "--statistics", choices=("boson", "fermion"), default="fermion",
        help="particle statistics (default fermion)",
    )
    run_p.add_argument("--depth", type=int, default=None, help="tree depth or feedback rounds")
    run_p.add_argument("--trials", type=int, default=None, help="Monte Carlo trajectories (0 = exact only)")
    run_p.add_argument("--seed", type=int, default=None, help=f"sampling seed (default {DEFAULT_SEED})")
    run_p.add_argument("--grid", type=int, default=None, help="number of sweep points")
    run_p.add_argument("--velocity", type=float, default=None, help="packet velocity")
    run_p.add_argument("--width", type=float, default=None, help="packet width")
    run_p.add_argument("--delay-max", dest="delay_max", type=float, default=None, help="largest packet delay")
    run_p.add_argument("--format", choices=_FORMATS, default="table")
    run_p.add_argument("--output", type=Path, default=None, help="write to file instead of stdout")

    clicks_p = sub.add_parser("clicks", help="sample detector clicks from a network")
    clicks_p.add_argument("--network", default=None, help="network description JSON file")
    clicks_p.add_argument("--depth", type=int, default=None, help="use a splitting tree of this depth")
    clicks_p.add_argument("--fig", type=int, choices=(1, 2), default=None, help="use a built-in network")
    clicks_p.add_argument("--statistics", choices=("boson", "fermion"), default="fermion")
    clicks_p.add_argument("--trials", type=int, default=10000)
    clicks_p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    clicks_p.add_argument("--format", choices=_FORMATS, default="table")
    clicks_p.add_argument("--output", type=Path, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            rows = _catalog_report()
            if args.format == "json":
                sys.stdout.write(canonical_json(rows))
            else:
                width = max(len(r["name"]) for r in rows)
                pwidth = max(len(r["parameters"]) for r in rows)
                for r in rows:
                    sys.stdout.write(
                        f"{r['name']:<{width}}  {r['parameters']:<{pwidth}}  {r['claim']}\n"
                    )
            return 0
        if args.command == "run":
            config = _build_run_config(args, parser)
            try:
                report = _run_scenario(config)
            except ValueError as exc:
                parser.error(str(exc))
            _emit(_render(report, config.fmt), config.output)
            return 0
        if args.command == "clicks":
            report = _run_clicks(args, parser)
            _emit(_render(report, args.format), args.output)
            return 0
    except TwinbeamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
