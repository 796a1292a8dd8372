"""Command-line entry point: experiment grids, validation, sweeps.

A run executes the scenario for every (policy, seed) cell, writes
per-run artifacts under <out>/<policy>/<seed>/, and emits a paired
comparison report when more than one policy is requested. All flags can
also be given in a JSON config file; explicit flags win.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import engine, metrics, workload
from .cooling import CoolingConfig, CoolingKind
from .entropy import EstimatorConfig, EstimatorKind
from .policy import PolicyConfig, PolicyKind, SafConfig

log = logging.getLogger("fairsched.cli")

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

_ESTIMATOR_NAMES = {
    "shannon": EstimatorKind.SHANNON,
    "renyi": EstimatorKind.RENYI,
    "hartley": EstimatorKind.HARTLEY,
    "collision": EstimatorKind.COLLISION,
    "min": EstimatorKind.MIN_ENTROPY,
    "tsallis": EstimatorKind.TSALLIS,
}


class ConfigError(ValueError):
    """Bad flag/config combination; maps to exit code 2."""


@dataclass
class ExperimentConfig:
    preset: str | None = None
    trace: str | None = None
    generator: str | None = None
    tasks: int = 250
    users: int = workload.DEFAULT_USER_COUNT
    cpu_mean: float = 4.5
    ram_mean: float = 1050.0
    nodes: int = 16
    policies: list[str] = field(default_factory=lambda: ["drf"])
    seeds: list[int] = field(default_factory=lambda: [1])
    estimator: str = "shannon"
    cooling: str = "exponential"
    alpha: float | None = None
    k_const: float = 1000.0
    cold_fraction: float = 0.01
    audit: bool = False
    out: str = "results"
    jobs: int = 1

    def validate(self) -> None:
        sources = [s for s in (self.preset, self.trace, self.generator) if s]
        if len(sources) > 1:
            raise ConfigError("choose one of --preset, --trace, --generator")
        if not sources:
            raise ConfigError("a scenario source is required (--preset/--trace/--generator)")
        if not self.policies:
            raise ConfigError("at least one policy is required")
        if not self.seeds:
            raise ConfigError("at least one seed is required")


def parse_seeds(spec: str) -> list[int]:
    """'1..20' (inclusive) or '1,4,9'."""
    spec = spec.strip()
    match = re.fullmatch(r"(-?\d+)\.\.(-?\d+)", spec)
    if match:
        lo, hi = int(match.group(1)), int(match.group(2))
        if hi < lo:
            raise ConfigError(f"empty seed range {spec!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(part) for part in spec.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad seed spec {spec!r}") from exc


def parse_estimator(spec: str, k_const: float = 1000.0) -> EstimatorConfig:
    """'shannon', 'tsallis(0.8)', 'renyi(2)' and friends."""
    match = re.fullmatch(r"\s*([a-zA-Z_]+)\s*(?:\(\s*([-0-9.eE]+)\s*\))?\s*", spec)
    if not match:
        raise ConfigError(f"bad estimator spec {spec!r}")
    name, arg = match.group(1).lower(), match.group(2)
    if name not in _ESTIMATOR_NAMES:
        raise ConfigError(f"unknown estimator {name!r}")
    kind = _ESTIMATOR_NAMES[name]
    kwargs: dict = {"kind": kind, "k_const": k_const}
    if kind is EstimatorKind.RENYI:
        if arg is None:
            raise ConfigError("renyi needs an order, e.g. renyi(2)")
        kwargs["alpha"] = float(arg)
    elif kind is EstimatorKind.TSALLIS:
        if arg is None:
            raise ConfigError("tsallis needs an index, e.g. tsallis(0.8)")
        kwargs["q"] = float(arg)
    elif arg is not None:
        raise ConfigError(f"estimator {name!r} takes no parameter")
    return EstimatorConfig(**kwargs)


def parse_cooling(spec: str, alpha: float | None, cold_fraction: float) -> CoolingConfig:
    try:
        kind = CoolingKind(spec.strip().lower())
    except ValueError as exc:
        raise ConfigError(f"unknown cooling schedule {spec!r}") from exc
    return CoolingConfig(kind=kind, alpha=alpha, cold_fraction=cold_fraction)


def build_policy(name: str, config: ExperimentConfig) -> PolicyConfig:
    try:
        kind = PolicyKind(name.strip().lower())
    except ValueError as exc:
        raise ConfigError(f"unknown policy {name!r}") from exc
    if kind is not PolicyKind.SAF:
        return PolicyConfig(kind=kind)
    return PolicyConfig(
        kind=kind,
        saf=SafConfig(
            estimator=parse_estimator(config.estimator, config.k_const),
            cooling=parse_cooling(config.cooling, config.alpha, config.cold_fraction),
        ),
    )


def build_scenario(
    config: ExperimentConfig, seed: int, policy: PolicyConfig
) -> workload.Scenario:
    if config.preset:
        if config.preset != "wordcount":
            raise ConfigError(f"unknown preset {config.preset!r}")
        scenario = workload.wordcount_preset(config.nodes, policy=policy, seed=seed)
    elif config.trace:
        cluster = workload.Cluster(
            config.nodes,
            workload.ResourceVector([8, 8192]),
            ("vcores", "memory_mb"),
        )
        scenario = workload.scenario_from_trace(config.trace, cluster, policy, seed)
    else:
        cluster = workload.Cluster(
            config.nodes,
            workload.ResourceVector([8, 8192]),
            ("vcores", "memory_mb"),
        )
        if config.generator == "uniform":
            scenario = workload.generate_uniform(
                config.tasks, seed, cluster, n_users=config.users, policy=policy
            )
        elif config.generator == "gaussian":
            scenario = workload.generate_gaussian(
                config.tasks,
                seed,
                config.cpu_mean,
                config.ram_mean,
                cluster,
                n_users=config.users,
                policy=policy,
            )
        else:
            raise ConfigError(f"unknown generator {config.generator!r}")
    return scenario


def _run_cell(config: ExperimentConfig, policy_name: str, seed: int) -> engine.RunResult:
    policy = build_policy(policy_name, config)
    scenario = build_scenario(config, seed, policy)
    return engine.run(scenario)


def _write_run(outdir: Path, result: engine.RunResult, audit: bool) -> None:
    cell = outdir / result.policy / str(result.seed)
    cell.mkdir(parents=True, exist_ok=True)
    (cell / "summary.json").write_text(
        json.dumps(result.summary_dict(), indent=2) + "\n"
    )
    (cell / "usage.csv").write_text(result.usage_csv())
    if audit:
        (cell / "decisions.ndl").write_text(result.decisions_ndl())


def _execute_grid(
    config: ExperimentConfig, policies: Sequence[str], seeds: Sequence[int]
) -> dict[str, list[engine.RunResult]]:
    cells = [(policy, seed) for policy in policies for seed in seeds]
    results: dict[str, list[engine.RunResult]] = {p: [] for p in policies}
    if config.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futures = [pool.submit(_run_cell, config, p, s) for p, s in cells]
            for (policy, _), future in zip(cells, futures):
                results[policy].append(future.result())
    else:
        for policy, seed in cells:
            results[policy].append(_run_cell(config, policy, seed))
    return results


def _write_metric_csvs(outdir: Path, report: metrics.ComparisonReport) -> None:
    report_dir = outdir / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    for policy, rows in report.comparisons.items():
        for row in rows:
            safe = re.sub(r"[^A-Za-z0-9_.-]+", "_", row.metric).strip("_")
            path = report_dir / f"{policy}_vs_{report.baseline_policy}_{safe}.csv"
            lines = ["seed,percent_change"]
            lines += [f"{seed},{pct!r}" for seed, pct in row.paired_percent_changes]
            path.write_text("\n".join(lines) + "\n")


def cmd_run(config: ExperimentConfig) -> int:
    config.validate()
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    results = _execute_grid(config, config.policies, config.seeds)
    for runs in results.values():
        for result in runs:
            _write_run(outdir, result, config.audit)
    print(f"ran {sum(len(r) for r in results.values())} cells -> {outdir}")
    if len(config.policies) >= 2:
        report = metrics.compare(results)
        (outdir / "report.json").write_text(report.to_json() + "\n")
        _write_metric_csvs(outdir, report)
        print(report.to_text())
    return EXIT_OK


def cmd_validate(path: str, strict: bool = False) -> int:
    target = Path(path)
    if not target.exists():
        print(f"error: no such file: {path}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if target.suffix == ".json":
            config = _config_from_file(target)
            config.validate()
            print(f"OK, config with {len(config.policies)} policies")
            return EXIT_OK
        jobs = workload.load_trace(str(target), strict=strict)
    except (workload.TraceParseError, ConfigError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    cluster = workload.Cluster(
        1, workload.ResourceVector([8, 8192]), ("vcores", "memory_mb")
    )
    scenario = workload.Scenario(
        cluster=cluster,
        weights=workload.ResourceWeights.ones(2),
        policy=PolicyConfig(kind=PolicyKind.DRF),
        jobs=jobs,
        seed=0,
    )
    findings = workload.validate_scenario(scenario)
    if findings:
        for finding in findings:
            print(f"violation: {finding}", file=sys.stderr)
        return EXIT_DOMAIN
    print(f"OK, {len(jobs)} jobs")
    return EXIT_OK


_SWEEP_DIMENSIONS = ("estimator", "cooling", "node_count", "task_count")


def cmd_sweep(config: ExperimentConfig, dimension: str, values: list[str]) -> int:
    config.validate()
    if dimension not in _SWEEP_DIMENSIONS:
        raise ConfigError(f"sweep dimension must be one of {_SWEEP_DIMENSIONS}")
    if len(values) < 2:
        raise ConfigError("a sweep needs at least two values")
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)

    cell_results: dict[str, dict[str, list[engine.RunResult]]] = {}
    for value in values:
        cell_config = _apply_sweep_value(config, dimension, value)
        label = f"{dimension}={value}"
        cell_results[label] = _execute_grid(
            cell_config, cell_config.policies, cell_config.seeds
        )
    labels = [f"{dimension}={v}" for v in values]
    baseline_label = labels[0]
    for label in labels[1:]:
        merged: dict[str, list[engine.RunResult]] = {}
        for policy in config.policies:
            merged[f"{baseline_label}:{policy}"] = cell_results[baseline_label][policy]
            merged[f"{label}:{policy}"] = cell_results[label][policy]
            report = metrics.compare(merged, baseline=f"{baseline_label}:{policy}")
            safe = re.sub(r"[^A-Za-z0-9_.=-]+", "_", label)
            (outdir / f"sweep_{safe}_{policy}.json").write_text(report.to_json() + "\n")
            print(report.to_text())
            merged.clear()
    print(f"swept {dimension} over {len(values)} values -> {outdir}")
    return EXIT_OK


def _apply_sweep_value(
    config: ExperimentConfig, dimension: str, value: str
) -> ExperimentConfig:
    from dataclasses import replace

    if dimension == "estimator":
        parse_estimator(value, config.k_const)  # fail fast on bad specs
        return replace(config, estimator=value)
    if dimension == "cooling":
        return replace(config, cooling=value)
    if dimension == "node_count":
        return replace(config, nodes=int(value))
    return replace(config, tasks=int(value))


def _config_from_file(path: Path) -> ExperimentConfig:
    raw = json.loads(path.read_text())
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return _merge_config(raw, argparse.Namespace())


_CONFIG_KEYS = {
    "preset", "trace", "generator", "tasks", "users", "cpu_mean", "ram_mean",
    "nodes", "policy", "seeds", "estimator", "cooling", "alpha", "k_const",
    "cold_fraction", "audit", "out", "jobs",
}


def _merge_config(file_values: dict, args: argparse.Namespace) -> ExperimentConfig:
    unknown = set(file_values) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    merged = dict(file_values)
    for key in _CONFIG_KEYS:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
    config = ExperimentConfig()
    for key, value in merged.items():
        if key == "policy":
            config.policies = [p.strip() for p in str(value).split(",") if p.strip()]
        elif key == "seeds":
            config.seeds = parse_seeds(str(value))
        else:
            setattr(config, key, value)
    return config


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--preset", choices=["wordcount"])
    parser.add_argument("--trace", help="line-delimited JSON job trace")
    parser.add_argument("--generator", choices=["uniform", "gaussian"])
    parser.add_argument("--tasks", type=int)
    parser.add_argument("--users", type=int, help="synthetic user-pool size")
    parser.add_argument("--cpu-mean", dest="cpu_mean", type=float)
    parser.add_argument("--ram-mean", dest="ram_mean", type=float)
    parser.add_argument("--nodes", type=int)
    parser.add_argument("--policy", help="comma-separated: fifo,fair,drf,saf")
    parser.add_argument("--seeds", help="'1..20' or '1,2,5'")
    parser.add_argument("--estimator", help="shannon|renyi(a)|hartley|collision|min|tsallis(q)")
    parser.add_argument("--cooling", help="exponential|linear|logarithmic|quadratic")
    parser.add_argument("--alpha", type=float, help="cooling schedule parameter")
    parser.add_argument("--k-const", dest="k_const", type=float)
    parser.add_argument("--cold-fraction", dest="cold_fraction", type=float)
    parser.add_argument("--audit", action="store_const", const=True,
                        help="write decision logs (decisions.ndl)")
    parser.add_argument("--out", help="output directory (default: results)")
    parser.add_argument("--jobs", type=int, help="parallel grid cells")


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    file_values: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise FileNotFoundError(path)
        file_values = json.loads(path.read_text())
        if not isinstance(file_values, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
    return _merge_config(file_values, args)


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        level=getattr(
            logging, os.environ.get("FAIRSCHED_LOG", "WARNING").upper(), logging.WARNING
        )
    )
    parser = argparse.ArgumentParser(
        prog="fairsched",
        description="Deterministic multi-resource scheduling simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="execute a policy x seed grid")
    _add_run_flags(run_parser)

    val_parser = sub.add_parser("validate", help="check a trace or config file")
    val_parser.add_argument("path")
    val_parser.add_argument("--strict", action="store_true",
                            help="reject unknown trace fields")

    sweep_parser = sub.add_parser("sweep", help="sweep one dimension of the grid")
    _add_run_flags(sweep_parser)
    sweep_parser.add_argument("--dimension", required=True, choices=_SWEEP_DIMENSIONS)
    sweep_parser.add_argument("--values", required=True,
                              help="comma-separated sweep values")

    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args.path, strict=args.strict)
        config = _config_from_args(args)
        if args.command == "run":
            return cmd_run(config)
        values = [v.strip() for v in args.values.split(",") if v.strip()]
        return cmd_sweep(config, args.dimension, values)
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (workload.ScenarioValidationError, workload.TraceParseError,
            metrics.SeedPairingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
