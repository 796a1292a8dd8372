"""Scenario and job-population construction.

The synthetic generators assign their single-task jobs round-robin to a
small pool of users: the user is the unit fairness is computed over, and
per-user usage has to accumulate across tasks for the fairness ratios to
differentiate at all. Minshares default to half of a representative
per-task demand, which keeps instances needy only until their first task
or two is running.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .policy import PolicyConfig, PolicyKind
from .resources import ResourceVector, ResourceWeights, fits_within

log = logging.getLogger("fairsched.workload")

#: Default synthetic task durations, seconds.
DEFAULT_MAP_DURATION = 10.0
DEFAULT_REDUCE_DURATION = 15.0
#: Default minshare as a fraction of a representative per-task demand.
DEFAULT_MINSHARE_FRACTION = 0.5
#: Default user-pool size for the synthetic generators.
DEFAULT_USER_COUNT = 10

GAUSSIAN_CPU_STD = 1.16
GAUSSIAN_RAM_STD = 316.6

TRACE_FIELDS = {
    "job_id": str,
    "user": str,
    "submit": (int, float),
    "maps": int,
    "reduces": int,
    "map_req": list,
    "red_req": list,
    "map_dur": (int, float),
    "red_dur": (int, float),
    "minshare": list,
}


class TraceParseError(ValueError):
    """A trace line could not be parsed; message carries the line number."""


class ScenarioValidationError(ValueError):
    """A scenario violates its invariants."""


@dataclass(frozen=True)
class JobSpec:
    job_id: str
    user_id: str
    submit_time: float
    map_count: int
    reduce_count: int
    map_request: ResourceVector | None
    reduce_request: ResourceVector | None
    map_duration: float
    reduce_duration: float
    minshare: ResourceVector


@dataclass(frozen=True)
class Cluster:
    node_count: int
    node_capacity: ResourceVector
    resource_names: tuple[str, ...]

    def total_capacity(self) -> ResourceVector:
        return ResourceVector(q * self.node_count for q in self.node_capacity)


@dataclass
class Scenario:
    cluster: Cluster
    weights: ResourceWeights
    policy: PolicyConfig
    jobs: list[JobSpec]
    seed: int
    heartbeat_interval: float = 1.0
    usage_accounting: str = "live"  # or "cumulative"
    generator_info: dict = field(default_factory=dict)

    def with_policy(self, policy: PolicyConfig) -> "Scenario":
        """Same workload, different policy; jobs are shared, not copied."""
        return replace(self, policy=policy)


def validate_scenario(scenario: Scenario) -> list[str]:
    """All invariant violations, empty when the scenario is clean."""
    findings: list[str] = []
    k = len(scenario.cluster.node_capacity)
    if scenario.cluster.node_count < 1:
        findings.append("cluster needs at least one node")
    if len(scenario.cluster.resource_names) != k:
        findings.append("resource_names length does not match node capacity")
    if len(scenario.weights) != k:
        findings.append("weights length does not match node capacity")
    if scenario.heartbeat_interval <= 0:
        findings.append("heartbeat_interval must be positive")
    if scenario.usage_accounting not in ("live", "cumulative"):
        findings.append(f"unknown usage_accounting {scenario.usage_accounting!r}")
    seen_ids: set[str] = set()
    for job in scenario.jobs:
        findings.extend(_job_findings(job, k, scenario.cluster.node_capacity))
        if job.job_id in seen_ids:
            findings.append(f"{job.job_id}: duplicate job id")
        seen_ids.add(job.job_id)
    return findings


def _job_findings(job: JobSpec, k: int, node_capacity: ResourceVector) -> list[str]:
    findings: list[str] = []
    if job.map_count < 0 or job.reduce_count < 0:
        findings.append(f"{job.job_id}: negative task count")
        return findings
    if job.map_count + job.reduce_count == 0:
        findings.append(f"{job.job_id}: no tasks")
    if len(job.minshare) != k:
        findings.append(f"{job.job_id}: minshare length != {k}")
    for phase, count, request, duration in (
        ("map", job.map_count, job.map_request, job.map_duration),
        ("reduce", job.reduce_count, job.reduce_request, job.reduce_duration),
    ):
        if count == 0:
            continue
        if request is None:
            findings.append(f"{job.job_id}: {phase} phase has no request")
            continue
        if len(request) != k:
            findings.append(f"{job.job_id}: {phase} request length != {k}")
            continue
        if any(q <= 0 for q in request):
            findings.append(f"{job.job_id}: {phase} request must be positive")
        if duration <= 0:
            findings.append(f"{job.job_id}: {phase} duration must be positive")
        if not fits_within(request, node_capacity):
            findings.append(
                f"{job.job_id}: {phase} request {request.quantities} exceeds "
                f"node capacity {node_capacity.quantities}"
            )
    return findings


def ensure_valid(scenario: Scenario) -> Scenario:
    findings = validate_scenario(scenario)
    if findings:
        raise ScenarioValidationError("; ".join(findings))
    return scenario


def wordcount_preset(
    node_count: int,
    policy: PolicyConfig | None = None,
    seed: int = 0,
    minshare_fraction: float = DEFAULT_MINSHARE_FRACTION,
) -> Scenario:
    """Four Wordcount-style jobs on nodes of 8 vcores / 8 GB.

    Each job runs 31 maps then 5 reduces; map requests climb from 2 to 5
    vcores at 1 GB each.
    """
    if node_count < 1:
        raise ScenarioValidationError("node_count must be >= 1")
    map_reqs = [(2, 1), (3, 1), (4, 1), (5, 1)]
    red_reqs = [(2, 1), (2, 1), (3, 1), (3, 1)]
    jobs = []
    for i, (map_req, red_req) in enumerate(zip(map_reqs, red_reqs), start=1):
        request = ResourceVector(map_req)
        jobs.append(
            JobSpec(
                job_id=f"job{i}",
                user_id=f"user{i}",
                submit_time=0.0,
                map_count=31,
                reduce_count=5,
                map_request=request,
                reduce_request=ResourceVector(red_req),
                map_duration=DEFAULT_MAP_DURATION,
                reduce_duration=DEFAULT_REDUCE_DURATION,
                minshare=ResourceVector(q * minshare_fraction for q in request),
            )
        )
    scenario = Scenario(
        cluster=Cluster(node_count, ResourceVector([8, 8]), ("vcores", "memory_gb")),
        weights=ResourceWeights.ones(2),
        policy=policy or PolicyConfig(kind=PolicyKind.DRF),
        jobs=jobs,
        seed=seed,
    )
    return ensure_valid(scenario)


def _default_cluster(node_count: int) -> Cluster:
    return Cluster(node_count, ResourceVector([8, 8192]), ("vcores", "memory_mb"))


def generate_uniform(
    n_tasks: int,
    seed: int,
    cluster: Cluster | None = None,
    *,
    n_users: int = DEFAULT_USER_COUNT,
    minshare_fraction: float = DEFAULT_MINSHARE_FRACTION,
    duration: float = DEFAULT_MAP_DURATION,
    policy: PolicyConfig | None = None,
) -> Scenario:
    """Single-task jobs with CPU ~ U{1..8} and RAM ~ U[100, 2000] MB."""
    if n_tasks < 1:
        raise ScenarioValidationError("n_tasks must be >= 1")
    cluster = cluster or _default_cluster(16)
    rng = np.random.default_rng(seed)
    cpus = rng.integers(1, 9, size=n_tasks)
    rams = rng.integers(100, 2001, size=n_tasks)
    jobs = _single_task_jobs(cpus, rams, n_users, minshare_fraction, duration)
    scenario = Scenario(
        cluster=cluster,
        weights=ResourceWeights.ones(2),
        policy=policy or PolicyConfig(kind=PolicyKind.DRF),
        jobs=jobs,
        seed=seed,
        generator_info={"generator": "uniform", "n_tasks": n_tasks, "n_users": n_users},
    )
    return ensure_valid(scenario)


def generate_gaussian(
    n_tasks: int,
    seed: int,
    cpu_mean: float,
    ram_mean: float,
    cluster: Cluster | None = None,
    *,
    cpu_std: float = GAUSSIAN_CPU_STD,
    ram_std: float = GAUSSIAN_RAM_STD,
    n_users: int = DEFAULT_USER_COUNT,
    minshare_fraction: float = DEFAULT_MINSHARE_FRACTION,
    duration: float = DEFAULT_MAP_DURATION,
    policy: PolicyConfig | None = None,
) -> Scenario:
    """Single-task jobs with normally distributed demands.

    CPU draws are clamped to [1, 8] then rounded to integers; RAM draws
    are clamped to [100, 2000]. Pre-clamp sample statistics are kept in
    `generator_info` so the raw distribution stays checkable.
    """
    if n_tasks < 1:
        raise ScenarioValidationError("n_tasks must be >= 1")
    cluster = cluster or _default_cluster(16)
    rng = np.random.default_rng(seed)
    raw_cpu = rng.normal(cpu_mean, cpu_std, size=n_tasks)
    raw_ram = rng.normal(ram_mean, ram_std, size=n_tasks)
    cpus = np.rint(np.clip(raw_cpu, 1, 8)).astype(int)
    rams = np.rint(np.clip(raw_ram, 100, 2000)).astype(int)
    jobs = _single_task_jobs(cpus, rams, n_users, minshare_fraction, duration)
    scenario = Scenario(
        cluster=cluster,
        weights=ResourceWeights.ones(2),
        policy=policy or PolicyConfig(kind=PolicyKind.DRF),
        jobs=jobs,
        seed=seed,
        generator_info={
            "generator": "gaussian",
            "n_tasks": n_tasks,
            "n_users": n_users,
            "pre_clamp_cpu_mean": float(np.mean(raw_cpu)),
            "pre_clamp_cpu_std": float(np.std(raw_cpu)),
            "pre_clamp_ram_mean": float(np.mean(raw_ram)),
            "pre_clamp_ram_std": float(np.std(raw_ram)),
        },
    )
    return ensure_valid(scenario)


def _single_task_jobs(
    cpus: Sequence[int],
    rams: Sequence[int],
    n_users: int,
    minshare_fraction: float,
    duration: float,
) -> list[JobSpec]:
    jobs = []
    for i, (cpu, ram) in enumerate(zip(cpus, rams)):
        request = ResourceVector([int(cpu), int(ram)])
        jobs.append(
            JobSpec(
                job_id=f"job{i:04d}",
                user_id=f"u{i % n_users:03d}",
                submit_time=0.0,
                map_count=1,
                reduce_count=0,
                map_request=request,
                reduce_request=None,
                map_duration=duration,
                reduce_duration=DEFAULT_REDUCE_DURATION,
                minshare=ResourceVector(q * minshare_fraction for q in request),
            )
        )
    return jobs


def load_trace(path: str, strict: bool = False) -> list[JobSpec]:
    """Parse a line-delimited JSON trace into job specs."""
    jobs: list[JobSpec] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            jobs.append(_parse_trace_line(line, lineno, strict))
    return jobs


def _parse_trace_line(line: str, lineno: int, strict: bool) -> JobSpec:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise TraceParseError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(record, dict):
        raise TraceParseError(f"line {lineno}: expected an object")
    unknown = set(record) - set(TRACE_FIELDS)
    if unknown:
        message = f"line {lineno}: unknown fields {sorted(unknown)}"
        if strict:
            raise TraceParseError(message)
        log.warning("%s (ignored)", message)
    for name, types in TRACE_FIELDS.items():
        if name in ("red_req",) and record.get("reduces", 0) == 0:
            continue
        if name not in record:
            raise TraceParseError(f"line {lineno}: missing field {name!r}")
        if not isinstance(record[name], types) or isinstance(record[name], bool):
            raise TraceParseError(f"line {lineno}: field {name!r} has wrong type")
    if record["maps"] < 0 or record["reduces"] < 0:
        raise TraceParseError(f"line {lineno}: negative task count")
    try:
        return JobSpec(
            job_id=record["job_id"],
            user_id=record["user"],
            submit_time=float(record["submit"]),
            map_count=record["maps"],
            reduce_count=record["reduces"],
            map_request=_vector_or_none(record.get("map_req"), record["maps"]),
            reduce_request=_vector_or_none(record.get("red_req"), record["reduces"]),
            map_duration=float(record["map_dur"]),
            reduce_duration=float(record["red_dur"]),
            minshare=ResourceVector(record["minshare"]),
        )
    except ValueError as exc:
        raise TraceParseError(f"line {lineno}: {exc}") from exc


def _vector_or_none(values: Iterable[float] | None, count: int) -> ResourceVector | None:
    if count == 0 or values is None:
        return None
    return ResourceVector(values)


def scenario_from_trace(
    path: str,
    cluster: Cluster,
    policy: PolicyConfig | None = None,
    seed: int = 0,
    strict: bool = False,
) -> Scenario:
    scenario = Scenario(
        cluster=cluster,
        weights=ResourceWeights.ones(len(cluster.node_capacity)),
        policy=policy or PolicyConfig(kind=PolicyKind.DRF),
        jobs=load_trace(path, strict=strict),
        seed=seed,
    )
    return ensure_valid(scenario)
