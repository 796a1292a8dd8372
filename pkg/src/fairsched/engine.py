"""Deterministic discrete-event simulation of heartbeat-driven scheduling.

Every node is offered work once per heartbeat tick (nodes visited in id
order) and immediately again whenever one of its tasks completes, so a
released slot never waits for the next tick. Events at equal timestamps
process completions first, then submissions, then heartbeats; within a
kind, insertion order decides. Two runs of the same scenario and seed
produce identical results except for the wall-clock allocation cost.
"""

from __future__ import annotations

import hashlib
import heapq
import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .instances import InstanceState
from .policy import DecisionRecord, PolicySelector, fitness
from .resources import ResourceVector, ResourceWeights, add, checked_sub, fits_within
from .workload import JobSpec, Scenario, ensure_valid

_PRIO_TASK_COMPLETE = 0
_PRIO_JOB_SUBMIT = 1
_PRIO_HEARTBEAT = 2

_CONSERVATION_TOL = 1e-9


@dataclass(frozen=True)
class TaskTemplate:
    job_id: str
    kind: str  # "map" or "reduce"
    index: int
    request: ResourceVector
    duration: float

    @property
    def task_id(self) -> str:
        return f"{self.job_id}.{self.kind[0]}{self.index}"


@dataclass(frozen=True)
class RunningTask:
    task_id: str
    instance_id: str
    job_id: str
    kind: str
    request: ResourceVector
    completion_time: float


@dataclass
class Node:
    node_id: str
    capacity: ResourceVector
    residual: ResourceVector
    running: dict[str, RunningTask] = field(default_factory=dict)


class JobProgress:
    """Tracks one job's phase gate and completion."""

    def __init__(self, spec: JobSpec) -> None:
        self.spec = spec
        self.completed_maps = 0
        self.completed_reduces = 0
        self.maps_released = False
        self.reduces_released = False

    def runnable_templates(self) -> list[TaskTemplate]:
        """Templates the phase gate releases right now.

        Maps are runnable at submission; reduces only once every map of
        the job has completed (immediately, for a job with no maps).
        Each call releases a phase at most once.
        """
        spec = self.spec
        out: list[TaskTemplate] = []
        if spec.map_count > 0 and not self.maps_released:
            self.maps_released = True
            out.extend(
                TaskTemplate(spec.job_id, "map", i, spec.map_request, spec.map_duration)
                for i in range(spec.map_count)
            )
        if (
            spec.reduce_count > 0
            and not self.reduces_released
            and self.completed_maps == spec.map_count
        ):
            self.reduces_released = True
            out.extend(
                TaskTemplate(
                    spec.job_id, "reduce", i, spec.reduce_request, spec.reduce_duration
                )
                for i in range(spec.reduce_count)
            )
        return out

    @property
    def done(self) -> bool:
        return (
            self.completed_maps == self.spec.map_count
            and self.completed_reduces == self.spec.reduce_count
        )


def phase_gate(progress: JobProgress) -> list[TaskTemplate]:
    """Release the tasks the job's map/reduce gate currently allows."""
    return progress.runnable_templates()


class SimInstance:
    """One schedulable user: fairness state plus its queue of next tasks."""

    def __init__(self, instance_id: str, k: int, submit_time: float) -> None:
        self.state = InstanceState(
            instance_id=instance_id,
            per_task_demand=ResourceVector.zeros(k),
            minshare=ResourceVector.zeros(k),
            usage=ResourceVector.zeros(k),
            pending_tasks=0,
            submit_time=submit_time,
        )
        self.queue: deque[TaskTemplate] = deque()

    def enqueue(self, templates: Iterable[TaskTemplate]) -> None:
        self.queue.extend(templates)
        self._sync()

    def pop_next(self) -> TaskTemplate:
        template = self.queue.popleft()
        self._sync()
        return template

    def _sync(self) -> None:
        self.state.pending_tasks = len(self.queue)
        if self.queue:
            self.state.per_task_demand = self.queue[0].request
        else:
            self.state.per_task_demand = ResourceVector.zeros(len(self.state.usage))


@dataclass(frozen=True)
class RunResult:
    """Everything observable about one finished simulation."""

    policy: str
    seed: int
    makespan: float
    usage_series: tuple[tuple[float, tuple[float, ...]], ...]
    allocation_time_cost_ms: float
    decisions: tuple[DecisionRecord, ...]
    job_completion_times: dict[str, float]
    resource_names: tuple[str, ...]
    cluster_capacity: tuple[float, ...]

    def trace(self) -> tuple[tuple[float, str, str], ...]:
        """(time, node, chosen instance) triples; policy-comparable."""
        return tuple((d.time, d.node_id, d.chosen) for d in self.decisions)

    def usage_csv(self) -> str:
        header = "time_s," + ",".join(self.resource_names)
        lines = [header]
        for t, alloc in self.usage_series:
            lines.append(",".join([repr(float(t))] + [repr(float(a)) for a in alloc]))
        return "\n".join(lines) + "\n"

    def decisions_ndl(self) -> str:
        return "".join(d.to_json_line() + "\n" for d in self.decisions)

    def summary_dict(self) -> dict:
        from .metrics import usage_over_time

        averages = usage_over_time(self.usage_series, self.makespan)
        return {
            "policy": self.policy,
            "seed": self.seed,
            "makespan_s": self.makespan,
            "usage_over_time": dict(zip(self.resource_names, averages)),
            # wall-clock: host-dependent, excluded from determinism guarantees
            "allocation_time_cost_ms": self.allocation_time_cost_ms,
            "jobs_completed": len(self.job_completion_times),
            "job_completion_times": dict(sorted(self.job_completion_times.items())),
            "decision_count": len(self.decisions),
        }


def derive_draw_seed(seed: int, policy_name: str) -> int:
    """Stable per-policy seed for acceptance draws.

    Policies must see identical workloads (the scenario seed) but draw
    from independent streams.
    """
    digest = hashlib.blake2b(
        f"{seed}:{policy_name}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big")


class Simulation:
    """Mutable state for one run; use run() unless a test needs surgery."""

    def __init__(self, scenario: Scenario) -> None:
        ensure_valid(scenario)
        self.scenario = scenario
        k = len(scenario.cluster.node_capacity)
        self.k = k
        width = max(3, len(str(scenario.cluster.node_count - 1)))
        self.nodes = [
            Node(
                node_id=f"n{i:0{width}d}",
                capacity=scenario.cluster.node_capacity,
                residual=scenario.cluster.node_capacity,
            )
            for i in range(scenario.cluster.node_count)
        ]
        self.cluster_capacity = scenario.cluster.total_capacity()
        self.weights = scenario.weights
        self.selector = PolicySelector(
            scenario.policy,
            self.cluster_capacity,
            self.weights,
            seed=derive_draw_seed(scenario.seed, scenario.policy.kind.value),
        )
        self.instances: dict[str, SimInstance] = {}
        self.jobs: dict[str, JobProgress] = {}
        self.live_usage = scenario.usage_accounting == "live"
        self.decisions: list[DecisionRecord] = []
        self.usage_series: list[tuple[float, tuple[float, ...]]] = []
        self.job_completion_times: dict[str, float] = {}
        self.allocation_seconds = 0.0
        self.tasks_remaining = sum(
            j.map_count + j.reduce_count for j in scenario.jobs
        )
        self._events: list[tuple[float, int, int, object]] = []
        self._seq = 0
        self._heartbeat_armed = False
        self._start = 0.0
        self.now = 0.0

    # -- event plumbing ------------------------------------------------

    def _push(self, when: float, priority: int, payload: object) -> None:
        heapq.heappush(self._events, (when, priority, self._seq, payload))
        self._seq += 1

    def _queued_tasks(self) -> bool:
        return any(i.state.pending_tasks > 0 for i in self.instances.values())

    def _arm_heartbeat(self, strictly_after: bool = False) -> None:
        """Schedule the next aligned tick; idle ticks are never queued.

        The chain sleeps while nothing is pending and is re-armed by the
        events that can create pending work (submission, phase gate).
        The heartbeat handler itself re-arms strictly after its own tick.
        """
        if self._heartbeat_armed:
            return
        interval = self.scenario.heartbeat_interval
        n = math.ceil((self.now - self._start) / interval - 1e-12)
        when = self._start + max(n, 0) * interval
        if when < self.now or (strictly_after and when <= self.now):
            when += interval
        self._heartbeat_armed = True
        self._push(when, _PRIO_HEARTBEAT, "heartbeat")

    def _sample_usage(self) -> None:
        allocated = tuple(
            sum(node.capacity[q] - node.residual[q] for node in self.nodes)
            for q in range(self.k)
        )
        if self.usage_series and self.usage_series[-1][0] == self.now:
            self.usage_series[-1] = (self.now, allocated)
        else:
            self.usage_series.append((self.now, allocated))

    def _check_conservation(self) -> None:
        for q in range(self.k):
            held = sum(n.capacity[q] - n.residual[q] for n in self.nodes)
            used = sum(
                rt.request[q] for n in self.nodes for rt in n.running.values()
            )
            assert abs(held - used) <= _CONSERVATION_TOL * max(1.0, held), (
                f"conservation violated on resource {q}: held {held} != {used}"
            )

    def _fitness_population(self) -> list[float]:
        return [
            fitness(rt.request, node.residual, self.weights)
            for node in self.nodes
            for rt in node.running.values()
        ]

    # -- event handlers --------------------------------------------------

    def _handle_submit(self, job: JobSpec) -> None:
        inst = self.instances.get(job.user_id)
        if inst is None:
            inst = SimInstance(job.user_id, self.k, job.submit_time)
            self.instances[job.user_id] = inst
        else:
            inst.state.submit_time = min(inst.state.submit_time, job.submit_time)
        inst.state.minshare = ResourceVector(
            max(m, j) for m, j in zip(inst.state.minshare, job.minshare)
        )
        progress = JobProgress(job)
        self.jobs[job.job_id] = progress
        inst.enqueue(phase_gate(progress))
        if inst.state.pending_tasks > 0:
            self._arm_heartbeat()

    def _handle_complete(self, task: RunningTask, node: Node) -> None:
        del node.running[task.task_id]
        node.residual = add(node.residual, task.request)
        inst = self.instances[task.instance_id]
        if self.live_usage:
            inst.state.usage = checked_sub(inst.state.usage, task.request)
        progress = self.jobs[task.job_id]
        if task.kind == "map":
            progress.completed_maps += 1
            if progress.completed_maps == progress.spec.map_count:
                inst.enqueue(phase_gate(progress))
        else:
            progress.completed_reduces += 1
        self.tasks_remaining -= 1
        if progress.done:
            self.job_completion_times[task.job_id] = self.now
        self._check_conservation()
        self._sample_usage()
        self.schedule_round(node)
        if self._queued_tasks():
            self._arm_heartbeat()

    def schedule_round(self, node: Node) -> int:
        """Offer the node to the policy until nothing pending fits.

        Returns the number of allocations made.
        """
        made = 0
        while True:
            candidates = [
                inst.state
                for inst in self.instances.values()
                if inst.state.pending_tasks > 0
                and fits_within(inst.state.per_task_demand, node.residual)
            ]
            if not candidates:
                return made
            started = time.perf_counter()
            winner, record = self.selector.select(
                candidates, node.node_id, self.now, self._fitness_population
            )
            self.allocation_seconds += time.perf_counter() - started
            self.decisions.append(record)
            self._allocate(self.instances[winner.instance_id], node)
            made += 1

    def _allocate(self, inst: SimInstance, node: Node) -> None:
        template = inst.pop_next()
        node.residual = checked_sub(node.residual, template.request)
        completion = self.now + template.duration
        running = RunningTask(
            task_id=template.task_id,
            instance_id=inst.state.instance_id,
            job_id=template.job_id,
            kind=template.kind,
            request=template.request,
            completion_time=completion,
        )
        node.running[template.task_id] = running
        inst.state.usage = add(inst.state.usage, template.request)
        self._push(completion, _PRIO_TASK_COMPLETE, (running, node))
        self._check_conservation()
        self._sample_usage()

    # -- main loop -------------------------------------------------------

    def run(self) -> RunResult:
        scenario = self.scenario
        for job in scenario.jobs:
            self._push(job.submit_time, _PRIO_JOB_SUBMIT, job)
        start = min((j.submit_time for j in scenario.jobs), default=0.0)
        self._start = start
        if scenario.jobs:
            self.now = start
            self._sample_usage()
        while self._events:
            when, priority, _, payload = heapq.heappop(self._events)
            self.now = when
            if priority == _PRIO_TASK_COMPLETE:
                running, node = payload  # type: ignore[misc]
                self._handle_complete(running, node)
            elif priority == _PRIO_JOB_SUBMIT:
                self._handle_submit(payload)  # type: ignore[arg-type]
            else:
                self._heartbeat_armed = False
                for node in self.nodes:
                    self.schedule_round(node)
                if self._queued_tasks():
                    self._arm_heartbeat(strictly_after=True)
        end = max(self.job_completion_times.values(), default=start)
        makespan = end - start if scenario.jobs else 0.0
        return RunResult(
            policy=scenario.policy.kind.value,
            seed=scenario.seed,
            makespan=makespan,
            usage_series=tuple(self.usage_series),
            allocation_time_cost_ms=self.allocation_seconds * 1000.0,
            decisions=tuple(self.decisions),
            job_completion_times=dict(self.job_completion_times),
            resource_names=scenario.cluster.resource_names,
            cluster_capacity=scenario.cluster.total_capacity().quantities,
        )


def run(scenario: Scenario) -> RunResult:
    """Simulate the scenario to quiescence."""
    return Simulation(scenario).run()
