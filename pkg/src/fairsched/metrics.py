"""Post-run metric computation and cross-policy comparison.

"Usage over time" is the time-averaged allocated amount of each resource
across the run: the step integral of the allocation series divided by
the makespan. Comparisons pair runs by seed so directional tests are
paired, not pooled.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

if TYPE_CHECKING:
    from .engine import RunResult

UsageSeries = Sequence[tuple[float, tuple[float, ...]]]


class SeedPairingError(ValueError):
    """Policies under comparison were not run on matching seeds."""


def usage_over_time(series: UsageSeries, makespan: float) -> tuple[float, ...]:
    """Per-resource time average of a piecewise-constant allocation series."""
    if not series or makespan <= 0:
        k = len(series[0][1]) if series else 0
        return (0.0,) * k
    k = len(series[0][1])
    totals = [0.0] * k
    for (t0, alloc), (t1, _) in zip(series, series[1:]):
        dt = t1 - t0
        for q in range(k):
            totals[q] += alloc[q] * dt
    end = series[0][0] + makespan
    last_t, last_alloc = series[-1]
    if end > last_t:
        for q in range(k):
            totals[q] += last_alloc[q] * (end - last_t)
    return tuple(total / makespan for total in totals)


def percent_change(baseline: float, treatment: float) -> float:
    """(treatment - baseline) / baseline * 100."""
    if baseline == 0:
        raise ZeroDivisionError("percent change is undefined for a zero baseline")
    return (treatment - baseline) / baseline * 100.0


@dataclass(frozen=True)
class MetricComparison:
    metric: str
    baseline_mean: float
    treatment_mean: float
    baseline_std: float
    treatment_std: float
    mean_percent_change: float
    paired_percent_changes: tuple[tuple[int, float], ...]  # (seed, %)


@dataclass(frozen=True)
class ComparisonReport:
    baseline_policy: str
    policies: tuple[str, ...]
    comparisons: dict[str, tuple[MetricComparison, ...]]

    def to_dict(self) -> dict:
        return {
            "baseline_policy": self.baseline_policy,
            "policies": list(self.policies),
            "comparisons": {
                policy: [
                    {
                        "metric": m.metric,
                        "baseline_mean": m.baseline_mean,
                        "treatment_mean": m.treatment_mean,
                        "baseline_std": m.baseline_std,
                        "treatment_std": m.treatment_std,
                        "mean_percent_change": m.mean_percent_change,
                        "paired_percent_changes": [
                            {"seed": seed, "percent": pct}
                            for seed, pct in m.paired_percent_changes
                        ],
                    }
                    for m in metrics
                ]
                for policy, metrics in self.comparisons.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [f"baseline policy: {self.baseline_policy}"]
        for policy, metrics in self.comparisons.items():
            lines.append(f"\n{policy} vs {self.baseline_policy}:")
            lines.append(
                f"  {'metric':<28} {'baseline':>12} {'treatment':>12} {'change':>9}"
            )
            for m in metrics:
                lines.append(
                    f"  {m.metric:<28} {m.baseline_mean:>12.4f} "
                    f"{m.treatment_mean:>12.4f} {m.mean_percent_change:>+8.1f}%"
                )
        return "\n".join(lines) + "\n"


def _metric_values(results: Sequence["RunResult"]) -> dict[str, list[float]]:
    values: dict[str, list[float]] = {"makespan_s": [], "allocation_time_cost_ms": []}
    for result in results:
        values["makespan_s"].append(result.makespan)
        values["allocation_time_cost_ms"].append(result.allocation_time_cost_ms)
        averages = usage_over_time(result.usage_series, result.makespan)
        for name, value in zip(result.resource_names, averages):
            values.setdefault(f"usage_over_time[{name}]", []).append(value)
    return values


def compare(
    results: Mapping[str, Sequence["RunResult"]], baseline: str | None = None
) -> ComparisonReport:
    """Paired-by-seed comparison of every policy against a baseline."""
    if not results:
        raise ValueError("nothing to compare")
    policies = tuple(results)
    if baseline is None:
        baseline = "drf" if "drf" in results else policies[0]
    if baseline not in results:
        raise ValueError(f"baseline policy {baseline!r} has no results")

    by_seed: dict[str, dict[int, "RunResult"]] = {}
    base_seeds = sorted(r.seed for r in results[baseline])
    for policy, runs in results.items():
        seeds = sorted(r.seed for r in runs)
        if seeds != base_seeds:
            missing = set(base_seeds).symmetric_difference(seeds)
            raise SeedPairingError(
                f"policy {policy!r} and {baseline!r} differ on seeds {sorted(missing)}"
            )
        by_seed[policy] = {r.seed: r for r in runs}

    ordered_base = [by_seed[baseline][s] for s in base_seeds]
    base_metrics = _metric_values(ordered_base)
    comparisons: dict[str, tuple[MetricComparison, ...]] = {}
    for policy in policies:
        if policy == baseline:
            continue
        ordered = [by_seed[policy][s] for s in base_seeds]
        treat_metrics = _metric_values(ordered)
        rows = []
        for metric, base_values in base_metrics.items():
            treat_values = treat_metrics[metric]
            base_mean = statistics.fmean(base_values)
            treat_mean = statistics.fmean(treat_values)
            paired = tuple(
                (seed, percent_change(b, t))
                for seed, b, t in zip(base_seeds, base_values, treat_values)
                if b != 0
            )
            rows.append(
                MetricComparison(
                    metric=metric,
                    baseline_mean=base_mean,
                    treatment_mean=treat_mean,
                    baseline_std=statistics.pstdev(base_values),
                    treatment_std=statistics.pstdev(treat_values),
                    mean_percent_change=(
                        percent_change(base_mean, treat_mean) if base_mean else 0.0
                    ),
                    paired_percent_changes=paired,
                )
            )
        comparisons[policy] = tuple(rows)
    return ComparisonReport(
        baseline_policy=baseline, policies=policies, comparisons=comparisons
    )
