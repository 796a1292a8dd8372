"""Per-instance scheduling state and the fairness tests derived from it.

An instance is a schedulable user or job competing for resources. The
needy test and both ratios are always evaluated against the instance's
*dominant* resource, recomputed from current usage on every call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .resources import ResourceVector, ResourceWeights, dominant, shares


@dataclass
class InstanceState:
    """Mutable scheduling state for one instance.

    `usage` reflects currently held resources (the engine may run in
    cumulative mode instead); `per_task_demand` is the request of the
    next pending task. An instance with pending_tasks == 0 must never
    be offered to a policy.
    """

    instance_id: str
    per_task_demand: ResourceVector
    minshare: ResourceVector
    usage: ResourceVector
    pending_tasks: int = 0
    submit_time: float = 0.0

    def __post_init__(self) -> None:
        if self.pending_tasks < 0:
            raise ValueError(f"{self.instance_id}: pending_tasks < 0")


def dominant_resource(
    inst: InstanceState, cluster: ResourceVector, weights: ResourceWeights
) -> int:
    """Resource index with the largest weight-adjusted usage share."""
    index, _ = dominant(shares(inst.usage, cluster), weights)
    return index


def minshare_ratio(
    inst: InstanceState, cluster: ResourceVector, weights: ResourceWeights
) -> float:
    """Usage over minshare on the dominant resource.

    A zero minshare yields +inf: an instance with no minimum guarantee
    never outranks a guaranteed one in the both-needy branch.
    """
    dr = dominant_resource(inst, cluster, weights)
    m = inst.minshare[dr]
    if m == 0:
        return math.inf
    return inst.usage[dr] / m


def dominant_fairshare_ratio(
    inst: InstanceState, cluster: ResourceVector, weights: ResourceWeights
) -> float:
    """Usage / (capacity * weight) on the dominant resource."""
    share_values = shares(inst.usage, cluster)
    dr, ratio = dominant(share_values, weights)
    return ratio


def is_needy(
    inst: InstanceState, cluster: ResourceVector, weights: ResourceWeights
) -> bool:
    """True iff dominant-resource usage is strictly below minshare."""
    dr = dominant_resource(inst, cluster, weights)
    return inst.usage[dr] < inst.minshare[dr]
