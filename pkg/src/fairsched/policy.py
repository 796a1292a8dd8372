"""Scheduling decision kernels: FIFO, Fair, DRF and SAF.

DRF and SAF reduce a candidate set by a pairwise tournament: the current
winner is compared against the next candidate in order. On equal ratios
the comparison yields the *second* instance, which is what makes SAF's
zero-gap acceptance (p = 1) coincide with DRF on ties and lets the two
policies produce identical traces when the temperature is frozen.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

from .cooling import AnnealingState, CoolingConfig, reheat, step
from .entropy import EstimatorConfig
from .instances import (
    InstanceState,
    dominant_fairshare_ratio,
    is_needy,
    minshare_ratio,
)
from .resources import ResourceVector, ResourceWeights, shares

BRANCH_BOTH_NEEDY = "both-needy"
BRANCH_A_NEEDY = "a-needy"
BRANCH_B_NEEDY = "b-needy"
BRANCH_BOTH_NOT_NEEDY = "both-not-needy"
BRANCH_SAF_DELTA_NEG = "saf-delta-negative"
BRANCH_ONLY_CANDIDATE = "only-candidate"
BRANCH_FIFO = "fifo-earliest"
BRANCH_FAIR = "fair-lowest-share"

FitnessPopulation = Callable[[], Sequence[float]]


class NoCandidatesError(ValueError):
    """select() was offered an empty candidate set."""


class PolicyKind(enum.Enum):
    FIFO = "fifo"
    FAIR = "fair"
    DRF = "drf"
    SAF = "saf"


@dataclass(frozen=True)
class SafConfig:
    """Annealing knobs for the SAF policy.

    `pin_temperature` freezes T at the given value and disables cooling
    and reheating entirely; used for sensitivity runs and the
    degenerates-to-DRF check.
    """

    estimator: EstimatorConfig = EstimatorConfig()
    cooling: CoolingConfig = CoolingConfig()
    pin_temperature: float | None = None


@dataclass(frozen=True)
class PolicyConfig:
    kind: PolicyKind = PolicyKind.DRF
    saf: SafConfig | None = None

    def __post_init__(self) -> None:
        if self.kind is PolicyKind.SAF and self.saf is None:
            object.__setattr__(self, "saf", SafConfig())
        elif self.kind is not PolicyKind.SAF and self.saf is not None:
            raise ValueError("saf settings are only valid when kind is SAF")


@dataclass(frozen=True)
class CandidateSnapshot:
    instance_id: str
    needy: bool
    minshare_ratio: float
    dominant_fairshare_ratio: float


@dataclass(frozen=True)
class DecisionRecord:
    """Audit record for one select() call.

    The probabilistic fields describe the final pairwise comparison that
    produced `chosen`; for a both-not-needy SAF comparison, probability
    = exp(-delta_fairshare / temperature) is recomputable from the
    record.
    """

    time: float
    node_id: str
    candidates: tuple[CandidateSnapshot, ...]
    branch: str
    chosen: str
    probability: float | None = None
    draw: float | None = None
    temperature: float | None = None
    delta_fairshare: float | None = None

    def to_json_line(self) -> str:
        payload = asdict(self)
        for snap in payload["candidates"]:
            if math.isinf(snap["minshare_ratio"]):
                snap["minshare_ratio"] = "inf"
        return json.dumps(payload, separators=(",", ":"))


def fitness(
    task_demand: ResourceVector,
    node_residual: ResourceVector,
    weights: ResourceWeights,
) -> float:
    """Alignment of a task's demand with a node's residual capacity."""
    task_demand._check_len(node_residual)
    return math.fsum(
        r * c * w for r, c, w in zip(task_demand, node_residual, weights.weights)
    )


def drf_compare(
    a: InstanceState,
    b: InstanceState,
    cluster: ResourceVector,
    weights: ResourceWeights,
) -> tuple[InstanceState, str]:
    """Pick one of two instances per the DRF rules."""
    a_needy = is_needy(a, cluster, weights)
    b_needy = is_needy(b, cluster, weights)
    if a_needy and b_needy:
        a_ratio = minshare_ratio(a, cluster, weights)
        b_ratio = minshare_ratio(b, cluster, weights)
        return (a if a_ratio < b_ratio else b), BRANCH_BOTH_NEEDY
    if a_needy:
        return a, BRANCH_A_NEEDY
    if b_needy:
        return b, BRANCH_B_NEEDY
    a_fair = dominant_fairshare_ratio(a, cluster, weights)
    b_fair = dominant_fairshare_ratio(b, cluster, weights)
    return (a if a_fair < b_fair else b), BRANCH_BOTH_NOT_NEEDY


@dataclass(frozen=True)
class SafOutcome:
    chosen: InstanceState
    branch: str
    state: AnnealingState | None
    probability: float | None = None
    draw: float | None = None
    temperature: float | None = None
    delta_fairshare: float | None = None


def saf_compare(
    a: InstanceState,
    b: InstanceState,
    cluster: ResourceVector,
    weights: ResourceWeights,
    annealing: AnnealingState | None,
    rng: Callable[[], float],
    *,
    estimator: EstimatorConfig,
    cooling: CoolingConfig,
    fitness_population: FitnessPopulation = tuple,
    advance_state: bool = True,
) -> SafOutcome:
    """Pick one of two instances per the SAF rules.

    The needy branches are exactly DRF. In the both-not-needy branch a
    negative fairness gap picks `b` outright without touching the rng
    or the temperature; otherwise `b` is accepted with probability
    exp(-gap/T), after which the temperature takes one cooling cycle or,
    once at the cold threshold, is recomputed from the fitness of the
    currently running tasks. A None `annealing` is initialized from that
    same population on first use.
    """
    a_needy = is_needy(a, cluster, weights)
    b_needy = is_needy(b, cluster, weights)
    if a_needy and b_needy:
        a_ratio = minshare_ratio(a, cluster, weights)
        b_ratio = minshare_ratio(b, cluster, weights)
        return SafOutcome(a if a_ratio < b_ratio else b, BRANCH_BOTH_NEEDY, annealing)
    if a_needy:
        return SafOutcome(a, BRANCH_A_NEEDY, annealing)
    if b_needy:
        return SafOutcome(b, BRANCH_B_NEEDY, annealing)

    if annealing is None:
        annealing = AnnealingState.from_population(
            fitness_population(), estimator, cooling
        )
    delta = dominant_fairshare_ratio(b, cluster, weights) - dominant_fairshare_ratio(
        a, cluster, weights
    )
    if delta < 0:
        return SafOutcome(
            b, BRANCH_SAF_DELTA_NEG, annealing, delta_fairshare=delta,
            temperature=annealing.T,
        )
    temp = annealing.T
    probability = math.exp(-delta / temp)
    draw = rng()
    chosen = b if probability > draw else a
    state = annealing
    if advance_state:
        if state.T > state.cold_temperature:
            state = step(state, cooling)
        else:
            state = reheat(state, fitness_population(), estimator)
    return SafOutcome(
        chosen,
        BRANCH_BOTH_NOT_NEEDY,
        state,
        probability=probability,
        draw=draw,
        temperature=temp,
        delta_fairshare=delta,
    )


class PolicySelector:
    """Stateful policy evaluation for one simulation run.

    Owns the seeded rng for acceptance draws and the annealing state,
    both of which persist across scheduling rounds for the whole run.
    """

    def __init__(
        self,
        config: PolicyConfig,
        cluster: ResourceVector,
        weights: ResourceWeights,
        seed: int,
    ) -> None:
        import random

        self.config = config
        self.cluster = cluster
        self.weights = weights
        self._rng = random.Random(seed)
        self.annealing: AnnealingState | None = None
        if config.kind is PolicyKind.SAF:
            assert config.saf is not None
            pin = config.saf.pin_temperature
            if pin is not None:
                self.annealing = AnnealingState(
                    T0=pin,
                    T=pin,
                    cold_temperature=0.0,
                    cold_fraction=config.saf.cooling.cold_fraction,
                )

    def select(
        self,
        candidates: Sequence[InstanceState],
        node_id: str,
        now: float,
        fitness_population: FitnessPopulation = tuple,
    ) -> tuple[InstanceState, DecisionRecord]:
        """Reduce the candidate set to one winner plus an audit record."""
        if not candidates:
            raise NoCandidatesError(f"no candidates offered for node {node_id}")
        snapshots = tuple(
            CandidateSnapshot(
                instance_id=c.instance_id,
                needy=is_needy(c, self.cluster, self.weights),
                minshare_ratio=minshare_ratio(c, self.cluster, self.weights),
                dominant_fairshare_ratio=dominant_fairshare_ratio(
                    c, self.cluster, self.weights
                ),
            )
            for c in candidates
        )
        probability: float | None = None
        draw: float | None = None
        temp: float | None = self.annealing.T if self.annealing else None
        delta: float | None = None
        kind = self.config.kind

        if len(candidates) == 1:
            winner, branch = candidates[0], BRANCH_ONLY_CANDIDATE
        elif kind is PolicyKind.FIFO:
            winner = min(candidates, key=lambda c: c.submit_time)
            branch = BRANCH_FIFO
        elif kind is PolicyKind.FAIR:
            winner = candidates[0]
            best = max(shares(winner.usage, self.cluster))
            for cand in candidates[1:]:
                cand_share = max(shares(cand.usage, self.cluster))
                if not best < cand_share:
                    winner, best = cand, cand_share
            branch = BRANCH_FAIR
        elif kind is PolicyKind.DRF:
            winner = candidates[0]
            branch = BRANCH_ONLY_CANDIDATE
            for cand in candidates[1:]:
                winner, branch = drf_compare(
                    winner, cand, self.cluster, self.weights
                )
        else:
            assert self.config.saf is not None
            saf = self.config.saf
            winner = candidates[0]
            branch = BRANCH_ONLY_CANDIDATE
            for cand in candidates[1:]:
                outcome = saf_compare(
                    winner,
                    cand,
                    self.cluster,
                    self.weights,
                    self.annealing,
                    self._rng.random,
                    estimator=saf.estimator,
                    cooling=saf.cooling,
                    fitness_population=fitness_population,
                    advance_state=saf.pin_temperature is None,
                )
                winner = outcome.chosen
                branch = outcome.branch
                self.annealing = outcome.state
                probability = outcome.probability
                draw = outcome.draw
                temp = outcome.temperature
                delta = outcome.delta_fairshare

        record = DecisionRecord(
            time=now,
            node_id=node_id,
            candidates=snapshots,
            branch=branch,
            chosen=winner.instance_id,
            probability=probability,
            draw=draw,
            temperature=temp,
            delta_fairshare=delta,
        )
        return winner, record
