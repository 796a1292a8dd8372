"""Temperature estimation from the fitness scores of running tasks.

The empirical distribution weights each observed fitness value by its
frequency (count/n). The six estimators all agree on two conventions:
K scales the result (default 1000) and logarithms default to base 10,
which is what makes a two-point uniform distribution come out near 301
at K=1000.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

#: Temperature reported when no tasks are running (or entropy degenerates
#: to zero at reheat); keeps the acceptance rule near-greedy instead of
#: dividing by zero.
DEFAULT_TEMPERATURE_FLOOR = 1e-6


class EmptyPopulationError(ValueError):
    """No fitness samples to build a distribution from."""


class EstimatorKind(enum.Enum):
    SHANNON = "shannon"
    RENYI = "renyi"
    HARTLEY = "hartley"
    COLLISION = "collision"
    MIN_ENTROPY = "min"
    TSALLIS = "tsallis"


@dataclass(frozen=True)
class FitnessDistribution:
    """Empirical probability distribution over observed fitness values."""

    support: tuple[tuple[float, float], ...]
    n: int
    bin_width: float | None = None

    def __post_init__(self) -> None:
        if not self.support:
            raise EmptyPopulationError("distribution support is empty")
        total = math.fsum(p for _, p in self.support)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")
        if any(p <= 0 for _, p in self.support):
            raise ValueError("every support probability must be > 0")

    @property
    def probabilities(self) -> tuple[float, ...]:
        return tuple(p for _, p in self.support)


@dataclass(frozen=True)
class EstimatorConfig:
    """Which estimator to run and with which parameters.

    `alpha` applies to Renyi only, `q` to Tsallis only; `bin_width`
    None means exact-value binning.
    """

    kind: EstimatorKind = EstimatorKind.SHANNON
    k_const: float = 1000.0
    alpha: float | None = None
    q: float | None = None
    log_base: float = 10.0
    bin_width: float | None = None
    temperature_floor: float = DEFAULT_TEMPERATURE_FLOOR

    def __post_init__(self) -> None:
        if self.k_const <= 0:
            raise ValueError("k_const must be positive")
        if self.kind is EstimatorKind.RENYI:
            if self.alpha is None:
                raise ValueError("Renyi estimator needs alpha")
            _check_order(self.alpha, "alpha")
        elif self.alpha is not None:
            raise ValueError(f"alpha is only valid for Renyi, not {self.kind.value}")
        if self.kind is EstimatorKind.TSALLIS:
            if self.q is None:
                raise ValueError("Tsallis estimator needs q")
            _check_order(self.q, "q")
        elif self.q is not None:
            raise ValueError(f"q is only valid for Tsallis, not {self.kind.value}")
        if self.bin_width is not None and self.bin_width <= 0:
            raise ValueError("bin_width must be positive")


def _check_order(value: float, name: str) -> None:
    if value <= 0:
        raise ValueError(f"{name} must be > 0")
    if value == 1:
        raise ValueError(f"{name} = 1 is the Shannon limit; use the Shannon estimator")


def _log(x: float, base: float) -> float:
    if base == 10.0:
        return math.log10(x)
    if base == 2.0:
        return math.log2(x)
    if base == math.e:
        return math.log(x)
    return math.log(x) / math.log(base)


def empirical_distribution(
    fitness_values: Sequence[float], bin_width: float | None = None
) -> FitnessDistribution:
    """Frequency distribution of fitness values.

    Exact mode (bin_width None) bins by value equality; a positive
    bin_width buckets values into [i*w, (i+1)*w) intervals keyed by the
    lower edge.
    """
    if len(fitness_values) == 0:
        raise EmptyPopulationError("empty fitness population")
    counts: dict[float, int] = {}
    for v in fitness_values:
        key = float(v) if bin_width is None else math.floor(v / bin_width) * bin_width
        counts[key] = counts.get(key, 0) + 1
    n = len(fitness_values)
    support = tuple((value, count / n) for value, count in sorted(counts.items()))
    return FitnessDistribution(support=support, n=n, bin_width=bin_width)


def shannon(d: FitnessDistribution, k_const: float = 1000.0, base: float = 10.0) -> float:
    """-K * sum(p * log p)."""
    return -k_const * math.fsum(p * _log(p, base) for p in d.probabilities)


def renyi(
    d: FitnessDistribution,
    k_const: float = 1000.0,
    alpha: float = 2.0,
    base: float = 10.0,
) -> float:
    """K/(1-alpha) * log(sum(p^alpha)) for alpha > 0, alpha != 1."""
    _check_order(alpha, "alpha")
    power_sum = math.fsum(p**alpha for p in d.probabilities)
    return k_const / (1.0 - alpha) * _log(power_sum, base)


def hartley(d: FitnessDistribution, k_const: float = 1000.0, base: float = 10.0) -> float:
    """K * log of the support cardinality; ignores the probabilities."""
    return k_const * _log(len(d.support), base)


def collision(d: FitnessDistribution, k_const: float = 1000.0, base: float = 10.0) -> float:
    """-K * log(sum(p^2)), the order-2 member of the Renyi family."""
    return -k_const * _log(math.fsum(p * p for p in d.probabilities), base)


def min_entropy(d: FitnessDistribution, k_const: float = 1000.0, base: float = 10.0) -> float:
    """-K * log(max p); the smallest member of the Renyi family."""
    return -k_const * _log(max(d.probabilities), base)


def tsallis(d: FitnessDistribution, k_const: float = 1000.0, q: float = 2.0) -> float:
    """K/(q-1) * (1 - sum(p^q)); log-free, so no base parameter."""
    _check_order(q, "q")
    power_sum = math.fsum(p**q for p in d.probabilities)
    return k_const / (q - 1.0) * (1.0 - power_sum)


def estimate(d: FitnessDistribution, config: EstimatorConfig) -> float:
    """Run the configured estimator against a prepared distribution."""
    kind = config.kind
    if kind is EstimatorKind.SHANNON:
        return shannon(d, config.k_const, config.log_base)
    if kind is EstimatorKind.RENYI:
        assert config.alpha is not None
        return renyi(d, config.k_const, config.alpha, config.log_base)
    if kind is EstimatorKind.HARTLEY:
        return hartley(d, config.k_const, config.log_base)
    if kind is EstimatorKind.COLLISION:
        return collision(d, config.k_const, config.log_base)
    if kind is EstimatorKind.MIN_ENTROPY:
        return min_entropy(d, config.k_const, config.log_base)
    if kind is EstimatorKind.TSALLIS:
        assert config.q is not None
        return tsallis(d, config.k_const, config.q)
    raise ValueError(f"unknown estimator kind {kind!r}")


def temperature(fitness_values: Sequence[float], config: EstimatorConfig) -> float:
    """Entropy of the empirical fitness distribution, never negative.

    An empty population falls back to the configured floor so the
    acceptance probability degenerates to near-greedy.
    """
    if len(fitness_values) == 0:
        return config.temperature_floor
    d = empirical_distribution(fitness_values, config.bin_width)
    value = estimate(d, config)
    # single-point distributions can land at -0.0; keep the result >= 0
    return max(value, 0.0)
