"""Annealing temperature lifecycle: schedules, cycle stepping, reheating.

Stepping always recomputes from the closed form T(k) rather than
multiplying the previous value, so the non-exponential schedules stay
exact; for the exponential schedule both routes agree to rounding.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

from .entropy import EstimatorConfig, temperature


class CoolingKind(enum.Enum):
    EXPONENTIAL = "exponential"
    LINEAR = "linear"
    LOGARITHMIC = "logarithmic"
    QUADRATIC = "quadratic"


_DEFAULT_ALPHA = {
    CoolingKind.EXPONENTIAL: 0.85,
    CoolingKind.LINEAR: 1.0,
    CoolingKind.LOGARITHMIC: 1.0,
    CoolingKind.QUADRATIC: 1.0,
}


@dataclass(frozen=True)
class CoolingConfig:
    """Cooling schedule selection.

    Exponential alpha is expected in [0.8, 0.9]; values outside that
    band raise unless `allow_unusual_alpha` downgrades the check to a
    warning.
    """

    kind: CoolingKind = CoolingKind.EXPONENTIAL
    alpha: float | None = None
    cold_fraction: float = 0.01
    allow_unusual_alpha: bool = False

    def __post_init__(self) -> None:
        if self.alpha is None:
            object.__setattr__(self, "alpha", _DEFAULT_ALPHA[self.kind])
        if self.alpha <= 0:
            raise ValueError("cooling alpha must be positive")
        if not 0 < self.cold_fraction < 1:
            raise ValueError("cold_fraction must be in (0, 1)")
        if self.kind is CoolingKind.EXPONENTIAL and not 0.8 <= self.alpha <= 0.9:
            message = f"exponential alpha {self.alpha} outside [0.8, 0.9]"
            if self.allow_unusual_alpha:
                warnings.warn(message, stacklevel=2)
            else:
                raise ValueError(message)


@dataclass(frozen=True)
class AnnealingState:
    """Temperature trajectory since the last reheat.

    T0 is the temperature set by the last reheat, k the number of
    cooling cycles since then; cold_temperature = cold_fraction * T0 is
    the reheat trigger.
    """

    T0: float
    T: float
    k: int = 0
    cold_temperature: float = 0.0
    cold_fraction: float = 0.01
    needs_reheat: bool = False

    @classmethod
    def from_population(
        cls,
        fitness_population: Sequence[float],
        estimator: EstimatorConfig,
        cooling: CoolingConfig,
    ) -> "AnnealingState":
        """Initial state: T0 from the entropy of the current fitnesses."""
        t0 = max(temperature(fitness_population, estimator), estimator.temperature_floor)
        return cls(
            T0=t0,
            T=t0,
            k=0,
            cold_temperature=cooling.cold_fraction * t0,
            cold_fraction=cooling.cold_fraction,
        )


def temperature_at(config: CoolingConfig, t0: float, k: int) -> float:
    """Closed-form temperature after k cooling cycles from t0.

    The logarithmic and quadratic schedules use base-10 logs, matching
    the entropy default.
    """
    if t0 < 0:
        raise ValueError("t0 must be >= 0")
    if k < 0:
        raise ValueError("k must be >= 0")
    alpha = config.alpha
    assert alpha is not None
    if config.kind is CoolingKind.EXPONENTIAL:
        return t0 * alpha**k
    if config.kind is CoolingKind.LINEAR:
        return t0 / (1.0 + alpha * k)
    if config.kind is CoolingKind.LOGARITHMIC:
        return t0 / (1.0 + alpha * math.log10(1.0 + k))
    if config.kind is CoolingKind.QUADRATIC:
        return t0 / (1.0 + alpha * math.log10(1.0 + k * k))
    raise ValueError(f"unknown cooling kind {config.kind!r}")


def step(state: AnnealingState, config: CoolingConfig) -> AnnealingState:
    """One cooling cycle; flags for reheat once at or below the cold mark."""
    if state.T > state.cold_temperature:
        k = state.k + 1
        return replace(state, k=k, T=temperature_at(config, state.T0, k))
    return replace(state, needs_reheat=True)


def reheat(
    state: AnnealingState,
    fitness_population: Sequence[float],
    estimator: EstimatorConfig,
) -> AnnealingState:
    """Restart the trajectory from the entropy of the current fitnesses.

    Degenerate (or empty) populations clamp to the estimator's floor,
    which makes acceptance near-impossible for any positive fairness gap.
    """
    t0 = max(temperature(fitness_population, estimator), estimator.temperature_floor)
    return AnnealingState(
        T0=t0,
        T=t0,
        k=0,
        cold_temperature=state.cold_fraction * t0,
        cold_fraction=state.cold_fraction,
        needs_reheat=False,
    )
