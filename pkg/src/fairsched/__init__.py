"""fairsched: deterministic multi-resource cluster scheduling simulator."""

from .cooling import AnnealingState, CoolingConfig, CoolingKind
from .engine import RunResult, Simulation, run
from .entropy import EstimatorConfig, EstimatorKind, FitnessDistribution, temperature
from .instances import (
    InstanceState,
    dominant_fairshare_ratio,
    is_needy,
    minshare_ratio,
)
from .metrics import compare, percent_change, usage_over_time
from .policy import (
    DecisionRecord,
    PolicyConfig,
    PolicyKind,
    SafConfig,
    drf_compare,
    fitness,
    saf_compare,
)
from .resources import (
    ResourceVector,
    ResourceWeights,
    add,
    checked_sub,
    dominant,
    fits_within,
    shares,
)
from .workload import (
    Cluster,
    JobSpec,
    Scenario,
    generate_gaussian,
    generate_uniform,
    load_trace,
    wordcount_preset,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealingState",
    "Cluster",
    "CoolingConfig",
    "CoolingKind",
    "DecisionRecord",
    "EstimatorConfig",
    "EstimatorKind",
    "FitnessDistribution",
    "InstanceState",
    "JobSpec",
    "PolicyConfig",
    "PolicyKind",
    "ResourceVector",
    "ResourceWeights",
    "RunResult",
    "SafConfig",
    "Scenario",
    "Simulation",
    "add",
    "checked_sub",
    "compare",
    "dominant",
    "dominant_fairshare_ratio",
    "drf_compare",
    "fitness",
    "fits_within",
    "generate_gaussian",
    "generate_uniform",
    "is_needy",
    "load_trace",
    "minshare_ratio",
    "percent_change",
    "run",
    "saf_compare",
    "shares",
    "temperature",
    "usage_over_time",
    "wordcount_preset",
]
