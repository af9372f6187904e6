"""Randomization inference for causal models with interference on networks."""

__version__ = "0.1.0"

from .assignment import Design, count_assignments, enumerate_assignments, sample_assignments
from .inference import (
    Hypothesis,
    Method,
    PValueSurface,
    TestResult,
    confidence_region,
    grid_test,
    profile_pvalues,
    randomization_test,
)
from .models import (
    AdditiveParams,
    SpilloverParams,
    UniformityModel,
    additive_model,
    make_model,
    sharp_null_model,
    spillover_model,
)
from .network import Network, degrees, generate_network, generate_positions, treated_neighbor_counts
from .teststats import KS, MEAN_DIFFERENCE, RANK, get_statistic

__all__ = [
    "AdditiveParams",
    "Design",
    "Hypothesis",
    "KS",
    "MEAN_DIFFERENCE",
    "Method",
    "Network",
    "PValueSurface",
    "RANK",
    "SpilloverParams",
    "TestResult",
    "UniformityModel",
    "additive_model",
    "confidence_region",
    "count_assignments",
    "degrees",
    "enumerate_assignments",
    "generate_network",
    "generate_positions",
    "get_statistic",
    "grid_test",
    "make_model",
    "profile_pvalues",
    "randomization_test",
    "sample_assignments",
    "sharp_null_model",
    "spillover_model",
    "treated_neighbor_counts",
]
