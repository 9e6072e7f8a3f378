"""Hybrid coded/uncoded cache placement for a shared-link MBS to SBS network.

Analytical expected load, placement search, Monte Carlo delivery
simulation and brute-force reference oracles.
"""
__version__ = "0.1.0"

from .model import (
    DemandMatrix,
    HeteroPlacement,
    HybridPlacement,
    InstanceTooLarge,
    LoadReport,
    PopularityMatrix,
    SystemConfig,
    validate,
    zipf_popularity,
)
from .analysis import (
    DistinctRequestDistribution,
    QueueOccupancyDistribution,
    coded_step_load,
    distinct_distribution,
    expected_coded_load,
    expected_uncoded_load,
    q_coded,
    q_coded_group,
    queue_distribution,
    total_load,
)
from .optimizer import (
    SearchResult,
    enumerate_covers,
    optimize_hetero,
    optimize_hybrid,
    optimize_pure_coded,
    optimize_pure_uncoded,
)
from .simulator import (
    SimulationReport,
    SlotOutcome,
    codec_verify,
    run_slot,
    sample_demands,
    simulate,
)
from .oracle import (
    ExactDistribution,
    exact_distinct_distribution,
    exact_expected_load,
    exact_queue_distribution,
)
