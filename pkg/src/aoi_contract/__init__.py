"""AoI-based contract design for periodic sensing-data updates.

Freshness and latency models for update cycles, expected-utility and
prospect-theory contract solvers, comparison mechanisms, and the
experiment harness built on top of them.
"""

from .aoi import (
    CycleCase,
    CycleKind,
    FreshnessAverages,
    TimingParams,
    avg_aoi,
    avg_latency_enumerated,
    avg_latency_printed,
    case1_curves,
    case2_curves,
    cycle_enumeration,
    monte_carlo_averages,
)
from .baselines import (
    MechanismResult,
    compare_mechanisms,
    solve_cc,
    solve_cs,
    solve_sg_uniform,
)
from .contract import (
    ContractItem,
    ContractMenu,
    ProviderPreferences,
    WorkerTypeLadder,
    performance_and_satisfaction,
    prelec_weight,
    provider_eut,
    provider_pt,
    pt_value,
    rewards_from_frequencies,
    validate_menu,
    worker_utility,
)
from .errors import DomainError, ResourceError
from .eut import (
    CoefficientVector,
    check_lemmas,
    linear_reward_coefficients,
    maximize_per_type,
    solve_eut,
)
from .pt import (
    PtCase,
    brute_force_pt,
    classify_case,
    find_partition,
    iron_monotone,
    solve_pt,
)

__version__ = "0.1.0"
