"""Randomized greedy algorithms for (non-monotone) submodular maximization
under a knapsack constraint, with lazy and adaptive variants."""
from .adaptive import (
    AdaptiveGreedyPolicy,
    AdaptiveRevenueModel,
    DecisionTreePolicy,
    DiscretePrior,
    LomaxPrior,
    PartialRealization,
    Realization,
    evaluate_policy_exact,
    optimal_adaptive_policy,
    point_mass,
)
from .algorithms import (
    AdaptiveParams,
    LazyParams,
    SampleGreedyParams,
    adaptive_greedy,
    approx_ratio_estimate,
    baseline_greedy,
    best_singleton,
    brute_force_opt,
    lazy_sample_greedy,
    sample_greedy,
)
from .core import (
    CapacityError,
    CountingOracle,
    FunctionOracle,
    KnapsackInstance,
    ModularOracle,
    Solution,
    ValueOracle,
    assert_feasible,
    make_instance,
    make_rng,
)
from .objectives import CutObjective, RevenueObjective, VideoRecObjective, WeightedGraph

__version__ = "0.1.0"
