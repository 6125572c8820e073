"""
SampleGreedy on a weighted max-cut instance
===========================================

Random G(n, 0.2) graph with U(0,1) weights and costs, budget 15% of the total
cost.  Compares the randomized greedy against deterministic density greedy and
the exact optimum on a small instance.
"""
import numpy as np

from submodknap import (CutObjective, SampleGreedyParams, baseline_greedy, brute_force_opt,
                        make_instance, sample_greedy)
from submodknap.core import derive_seed
from submodknap.instances import GenSpec, gen_er_graph

# small enough for brute force
g, costs = gen_er_graph(GenSpec(n=18, edge_prob=0.2, seed=1))
inst, oracle = make_instance(costs, 0.15 * costs.sum(), CutObjective(g))

opt = brute_force_opt(inst, oracle)
print(f"n={inst.n}  budget={inst.budget:.3f}  OPT={opt.value:.3f}  S*={sorted(opt.items)}")

dg = baseline_greedy(inst, oracle, "density")
print(f"density greedy     {dg.value:.3f}  {sorted(dg.items)}")

# sqrt(2) - 1 acceptance probability, many seeds
vals = [sample_greedy(inst, oracle, SampleGreedyParams(), seed=derive_seed(0, t)).value
        for t in range(500)]
print(f"SampleGreedy p=0.414: mean {np.mean(vals):.3f}  min {np.min(vals):.3f}  "
      f"max {np.max(vals):.3f}")

# the protocol used in experiments: p ~ U[0.9, 1], keep the best of 5 runs
runs = [sample_greedy(inst, oracle, SampleGreedyParams.experimental(), seed=s) for s in range(5)]
best = max(runs, key=lambda s: s.value)
calls = sum(r.oracle_calls for r in runs)
print(f"best of 5 (p~U[0.9,1]) {best.value:.3f}  p={best.p:.3f}  calls={calls}")
