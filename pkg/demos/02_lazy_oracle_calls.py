"""
Lazy evaluations and oracle calls
=================================

Counts value-oracle calls of lazy SampleGreedy and of plain density greedy on
G(n, 0.2) cut instances of growing size, and fits the growth exponent of
calls against n on a log-log scale.
"""
import numpy as np

from submodknap import (CutObjective, LazyParams, SampleGreedyParams, baseline_greedy,
                        lazy_sample_greedy, make_instance, sample_greedy)
from submodknap.core import derive_seed
from submodknap.instances import GenSpec, gen_er_graph

ns = [50, 100, 200, 400]
lazy = LazyParams(epsilon=0.01)
rows = []
for n in ns:
    lz, pl, vals = [], [], []
    for rep in range(5):
        g, costs = gen_er_graph(GenSpec(n, 0.2, seed=derive_seed(3, n, rep)))
        inst, oracle = make_instance(costs, 0.15 * costs.sum(), CutObjective(g))
        a = lazy_sample_greedy(inst, oracle, SampleGreedyParams.experimental(), lazy, seed=rep)
        b = sample_greedy(inst, oracle, SampleGreedyParams(p=a.p), seed=rep)
        c = baseline_greedy(inst, oracle, "density")
        lz.append(a.oracle_calls)
        pl.append(c.oracle_calls)
        vals.append((a.value, b.value))
    rows.append((n, np.mean(lz), np.mean(pl)))
    v = np.mean(vals, axis=0)
    print(f"n={n:4d}  lazy calls {np.mean(lz):8.1f}  (ceiling {n * (lazy.update_cap(n) + 2)})  "
          f"density greedy calls {np.mean(pl):9.1f}  value lazy/plain {v[0]:.1f}/{v[1]:.1f}")

n, lz, pl = map(np.array, zip(*rows))
print(f"log-log slope: lazy {np.polyfit(np.log(n), np.log(lz), 1)[0]:.2f}, "
      f"plain {np.polyfit(np.log(n), np.log(pl), 1)[0]:.2f}")
# the lazy calls track c * n * ln(n)
print("lazy calls / (n ln n):", np.round(lz / (n * np.log(n)), 3))
