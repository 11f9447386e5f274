"""Fixed-shot baselines next to iCANS1 on one compiling instance, all with the same budget."""

import numpy as np

from icans.optimizers import make_optimizer
from icans.problems import CompilingProblem

budget = 200_000
instance_rng = np.random.default_rng(3)
problem = CompilingProblem.random(instance_rng)
theta0 = problem.initial_point(instance_rng)
print(f"starting cost {problem.exact(theta0):.4f}\n")

for name, shots in (("icans1", None), ("gd", 100), ("adam", 100), ("spsa", 100), ("soff", 100)):
    opt = make_optimizer(name, problem, shots=shots, rng=np.random.default_rng(11))
    trace = opt.run(theta0, budget)
    best = trace.checkpoint(budget)
    print(f"{opt.label:>9}: {len(trace.iterations):>5} iterations, cost at {budget} shots = "
          f"{best.exact_cost:.4f}")
