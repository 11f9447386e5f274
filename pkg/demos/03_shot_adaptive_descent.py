"""iCANS1 and iCANS2 on the Heisenberg triangle: how shot counts grow as the gradient shrinks."""

import numpy as np

from icans.optimizers import ICANS
from icans.problems import VqeProblem

problem = VqeProblem()
print(f"ground energy: {problem.ground_energy:.4f}")

for variant in (1, 2):
    rng = np.random.default_rng(7)
    theta0 = problem.initial_point(rng)
    trace = ICANS(problem, variant, rng=rng).run(theta0, 300_000)
    print(f"\niCANS{variant}: {len(trace.iterations)} iterations, {trace.s_tot} shots")
    print("  iteration   shots so far   mean shots/component   energy")
    for rec in trace.iterations[:: max(1, len(trace.iterations) // 8)]:
        print(f"  {rec.iteration:>9}   {rec.s_tot:>12}   {np.mean(rec.shots):>20.1f}   {rec.exact_cost:7.4f}")
    if variant == 2:
        gains = np.concatenate([r.gain for r in trace.iterations])
        print(f"  smallest expected gain per shot: {gains.min():.2e} (never negative)")
