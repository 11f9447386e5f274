"""Parameter-shift derivatives, their single-shot variances, and Lipschitz constants."""

import numpy as np

from icans.gradients import FiniteDifferenceConfig, estimate_gradient, exact_gradient
from icans.problems import CompilingProblem, VqeProblem

rng = np.random.default_rng(1)
vqe = VqeProblem()
theta = vqe.initial_point(rng)

shift = exact_gradient(vqe, theta)
fd = exact_gradient(vqe, theta, FiniteDifferenceConfig(1e-5))
print(f"shift rule vs central difference, max gap: {np.max(np.abs(shift - fd)):.1e}")

# a sampled gradient: component i uses s_i paired shots at theta +/- (pi/2) e_i
shots = np.full(vqe.n_params, 50)
est = estimate_gradient(vqe, theta, shots, rng=rng)
print(f"sampled gradient used {est.shots_consumed} composite shots")
print("first components  g:", np.round(est.g[:4], 3))
print("       exact values:", np.round(shift[:4], 3))
print("     std. errors    :", np.round(np.sqrt(est.S[:4] / shots[:4]), 3))

compile_task = CompilingProblem.random(rng)
for name, p in (("vqe", vqe), ("compile", compile_task)):
    print(f"{name}: L (coefficient sum) = {p.lipschitz(False):g}, L (spectral) = {p.lipschitz(True):g}")
