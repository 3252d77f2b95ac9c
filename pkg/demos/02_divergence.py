"""
The alpha-divergence family
===========================

D_alpha interpolates between the two Kullback-Leibler divergences at
alpha = -1 and alpha = +1, and swapping the arguments flips the sign of alpha.
"""
import numpy as np

from igeo import FiniteMeasure, SampleSpace, chart_forward, divergence, divergence_via_kernels

S = SampleSpace.uniform(4)
rng = np.random.default_rng(7)
P = FiniteMeasure(S, rng.uniform(0.2, 2.0, 4))
Q = FiniteMeasure(S, rng.uniform(0.2, 2.0, 4))

# %% the whole family, checked against the skew symmetry and the kernel route
print(" alpha      D_a(P|Q)       D_-a(Q|P)      via kernels")
for alpha in np.linspace(-1, 1, 9):
    d = divergence(alpha, P, Q)
    print(f"{alpha:6.2f}  {d:.12f}  {divergence(-alpha, Q, P):.12f}  "
          f"{divergence_via_kernels(alpha, S, chart_forward(P), chart_forward(Q)):.12f}")

# %% no jump near the ends of the alpha range
for alpha in (1 - 1e-3, 1 - 1e-6, 1 - 1e-9, 1.0):
    print(f"alpha = {alpha!r:<22} D = {divergence(alpha, P, Q):.15f}")

# %% the Kullback-Leibler limits written out by hand
p, q, w = P.density, Q.density, S.weights
print("\nKL(P|Q) at alpha=-1:", divergence(-1, P, Q), w @ (p * np.log(p / q) - p + q))
print("KL(Q|P) at alpha=+1:", divergence(1, P, Q), w @ (q * np.log(q / p) - q + p))
