"""
Fisher metric and the alpha-connections
=======================================

Second mixed derivatives of every D_alpha on the diagonal give the same
Fisher metric. Third derivatives give the alpha-connections, and the pair
(alpha, -alpha) is dual with respect to that metric.
"""
import numpy as np

from igeo import (SampleSpace, chart_inverse, constant_field, divergence_derivative, duality_residual,
                  fisher_inner, gamma_tilde)

rng = np.random.default_rng(3)
S = SampleSpace(rng.dirichlet(np.ones(5)))
a = rng.uniform(-2, 2, 5)
P = chart_inverse(S, a)
u, v, w = rng.normal(size=(3, 5))

# %% one metric for every alpha
print("Fisher inner product:", fisher_inner(P, u, v))
for alpha in (-1.0, -0.3, 0.0, 0.6, 1.0):
    g = -divergence_derivative(alpha, S, a, a, (1, 1), [u, v])
    print(f"  alpha={alpha:5.2f}  -d1 d2 D = {g:.15f}")

# %% the ambient connection at one point
print("\nGamma_tilde for alpha = -1, 0, 1:")
for alpha in (-1.0, 0.0, 1.0):
    print(" ", gamma_tilde(alpha, a, u, v))

# %% duality: X <Y, Z> = <D_X Y, Z> + <Y, D*_X Z> for constant fields
X, Y, Zf = (constant_field(x) for x in (u, v, w))
print("\nduality residual at alpha=0.4:", duality_residual(0.4, X, Y, Zf, P))
