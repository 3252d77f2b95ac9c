"""
Geodesics, parallel transport and natural gradient
==================================================

The +1 connection is flat in the natural parameters of an exponential
family, so its geodesics are straight lines. Transporting a pair of vectors
with dual connections keeps their Fisher product fixed. Natural-gradient
descent finds the closest family member to a target measure.
"""
import numpy as np

from igeo import (FiniteMeasure, SampleSpace, expfam_build, geodesic, line_path, natural_gradient_descent,
                  parallel_transport)

S = SampleSpace.uniform(3)
eta = np.array([[1.0, 0.0, -1.0], [1.0, -2.0, 1.0]])
family = expfam_build(S, eta, lo=[-5, -5], hi=[5, 5])
y0, v0 = np.array([0.2, -0.1]), np.array([0.6, 0.3])

# %% geodesics for three values of alpha
for alpha in (1.0, 0.0, -1.0):
    tr = geodesic(family, alpha, y0, v0, t_end=1.0, step=1e-2)
    line_error = np.abs(tr.y[-1] - (y0 + v0)).max()
    print(f"alpha={alpha:4.1f}  end point {tr.y[-1]}  distance from the straight line {line_error:.2e}")

# %% dual transport along a straight path
tr = parallel_transport(family, 0.5, line_path(y0, v0), [1.0, 0.0], t_end=1.0, step=1e-3, dual_v0=[0.0, 1.0])
print("\n<u, v>_g along the path:", tr.product[::250])
print("|u|_g^2 along the path: ", tr.norm_sq[::250])

# %% natural gradient towards a measure outside a one-parameter family
line = expfam_build(S, eta[:1], lo=[-5], hi=[5])
target = FiniteMeasure(S, [0.9, 0.9, 1.2])
for alpha in (-1.0, 1.0):
    run = natural_gradient_descent(line, alpha, target, [0.0])
    print(f"\nalpha={alpha:4.1f}  {run.status} after {run.iterations} steps")
    print("  objective:", run.objective[:5], "...", run.objective[-1])
    print("  minimiser:", run.y[-1])
