"""
The psi kernel and the balanced chart
=====================================

psi inverts theta(y) = y + log y. The balanced chart sends a finite measure
with density p to a_tilde = p + log p, and psi takes it back.
"""
import numpy as np

from igeo import (FiniteMeasure, SampleSpace, chart_forward, chart_inverse, phi_forward, phi_inverse,
                  psi, psi_deriv, solve_Z, theta)

# %% psi against theta on a wide grid
z = np.linspace(-50, 50, 11)
print("z          psi(z)              theta(psi(z)) - z")
for zi, yi in zip(z, psi(z)):
    print(f"{zi:6.1f}  {yi:18.12g}  {theta(yi) - zi: .2e}")

# derivatives come in closed form from psi' = psi / (1 + psi)
print("psi'(0), psi''(0):", psi_deriv(0.0, 1), psi_deriv(0.0, 2))

# %% a measure on three points and its chart coordinates
S = SampleSpace([0.2, 0.3, 0.5])
P = FiniteMeasure(S, [0.5, 1.0, 1.2])
a_tilde = chart_forward(P)
print("\nbalanced coordinates:", a_tilde)
print("round trip density:  ", chart_inverse(S, a_tilde).density)

# %% the centred chart on probability measures
a = phi_forward(P)
print("\ncentred coordinates (mean zero):", a, "mean", S.weights @ a)
Z = solve_Z(S, a)
print("normaliser Z:", Z.z, "residual", Z.residual)
print("recovered density:", phi_inverse(S, a).density)
