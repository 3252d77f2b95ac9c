"""
Geometry of an exponential family
=================================

On an exponential family the Fisher matrix is the covariance of the
statistics and the alpha-Christoffel symbols are (1 - alpha)/2 times the
third central moments, raised with the inverse metric.
"""
import numpy as np

from igeo import SampleSpace, christoffel, expfam_build, expfam_recover_parameters, fisher_matrix

rng = np.random.default_rng(11)
S = SampleSpace(rng.dirichlet(np.ones(6)))
eta = rng.normal(size=(2, 6))
eta -= (eta @ S.weights)[:, None]
family = expfam_build(S, eta, lo=[-4, -4], hi=[4, 4])
y = np.array([0.4, -0.7])

# %% metric as a covariance
p = family.density(y)
m = eta - ((eta * S.weights) @ p)[:, None]
cov = (m * (S.weights * p)) @ m.T
print("Fisher matrix:\n", fisher_matrix(family, y))
print("covariance of the statistics:\n", cov)

# %% connection as third moments
third = np.einsum("n,in,jn,kn->ijk", S.weights * p, m, m, m)
for alpha in (-1.0, 0.0, 1.0):
    gamma = christoffel(family, y, alpha).christoffel
    expected = 0.5 * (1 - alpha) * np.einsum("kl,lij->kij", np.linalg.inv(cov), third)
    print(f"alpha={alpha:4.1f}  max |Gamma - closed form| = {np.abs(gamma - expected).max():.2e}")

# %% parameters come back from the measure
print("\nrecovered parameters:", expfam_recover_parameters(family, family.measure(y)))
