"""Information geometry of finite measures in the balanced ``p + log p`` chart.

Scalar kernels, finite measures and their charts, the alpha-divergence family
with its Fisher metric and alpha-connections, and finite-dimensional
parametric families with geodesics, parallel transport and natural gradient.
"""
__version__ = "0.1.0"

from .errors import (
    DependentGenerators,
    DomainError,
    IGeoError,
    InvalidAlpha,
    MissingDerivative,
    NotProbability,
    NumericsError,
    OutOfDomain,
    ShapeError,
    SingularGram,
    SingularMetric,
)
from .kernels import DEFAULT_TOL, ToleranceConfig, psi, psi_deriv, theta, xi_alpha
from .measures import (
    FiniteMeasure,
    SampleSpace,
    alpha_embed,
    chart_forward,
    chart_inverse,
    expectation,
    l2_inner,
    lp_norm,
    membership_diagnostics,
)
from .prob_chart import d2_rho, d_rho, normal_direction, phi_forward, phi_inverse, rho, solve_Z, tangent_split
from .divergence_geometry import (
    VectorField,
    alpha_derivative_ambient,
    alpha_derivative_M,
    ambient_extension,
    ambient_from_M,
    constant_field,
    divergence,
    divergence_derivative,
    divergence_via_kernels,
    duality_residual,
    fisher_inner,
    gamma_M,
    gamma_tilde,
    upsilon,
)
from .submanifolds import (
    BalancedLinearFamily,
    ExponentialFamily,
    ParametricFamily,
    balanced_linear_build,
    christoffel,
    expfam_build,
    expfam_recover_parameters,
    fisher_matrix,
    geodesic,
    line_path,
    natural_gradient_descent,
    parallel_transport,
)

__all__ = [
    "__version__",
    "DependentGenerators",
    "DomainError",
    "IGeoError",
    "InvalidAlpha",
    "MissingDerivative",
    "NotProbability",
    "NumericsError",
    "OutOfDomain",
    "ShapeError",
    "SingularGram",
    "SingularMetric",
    "DEFAULT_TOL",
    "ToleranceConfig",
    "psi",
    "psi_deriv",
    "theta",
    "xi_alpha",
    "FiniteMeasure",
    "SampleSpace",
    "alpha_embed",
    "chart_forward",
    "chart_inverse",
    "expectation",
    "l2_inner",
    "lp_norm",
    "membership_diagnostics",
    "d2_rho",
    "d_rho",
    "normal_direction",
    "phi_forward",
    "phi_inverse",
    "rho",
    "solve_Z",
    "tangent_split",
    "VectorField",
    "alpha_derivative_ambient",
    "alpha_derivative_M",
    "ambient_extension",
    "ambient_from_M",
    "constant_field",
    "divergence",
    "divergence_derivative",
    "divergence_via_kernels",
    "duality_residual",
    "fisher_inner",
    "gamma_M",
    "gamma_tilde",
    "upsilon",
    "BalancedLinearFamily",
    "ExponentialFamily",
    "ParametricFamily",
    "balanced_linear_build",
    "christoffel",
    "expfam_build",
    "expfam_recover_parameters",
    "fisher_matrix",
    "geodesic",
    "line_path",
    "natural_gradient_descent",
    "parallel_transport",
]
