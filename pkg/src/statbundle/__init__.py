"""Dually affine information geometry on finite sample spaces.

Strictly positive densities over weighted finite outcome sets, the
zero-mean fiber vectors attached to them, the exponential/mixture charts
and parallel transports that make the whole thing a pair of affine
bundles, KL natural gradients, marginalization/conditioning derivatives,
and exponential families with a natural-gradient descent runner.  Every
analytic derivative ships with an independent finite-difference check.
"""

from ._kernels import NUMBA_ENABLED, backend
from .core import (
    BoundaryError,
    Density,
    FiberVector,
    MismatchError,
    NormalizationError,
    ProductSpace,
    SampleSpace,
    StatBundleError,
    center,
    expect,
    make_density,
    make_space,
    pairing,
    product_density,
    random_density,
    random_fiber,
    uniform_density,
)
from .charts import (
    Curve,
    cumulant,
    e_transport,
    exp_chart,
    exp_chart_inv,
    exponential_curve,
    m_transport,
    mix_chart,
    mix_chart_inv,
    mixture_curve,
    score_velocity,
)
from .divergence import (
    common_param_gradient,
    grad1_kl,
    grad2_kl,
    kl,
    kl_curve_derivative,
    structural_reconstruct,
)
from .bayes import (
    ChartDecomposition,
    KLChain,
    condition,
    condition_chart_derivative,
    condition_chart_expression,
    conditional_derivative,
    exp_decompose,
    kl_chain,
    marginal_derivative,
    marginalize,
)
from .expfam import (
    ExpFamily,
    FlowRecord,
    FlowTrace,
    IdentifiabilityError,
    conditional_velocity,
    density,
    grad_psi,
    joint_velocity,
    kl_theta_gradient_left,
    kl_theta_gradient_right,
    make_expfam,
    marginal_velocity,
    natural_gradient_flow,
    psi,
)
from .findiff import FDConfig, fd_gradient, fd_scalar, fd_vector_curve
from .verify import CheckResult, Report, format_report, run_verification

__version__ = "0.1.0"

__all__ = [
    "BoundaryError",
    "ChartDecomposition",
    "CheckResult",
    "Curve",
    "Density",
    "ExpFamily",
    "FDConfig",
    "FiberVector",
    "FlowRecord",
    "FlowTrace",
    "IdentifiabilityError",
    "KLChain",
    "MismatchError",
    "NormalizationError",
    "NUMBA_ENABLED",
    "ProductSpace",
    "Report",
    "SampleSpace",
    "StatBundleError",
    "backend",
    "center",
    "common_param_gradient",
    "condition",
    "condition_chart_derivative",
    "condition_chart_expression",
    "conditional_derivative",
    "conditional_velocity",
    "cumulant",
    "density",
    "e_transport",
    "exp_chart",
    "exp_chart_inv",
    "exp_decompose",
    "expect",
    "exponential_curve",
    "fd_gradient",
    "fd_scalar",
    "fd_vector_curve",
    "format_report",
    "grad1_kl",
    "grad2_kl",
    "grad_psi",
    "joint_velocity",
    "kl",
    "kl_chain",
    "kl_curve_derivative",
    "kl_theta_gradient_left",
    "kl_theta_gradient_right",
    "m_transport",
    "make_density",
    "make_expfam",
    "make_space",
    "marginal_derivative",
    "marginal_velocity",
    "marginalize",
    "mix_chart",
    "mix_chart_inv",
    "mixture_curve",
    "natural_gradient_flow",
    "pairing",
    "product_density",
    "psi",
    "random_density",
    "random_fiber",
    "run_verification",
    "score_velocity",
    "structural_reconstruct",
    "uniform_density",
]
