"""Reproducing kernel Hilbert spaces built from positive definite kernels.

Two constructions are provided: limits of interpolation projections over
finite point sets (:mod:`rkhsbuild.projection`) and the kernel pairing on
signed measures (:mod:`rkhsbuild.measures`).
"""
from ._backend import BACKEND
from .applications import (
    DiscreteRandomVariable,
    hausdorff_lower_bound,
    isometry_check,
    lipschitz_certificate,
    matched_witness,
    pushforward,
    rkhs_distance,
)
from .errors import (
    ConfigError,
    DimensionError,
    KernelDomainError,
    NestingError,
    RkhsError,
    SingularDiagonalError,
    ZeroMeasureError,
)
from .fbm import DensityOnGrid, c_h_constant, fbm_energy_spatial, fbm_energy_spectral
from .gaussian import (
    GaussianMeasureSpec,
    bessel_pairing_closed_form,
    gaussian_even_moment,
    moment_membership,
)
from .gram import GramFactor, PointSet, build_gram, pinv_apply, select_independent
from .kernels import KernelSpec, check_pd, detect_equivalent_points, dk_metric, eval_kernel
from .measures import (
    SignedMeasure,
    delta_span_residual,
    dual_norm_check,
    embed,
    measure_pair,
    measures_equivalent,
)
from .projection import (
    FunctionSource,
    NormTrace,
    RkhsFunction,
    norm_sup_estimate,
    qf_norm_sq,
    qf_project,
    reproduce_check,
)

__version__ = "0.1.0"
