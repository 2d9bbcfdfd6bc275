"""Numerical verification of a sharp weighted Rellich-Sobolev inequality.

The inequality bounds ``(int |u|^2**)^(2/2**)`` by the bi-Laplacian energy
with two Hardy corrections, ``C1 int |grad u|^2/|x|^2`` and
``C2 int u^2/|x|^4``.  The package provides the constants, radial quadrature,
the explicit extremals, the power change of variables to the unweighted
problem, the linearized spectrum per harmonic sector and the local stability
ratio.
"""

from .emden_fowler import (
    CoefficientSet,
    deficit_comparison,
    pull_back,
    push_forward,
    raw_coefficients,
)
from .extremals import (
    ContractViolation,
    ExtremalBubble,
    el_residual,
    equality_case_check,
    make_bubble,
    relative_el_residual,
    sharp_constant_identity,
)
from .params import DomainError, ParameterSet, derive_constants, gamma_product, sphere_eigen
from .quadrature import (
    DivergenceError,
    NonConvergenceError,
    QuadratureConfig,
    inner_product_mu,
    integrate_radial,
    lp_norm,
)
from .spectrum import (
    GridSpec,
    SectorOperator,
    SpectrumResult,
    assemble_sector,
    eigenfunction_alignment,
    lift_conditions,
    sector_form,
    solve_generalized,
)
from .stability import (
    DeficitSample,
    ManifoldProjection,
    deficit,
    local_ratio_study,
    project_to_manifold,
    taylor_check,
)

__all__ = [
    "CoefficientSet", "ContractViolation", "DeficitSample", "DivergenceError", "DomainError",
    "ExtremalBubble", "GridSpec", "ManifoldProjection", "NonConvergenceError", "ParameterSet",
    "QuadratureConfig", "SectorOperator", "SpectrumResult", "assemble_sector", "deficit",
    "deficit_comparison", "derive_constants", "eigenfunction_alignment", "el_residual",
    "equality_case_check", "gamma_product", "inner_product_mu", "integrate_radial",
    "lift_conditions", "local_ratio_study", "lp_norm", "make_bubble", "project_to_manifold",
    "pull_back", "push_forward", "raw_coefficients", "relative_el_residual", "sector_form",
    "sharp_constant_identity", "solve_generalized", "sphere_eigen", "taylor_check",
]
