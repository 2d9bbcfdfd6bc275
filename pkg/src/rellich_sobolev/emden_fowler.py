"""The power change of variables ``u(r) = r^a v(r^b)``.

With ``a = -mu/2`` and ``b = 1 - mu/(N-4)`` the weighted radial problem
becomes the unweighted one.  Substituting ``s = r^b`` gives, for radial
functions and integrals without the sphere area,

    ||u||_mu^2            = b^3 * int |Delta v|^2 s^(N-1) ds
    int |u|^2** r^(N-1)dr = b^-1 * int |v|^2** s^(N-1) ds

so the two deficits differ by exactly ``b^-3``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .params import ParameterSet, hardy_coefficients
from .profiles import PowerChangeProfile, RadialProfile
from .quadrature import QuadratureConfig, hardy_form, inner_product_mu, lp_integral


@dataclass(frozen=True)
class CoefficientSet:
    """Coefficients of ``v'''' + A v'''/s + B v''/s^2 - C v'/s^3 + D v/s^4``."""

    A: float
    B: float
    C: float
    D: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return self.A, self.B, self.C, self.D


def raw_coefficients(params: ParameterSet) -> CoefficientSet:
    """Transformed ODE coefficients, evaluated term by term without simplification.

    The brackets cancel to ``O(1)`` but carry a factor up to ``b^-4``, which
    is huge as ``mu -> N-4``; they are therefore summed in exact rational
    arithmetic from the binary value of ``mu`` and rounded once at the end.
    """
    N = params.N
    mu = Fraction(params.mu)
    a, b = -mu / 2, 1 - mu / (N - 4)
    c1, c2 = hardy_coefficients(N, mu)
    e2 = (N - 1) * (N - 3) + c1
    e1 = (N - 3) * (N - 1 - c1)
    q = a * (a - 1) + (2 * a + b - 1) * (a + b - 2)

    A = ((3 * a + 3 * b - 3) + (a + 3 * b - 3) + 2 * (N - 1)) / b
    B = (q + (3 * a + 3 * b - 3) * (a + 2 * b - 3)
         + 2 * (N - 1) * (3 * a + 3 * b - 3) + e2) / b ** 2
    # the v' coefficient enters the equation with a minus sign
    C = -(q * (a + b - 3) + a * (a - 1) * (a - 2)
          + 2 * (N - 1) * q + e2 * (2 * a + b - 1) - e1) / b ** 3
    D = (a * (a - 1) * (a - 2) * (a - 3) + 2 * (N - 1) * a * (a - 1) * (a - 2)
         + e2 * a * (a - 1) - e1 * a + c2) / b ** 4
    return CoefficientSet(float(A), float(B), float(C), float(D))


def collapsed_coefficients(N: int) -> CoefficientSet:
    """Closed form of :func:`raw_coefficients`; independent of ``mu``."""
    return CoefficientSet(2.0 * (N - 1), float((N - 1) * (N - 3)), float((N - 1) * (N - 3)), 0.0)


def energy_jacobian(params: ParameterSet) -> float:
    """``||u||_mu^2 / ||Delta v||^2``."""
    return params.b ** 3


def lebesgue_jacobian(params: ParameterSet) -> float:
    """``int |u|^2** / int |v|^2**``."""
    return 1.0 / params.b


def push_forward(u: RadialProfile, params: ParameterSet) -> RadialProfile:
    """``v(s) = s^(-a/b) u(s^(1/b))``."""
    return PowerChangeProfile(u, -params.a / params.b, 1.0 / params.b)


def pull_back(v: RadialProfile, params: ParameterSet) -> RadialProfile:
    """``u(r) = r^a v(r^b)``."""
    return PowerChangeProfile(v, params.a, params.b)


def weighted_deficit(u: RadialProfile, params: ParameterSet, cfg: QuadratureConfig) -> float:
    crit = lp_integral(u, params.two_crit, params.N, cfg)
    return inner_product_mu(u, u, params, cfg) - params.s_mu_radial * crit ** (2.0 / params.two_crit)


def unweighted_deficit(v: RadialProfile, params: ParameterSet, cfg: QuadratureConfig) -> float:
    crit = lp_integral(v, params.two_crit, params.N, cfg)
    return hardy_form(v, v, params.N, 0.0, 0.0, cfg) - params.s0_radial * crit ** (2.0 / params.two_crit)


def deficit_comparison(u: RadialProfile, params: ParameterSet, cfg: QuadratureConfig | None = None,
                       tol: float = 1e-8):
    """Compare the deficit of ``u`` with that of its push-forward.

    Returns
    -------
    deficit_unweighted, deficit_weighted : float
        Radial deficits (sphere area omitted, constants rescaled).
    ratio_bound_ok : bool
        ``deficit_unweighted <= b^-3 * deficit_weighted + tol``.
    """
    cfg = cfg or QuadratureConfig()
    dw = weighted_deficit(u, params, cfg)
    du = unweighted_deficit(push_forward(u, params), params, cfg)
    return du, dw, bool(du <= params.b ** -3 * dw + tol)
