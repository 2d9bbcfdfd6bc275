"""The explicit extremal family and its Euler-Lagrange equation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ParameterSet
from .profiles import DilationGenerator, PowerProfile, RadialProfile
from .quadrature import QuadratureConfig, inner_product_mu, lp_integral


class ContractViolation(AssertionError):
    """A computed quantity missed the identity it is supposed to satisfy."""


@dataclass(frozen=True)
class ExtremalBubble:
    """``U_{mu,lam}(r) = lam^m K (lam r)^a (1 + (lam r)^(2b))^(-m)``."""

    params: ParameterSet
    lam: float
    profile: PowerProfile

    def __call__(self, r):
        return self.profile(r)

    def generator(self) -> RadialProfile:
        """``m U + r U'``; equals ``lam d/dlam U_{mu,lam}``."""
        return DilationGenerator(self.profile, self.params.m)


def make_bubble(params: ParameterSet, lam: float = 1.0) -> ExtremalBubble:
    if lam <= 0:
        raise ValueError(f"scaling must be positive, got {lam}")
    p = params
    amp = p.k_coeff * lam ** (p.m + p.a)
    prof = PowerProfile(amp, p.a, p.b, p.m, scale=1.0 / lam)
    return ExtremalBubble(p, float(lam), prof)


def generator_profile(params: ParameterSet) -> RadialProfile:
    """Scaling generator ``(N-4)/2 U_mu + r U_mu'``."""
    return make_bubble(params).generator()


def el_operator(u: RadialProfile, params: ParameterSet, r) -> np.ndarray:
    """Linear part of the radial Euler-Lagrange operator applied to ``u``."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0):
        raise ValueError("the radial equation is singular at r <= 0")
    N, c1, c2 = params.N, params.c1, params.c2
    d = u.eval(r)
    return (
        d[4]
        + 2 * (N - 1) * d[3] / r
        + ((N - 1) * (N - 3) + c1) * d[2] / r ** 2
        - (N - 3) * (N - 1 - c1) * d[1] / r ** 3
        + c2 * d[0] / r ** 4
    )


def el_residual(u: RadialProfile, params: ParameterSet, r) -> np.ndarray:
    """Residual of the radial equation, ``L u - u^((N+4)/(N-4))``."""
    lin = el_operator(u, params, r)
    val = u.eval(np.atleast_1d(r))[0]
    return lin - np.sign(val) * np.abs(val) ** (params.two_crit - 1)


def relative_el_residual(u: RadialProfile, params: ParameterSet, r) -> np.ndarray:
    """``|residual| / |u|^(2**-1)``; invariant under the critical scaling."""
    val = u.eval(np.atleast_1d(r))[0]
    return np.abs(el_residual(u, params, r)) / np.abs(val) ** (params.two_crit - 1)


def equality_case_check(params: ParameterSet, cfg: QuadratureConfig | None = None):
    """Both sides of the sharp inequality at ``U_mu``.

    Returns ``(lhs, rhs, gap)`` in radial units (sphere area omitted on
    both sides, ``S_mu`` rescaled accordingly).
    """
    cfg = cfg or QuadratureConfig()
    U = make_bubble(params).profile
    lhs = inner_product_mu(U, U, params, cfg)
    crit = lp_integral(U, params.two_crit, params.N, cfg)
    rhs = params.s_mu_radial * crit ** (2.0 / params.two_crit)
    return lhs, rhs, lhs - rhs


def sharp_constant_identity(params: ParameterSet, cfg: QuadratureConfig | None = None,
                            rtol: float | None = None) -> float:
    """``||U_mu||_mu^(2 - 4/2**)`` over the whole space.

    The value should equal ``params.s_mu``; a :class:`ContractViolation` is
    raised when the relative mismatch exceeds ``rtol`` (default
    ``10 * cfg.rel_tol``).
    """
    cfg = cfg or QuadratureConfig()
    U = make_bubble(params).profile
    full = params.omega * inner_product_mu(U, U, params, cfg)
    value = full ** (1.0 - 2.0 / params.two_crit)
    tol = 10 * cfg.rel_tol if rtol is None else rtol
    if abs(value / params.s_mu - 1.0) > tol:
        raise ContractViolation(
            f"||U||^(2-4/2**) = {value!r} but S_mu = {params.s_mu!r} (rtol {tol:.1e})"
        )
    return value
