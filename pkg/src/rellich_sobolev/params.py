"""Admissible parameters and closed-form constants.

Everything here is a pure function of the dimension ``N`` and the Hardy
strength ``mu``.  Integrals elsewhere in the package are one-dimensional
radial integrals without the area of the unit sphere, so the sharp
constants are also provided in that "radial" normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


class DomainError(ValueError):
    """Raised when (N, mu) lies outside N >= 5, 0 < mu < N - 4."""


def check_domain(N: int, mu: float) -> None:
    if int(N) != N or N < 5:
        raise DomainError(f"dimension must be an integer >= 5, got N={N}")
    if not (0.0 < mu < N - 4):
        raise DomainError(f"mu must lie in (0, N-4) = (0, {N - 4}), got mu={mu}")


def gamma_product(N: int) -> int:
    """Return ``(N-4)(N-2)N(N+2)`` as an exact integer."""
    if int(N) != N or N < 5:
        raise DomainError(f"gamma_product needs an integer N >= 5, got {N}")
    N = int(N)
    return (N - 4) * (N - 2) * N * (N + 2)


def sphere_eigen(k: int, N: int) -> tuple[int, int]:
    """Eigenvalue and multiplicity of degree-``k`` harmonics on S^{N-1}.

    Returns ``(k(N-2+k), m_k)`` with
    ``m_k = (N+2k-2)(N+k-3)! / ((N-2)! k!)``.
    """
    if k < 0:
        raise DomainError(f"harmonic degree must be >= 0, got {k}")
    if N < 5:
        raise DomainError(f"N must be >= 5, got {N}")
    lam = k * (N - 2 + k)
    mult = (N + 2 * k - 2) * math.factorial(N + k - 3) // (math.factorial(N - 2) * math.factorial(k))
    return lam, mult


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere S^{N-1} in R^N."""
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


def critical_exponent(N: int) -> float:
    return 2.0 * N / (N - 4)


def sobolev_constant_unweighted(N: int) -> float:
    """Sharp constant of ``int |Delta u|^2 >= S_0 ||u||_{2**}^2`` on R^N."""
    return (
        math.pi ** 2
        * gamma_product(N)
        * math.exp((4.0 / N) * (math.lgamma(N / 2) - math.lgamma(N)))
    )


@dataclass(frozen=True)
class ParameterSet:
    """All constants attached to an admissible pair (N, mu).

    ``s0`` and ``s_mu`` are the full-space sharp constants.  ``s0_radial``
    and ``s_mu_radial`` are the same constants rescaled for integrals that
    omit the sphere area, i.e. ``S * |S^{N-1}|^(-4/N)``.
    """

    N: int
    mu: float
    a: float
    b: float
    two_crit: float
    c1: float
    c2: float
    s0: float
    s_mu: float
    k_coeff: float
    omega: float

    @property
    def m(self) -> float:
        """Critical scaling exponent (N-4)/2."""
        return 0.5 * (self.N - 4)

    @property
    def s0_radial(self) -> float:
        return self.s0 * self.omega ** (-4.0 / self.N)

    @property
    def s_mu_radial(self) -> float:
        return self.s_mu * self.omega ** (-4.0 / self.N)

    @property
    def gamma_N(self) -> int:
        return gamma_product(self.N)

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "mu": self.mu,
            "a": self.a,
            "b": self.b,
            "two_crit": self.two_crit,
            "c1": self.c1,
            "c2": self.c2,
            "s0": self.s0,
            "s_mu": self.s_mu,
            "s0_radial": self.s0_radial,
            "s_mu_radial": self.s_mu_radial,
            "k_coeff": self.k_coeff,
            "sphere_area": self.omega,
        }


def hardy_coefficients(N: int, mu: float) -> tuple[float, float]:
    """Return (C_{mu,1}, C_{mu,2}); defined for any real mu, no domain check.

    Exact when ``mu`` is a :class:`~fractions.Fraction`.
    """
    q = mu * (2 * (N - 4) - mu)
    c1 = Fraction(N * N - 4 * N + 8, 2 * (N - 4) ** 2) * q
    c2 = Fraction(N * N, 16 * (N - 4) ** 2) * q * q - Fraction(N - 2, 2) * q
    return c1, c2


def derive_constants(N: int, mu: float) -> ParameterSet:
    """Build the :class:`ParameterSet` for ``(N, mu)``.

    Raises
    ------
    DomainError
        If ``N < 5`` or ``mu`` is outside ``(0, N-4)``.
    """
    check_domain(N, mu)
    N = int(N)
    mu = float(mu)
    b = 1.0 - mu / (N - 4)
    c1, c2 = hardy_coefficients(N, mu)
    s0 = sobolev_constant_unweighted(N)
    s_mu = b ** (4.0 - 4.0 / N) * s0
    k_coeff = (b ** 4 * gamma_product(N)) ** ((N - 4) / 8.0)
    return ParameterSet(
        N=N,
        mu=mu,
        a=-0.5 * mu,
        b=b,
        two_crit=critical_exponent(N),
        c1=c1,
        c2=c2,
        s0=s0,
        s_mu=s_mu,
        k_coeff=k_coeff,
        omega=sphere_area(N),
    )


def lift_gamma_pair(N: int, k: int) -> tuple[Fraction, int]:
    """Exact ``((2**-1) Gamma_N, Gamma_{N+2k})``."""
    lhs = Fraction(N + 4, N - 4) * gamma_product(N)
    return lhs, gamma_product(N + 2 * k)
