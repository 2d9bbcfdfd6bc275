"""Linearized eigenvalue problem at the extremal, one harmonic sector at a time.

For a degree-``k`` harmonic the perturbation is ``phi(r) Y_k``.  Writing
``w(tau) = r^m phi(r)`` with ``tau = b log r`` and ``m = (N-4)/2``, the
sector quadratic form and the mass become

    Q_k(phi) = b^3 int w'' ^2 + (alpha1/b^2) w'^2 + (alpha0/b^4) w^2 dtau
    M(phi)   = b^3 (Gamma_N / 16) int sech(tau)^4 w^2 dtau

with constant ``alpha1, alpha0``.  The stiffness is therefore a Fourier
multiplier and is discretized spectrally on a periodic grid ``|tau| < L``;
the mass is a diagonal trapezoid weight.  Eigenvalues solve
``Q_k x = nu M x`` with mass weight ``U^(2**-2)``, so that ``nu_1 = 1`` and
``nu_2 = 2** - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .extremals import generator_profile, make_bubble
from .params import ParameterSet, sphere_eigen
from .profiles import PeriodicLogProfile, RadialProfile
from .quadrature import QuadratureConfig, _union, integrate_log, inner_product_mu


class AssemblyError(RuntimeError):
    pass


class EigenSolveError(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Periodic grid of ``n`` points on ``tau in [-L, L)``."""

    n: int = 800
    half_width: float = 40.0

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ValueError(f"grid size must be an even integer >= 8, got {self.n}")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.n

    def nodes(self) -> np.ndarray:
        return -self.half_width + self.h * np.arange(self.n)

    def refined(self) -> "GridSpec":
        return GridSpec(2 * self.n, self.half_width)

    def widened(self) -> "GridSpec":
        return GridSpec(2 * self.n, 2.0 * self.half_width)


def sector_coefficients(k: int, params: ParameterSet) -> tuple[float, float]:
    """``(alpha1, alpha0)`` of ``Q_k = int w''^2 + alpha1 w'^2 + alpha0 w^2 dt``."""
    lam, _ = sphere_eigen(k, params.N)
    N, m, c1 = params.N, params.m, params.c1
    c = N * (N - 4) / 4.0 + lam
    alpha1 = 4.0 + 2.0 * c - c1
    alpha0 = c * c - c1 * (m * m + lam) + params.c2
    return alpha1, alpha0


@dataclass(frozen=True)
class SectorOperator:
    k: int
    params: ParameterSet
    grid: np.ndarray
    stiffness: np.ndarray
    mass: np.ndarray
    grid_spec: GridSpec | None = None

    def profile(self, x: np.ndarray) -> RadialProfile:
        """Radial profile whose samples of ``r^m phi`` are ``x``."""
        if self.grid_spec is None:
            raise AssemblyError("operator carries no grid")
        p = self.params
        return PeriodicLogProfile(x, self.grid_spec.half_width, p.b, p.m)


def _symbol(k: int, params: ParameterSet, zeta: np.ndarray) -> np.ndarray:
    alpha1, alpha0 = sector_coefficients(k, params)
    b = params.b
    return b ** 3 * (zeta ** 4 + alpha1 / b ** 2 * zeta ** 2 + alpha0 / b ** 4)


def assemble_sector(k: int, params: ParameterSet, grid_spec: GridSpec | None = None) -> SectorOperator:
    """Discretize ``Q_k`` and the mass on a periodic ``tau`` grid."""
    if k < 0:
        raise ValueError("k must be >= 0")
    gs = grid_spec or GridSpec()
    n, h = gs.n, gs.h
    zeta = np.pi * np.arange(n // 2 + 1) / gs.half_width
    sym = _symbol(k, params, zeta)
    if sym.min() <= 0:
        raise AssemblyError(f"sector {k} form is not positive (symbol min {sym.min():.3e})")
    col = np.fft.irfft(sym, n)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    stiffness = h * col[idx]
    tau = gs.nodes()
    weight = params.b ** 3 * params.gamma_N / 16.0 / np.cosh(tau) ** 4
    mass = np.diag(h * weight)
    return SectorOperator(k, params, tau, stiffness, mass, gs)


@dataclass
class SpectrumResult:
    sector_k: int
    eigenvalues: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    grid_size: int
    operator: SectorOperator | None = field(default=None, repr=False)

    @property
    def eigenvectors(self) -> list[RadialProfile]:
        return [self.operator.profile(x) for x in self.vectors.T]

    def to_record(self) -> dict:
        return {
            "k": self.sector_k,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "residuals": [float(v) for v in self.residuals],
            "grid_size": self.grid_size,
        }


def solve_generalized(op, count: int) -> SpectrumResult:
    """Lowest ``count`` eigenpairs of ``stiffness x = nu mass x``.

    The mass is nearly singular in the far field while the stiffness is
    well conditioned, so the pencil is solved as ``mass x = theta stiffness x``
    (Cholesky of the stiffness) for the largest ``theta = 1/nu``.
    Vectors are normalized to unit mass with their largest entry positive.
    """
    A = np.asarray(op.stiffness, dtype=float)
    B = np.asarray(op.mass, dtype=float)
    n = A.shape[0]
    if not 1 <= count <= n:
        raise ValueError(f"count must be in [1, {n}], got {count}")
    try:
        theta, X = linalg.eigh(B, A, subset_by_index=[n - count, n - 1])
    except linalg.LinAlgError as exc:
        raise EigenSolveError(f"generalized eigensolve failed for n={n}: {exc}") from exc
    if theta.min() <= 0:
        raise EigenSolveError(f"non-positive mass Rayleigh quotient {theta.min():.3e}")
    order = np.argsort(-theta)
    nu = 1.0 / theta[order]
    X = X[:, order]
    X = X / np.sqrt(np.einsum("ij,ij->j", X, B @ X))
    pivots = X[np.argmax(np.abs(X), axis=0), np.arange(count)]
    X = X * np.sign(pivots)
    BX = B @ X
    res = np.linalg.norm(A @ X - BX * nu, axis=0) / np.linalg.norm(BX, axis=0)
    return SpectrumResult(getattr(op, "k", 0), nu, X, res, n,
                          op if isinstance(op, SectorOperator) else None)


def sector_spectrum(k: int, params: ParameterSet, count: int = 3,
                    grid_spec: GridSpec | None = None) -> SpectrumResult:
    return solve_generalized(assemble_sector(k, params, grid_spec), count)


def _sector_integrand(k, th_u, th_v, params):
    lam, _ = sphere_eigen(k, params.N)
    N = params.N
    Lu = th_u[2] + (N - 2) * th_u[1] - lam * th_u[0]
    Lv = th_v[2] + (N - 2) * th_v[1] - lam * th_v[0]
    return (Lu * Lv - params.c1 * (th_u[1] * th_v[1] + lam * th_u[0] * th_v[0])
            + params.c2 * th_u[0] * th_v[0])


def sector_form(k: int, phi: RadialProfile, psi: RadialProfile, params: ParameterSet,
                cfg: QuadratureConfig | None = None) -> float:
    """Sector-``k`` quadratic form by quadrature.

    ``int (D_k phi)(D_k psi) r^(N-1) dr - C1 int (phi' psi' + lam_k phi psi / r^2) r^(N-3) dr
    + C2 int phi psi r^(N-5) dr`` with ``D_k = Delta_r - lam_k / r^2``.
    """
    cfg = cfg or QuadratureConfig()
    m = params.m
    win = _union(phi.window(m, cfg.window_tol), psi.window(m, cfg.window_tol))
    return integrate_log(
        lambda t: _sector_integrand(k, phi.theta(t, m, 2), psi.theta(t, m, 2), params), cfg, win
    )


def sector_operator_apply(k: int, phi: RadialProfile, params: ParameterSet, r) -> np.ndarray:
    """Strong form of the sector operator (linear part) at radii ``r``."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    lam, _ = sphere_eigen(k, params.N)
    N, c1, c2 = params.N, params.c1, params.c2
    d = phi.eval(r)
    radial = (
        d[4]
        + 2 * (N - 1) * d[3] / r
        + ((N - 1) * (N - 3) + c1) * d[2] / r ** 2
        - (N - 3) * (N - 1 - c1) * d[1] / r ** 3
        + c2 * d[0] / r ** 4
    )
    angular = 2 * d[2] + 2 * (N - 3) * d[1] / r - (2 * (N - 4) + lam - c1) * d[0] / r ** 2
    return radial - lam * angular / r ** 2


def strong_form_pairing(k: int, phi: RadialProfile, psi: RadialProfile, params: ParameterSet,
                        cfg: QuadratureConfig | None = None) -> float:
    """``int (L_k phi) psi r^(N-1) dr`` from the strong form."""
    cfg = cfg or QuadratureConfig()
    N = params.N
    win = _union(phi.window(0.5 * N, cfg.window_tol), psi.window(0.5 * N, cfg.window_tol))

    def g(t):
        r = np.exp(t)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            val = sector_operator_apply(k, phi, params, r) * psi(r) * r ** N
        return np.where(np.isfinite(val), val, 0.0)

    return integrate_log(g, cfg, win)


def mass_form(phi: RadialProfile, psi: RadialProfile, params: ParameterSet,
              cfg: QuadratureConfig | None = None) -> float:
    """``int U^(2**-2) phi psi r^(N-1) dr``."""
    cfg = cfg or QuadratureConfig()
    U = make_bubble(params).profile
    m = params.m
    power = params.two_crit - 2.0
    win = _union(phi.window(m, cfg.window_tol), psi.window(m, cfg.window_tol))

    def g(t):
        wU = U.theta(t, m, 0)[0]
        return wU ** power * phi.theta(t, m, 0)[0] * psi.theta(t, m, 0)[0]

    return integrate_log(g, cfg, win)


def mu_correlation(u: RadialProfile, v: RadialProfile, params: ParameterSet,
                   cfg: QuadratureConfig | None = None) -> float:
    """``|<u, v>_mu| / (||u||_mu ||v||_mu)``."""
    uv = inner_product_mu(u, v, params, cfg)
    uu = inner_product_mu(u, u, params, cfg)
    vv = inner_product_mu(v, v, params, cfg)
    return abs(uv) / math.sqrt(uu * vv)


def eigenfunction_alignment(result: SpectrumResult, params: ParameterSet,
                            cfg: QuadratureConfig | None = None, index: int = 1,
                            target: RadialProfile | None = None) -> float:
    """Correlation of eigenvector ``index`` with ``target`` in the mu-form.

    The default pairs the second eigenvector with the scaling generator;
    ``index=0`` with the default target compares the first with ``U_mu``.
    """
    if target is None:
        target = make_bubble(params).profile if index == 0 else generator_profile(params)
    return mu_correlation(result.eigenvectors[index], target, params, cfg)


def lift_conditions(k: int, params: ParameterSet) -> tuple[int, int, float]:
    """Scalar conditions excluding sector ``k >= 1`` from the ``2** - 1`` eigenspace.

    Returns ``((2**-1) Gamma_N, Gamma_{N+2k}, positivity)`` where
    ``positivity = (b^-2 - 1) lam_k [N(N-4) + (2 lam_k - 8) b^-2 + 2 lam_k]``.
    """
    if k < 1:
        raise ValueError("lift conditions concern k >= 1")
    N = params.N
    lam, _ = sphere_eigen(k, N)
    lhs = (N + 4) * (N - 2) * N * (N + 2)
    rhs = (N + 2 * k - 4) * (N + 2 * k - 2) * (N + 2 * k) * (N + 2 * k + 2)
    ib2 = params.b ** -2
    positivity = (ib2 - 1.0) * lam * (N * (N - 4) + (2 * lam - 8) * ib2 + 2 * lam)
    return lhs, rhs, positivity


@dataclass
class ConvergenceReport:
    base: np.ndarray
    refined: np.ndarray
    widened: np.ndarray

    @property
    def shift(self) -> float:
        """Largest relative eigenvalue change under refinement or widening."""
        d1 = np.abs(self.refined / self.base - 1.0)
        d2 = np.abs(self.widened / self.base - 1.0)
        return float(max(d1.max(), d2.max()))


def convergence_study(k: int, params: ParameterSet, count: int = 3,
                      grid_spec: GridSpec | None = None) -> ConvergenceReport:
    """Eigenvalues on the base grid, a refined grid and a wider grid."""
    gs = grid_spec or GridSpec()
    vals = [sector_spectrum(k, params, count, g).eigenvalues for g in (gs, gs.refined(), gs.widened())]
    return ConvergenceReport(*vals)
