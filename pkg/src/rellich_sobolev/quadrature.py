"""Weighted radial quadrature in the logarithmic variable.

All integrals are one-dimensional, ``int_0^inf F(r) r^(N-1) dr`` with the
area of S^{N-1} left out.  They are evaluated as integrals in
``t = log r`` on composite Gauss-Legendre panels (or a sinh-mapped
trapezoid rule), with the window grown until the discarded tails are
negligible and the result confirmed by doubling the node count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .params import ParameterSet
from .profiles import RadialProfile

PANEL_NODES = 16
MAX_DOUBLINGS = 5


class QuadratureError(RuntimeError):
    pass


class NonConvergenceError(QuadratureError):
    """Repeated node doubling never settled within 10*rel_tol."""


class DivergenceError(QuadratureError):
    """The integrand is not integrable, or its tails do not shrink."""


@dataclass(frozen=True)
class QuadratureConfig:
    node_count: int = 2048
    rel_tol: float = 1e-10
    r_min: float = 1e-6
    r_max: float = 1e6
    mapping: str = "log_uniform"

    def __post_init__(self):
        if self.node_count < 16:
            raise ValueError("node_count must be >= 16")
        if not (0 < self.r_min < 1 < self.r_max):
            raise ValueError("need 0 < r_min < 1 < r_max")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.mapping not in ("log_uniform", "double_exponential"):
            raise ValueError(f"unknown mapping {self.mapping!r}")

    @property
    def window_tol(self) -> float:
        # tails are cut well below the requested accuracy
        return self.rel_tol * 1e-4


@lru_cache(maxsize=8)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def panel_rule(lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule with ``n`` nodes (rounded up to panels)."""
    panels = max(1, -(-n // PANEL_NODES))
    x, w = _leggauss(PANEL_NODES)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return t, wt


def sinh_rule(lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid rule in ``x`` for ``t = mid + c sinh(x)`` covering ``[lo, hi]``."""
    mid = 0.5 * (lo + hi)
    c = 2.0
    X = math.asinh(0.5 * (hi - lo) / c)
    x = np.linspace(-X, X, n)
    h = x[1] - x[0]
    t = mid + c * np.sinh(x)
    w = h * c * np.cosh(x)
    w[0] *= 0.5
    w[-1] *= 0.5
    return t, w


def make_rule(lo, hi, n, mapping="log_uniform"):
    if mapping == "double_exponential":
        return sinh_rule(lo, hi, n)
    return panel_rule(lo, hi, n)


@dataclass
class IntegralEstimate:
    value: float
    error: float
    scale: float
    window: tuple[float, float]
    nodes: int


def integrate_log(g, cfg: QuadratureConfig, window=None, full_output=False):
    """Integrate ``g(t)`` over the real line.

    ``g`` is vectorized in ``t``.  ``window`` is an initial interval that
    contains the bulk of the integrand; it is widened to cover
    ``[log r_min, log r_max]`` and then grown until the tails are negligible.
    """
    lo, hi = (math.log(cfg.r_min), math.log(cfg.r_max))
    if window is not None:
        lo, hi = min(lo, window[0]), max(hi, window[1])
    n = cfg.node_count
    width0 = hi - lo

    def quad(a, b, nodes):
        t, w = make_rule(a, b, nodes, cfg.mapping)
        vals = g(t)
        if not np.all(np.isfinite(vals)):
            raise DivergenceError(f"integrand not finite on [{a:.3g}, {b:.3g}]")
        return float(vals @ w), float(np.abs(vals) @ w)

    value, scale = quad(lo, hi, n)
    prev_tail = math.inf
    grows = 0
    for _ in range(12):
        step = 0.5 * (hi - lo)
        extra = max(PANEL_NODES, int(n * step / (hi - lo)))
        tl, sl = quad(lo - step, lo, extra)
        tr, sr = quad(hi, hi + step, extra)
        tail = sl + sr
        if tail <= 1e-3 * cfg.rel_tol * max(scale, 1e-300):
            break
        if tail >= prev_tail:
            grows += 1
            if grows >= 2:
                raise DivergenceError("tail contribution does not shrink as the window grows")
        prev_tail = tail
        lo, hi = lo - step, hi + step
        n = int(n * (hi - lo) / (hi - lo - 2 * step))
        value, scale = quad(lo, hi, n)
    else:
        raise DivergenceError("window growth limit reached without negligible tails")

    if scale == 0.0:
        est = IntegralEstimate(0.0, 0.0, 0.0, (lo, hi), n)
        return est if full_output else 0.0
    for _ in range(MAX_DOUBLINGS):
        fine, _ = quad(lo, hi, 2 * n)
        err = abs(fine - value)
        n *= 2
        if err <= 10 * cfg.rel_tol * scale:
            break
        value = fine
    else:
        raise NonConvergenceError(
            f"node doubling changed the integral by {err / scale:.3e} (relative to "
            f"int|g|); rel_tol={cfg.rel_tol:.1e}, nodes={n}, window=[{lo:.1f}, {hi:.1f}], "
            f"initial width {width0:.1f}"
        )
    est = IntegralEstimate(fine, err, scale, (lo, hi), n)
    return est if full_output else fine


def _union(*wins):
    return min(w[0] for w in wins), max(w[1] for w in wins)


def integrate_radial(f, N: int, p: int, cfg: QuadratureConfig | None = None, decay=None) -> float:
    """``int_0^inf f(r) r^(N-1-p) dr``.

    ``f`` is a :class:`RadialProfile` (its value channel is used) or a
    vectorized callable of ``r``.  For callables, ``decay=(alpha0, alpha_inf)``
    may describe ``f ~ r^alpha0`` at 0 and ``f ~ r^-alpha_inf`` at infinity.
    """
    cfg = cfg or QuadratureConfig()
    shift = N - p
    if isinstance(f, RadialProfile):
        win = f.window(shift, cfg.window_tol)
        return integrate_log(lambda t: f.theta(t, shift, 0)[0], cfg, win)

    window = None
    if decay is not None:
        rho0 = shift + decay[0]
        rho1 = decay[1] - shift
        if rho0 <= 0 or rho1 <= 0:
            raise DivergenceError(f"integrand with decay {decay} is not integrable for N={N}, p={p}")
        L = math.log(1.0 / cfg.window_tol)
        window = (-L / rho0 if math.isfinite(rho0) else -1.0,
                  L / rho1 if math.isfinite(rho1) else 1.0)

    def g(t):
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            ft = np.asarray(f(np.exp(t)), dtype=float) * np.ones_like(t)
            return np.where(ft == 0.0, 0.0, ft * np.exp(shift * t))

    return integrate_log(g, cfg, window)


def form_integrand(th_u: np.ndarray, th_v: np.ndarray, N: int, c1: float, c2: float) -> np.ndarray:
    """Pointwise integrand of the mu-form from shift-(N-4)/2 theta channels.

    ``(Delta u)(Delta v) r^(N-1) dr`` becomes ``(L u)(L v) dt`` with
    ``L = theta^2 + (N-2) theta``; the Hardy terms become
    ``theta u theta v dt`` and ``u v dt``.
    """
    Lu = th_u[2] + (N - 2) * th_u[1]
    Lv = th_v[2] + (N - 2) * th_v[1]
    return Lu * Lv - c1 * th_u[1] * th_v[1] + c2 * th_u[0] * th_v[0]


def hardy_form(u: RadialProfile, v: RadialProfile, N: int, c1: float, c2: float,
               cfg: QuadratureConfig | None = None) -> float:
    """``int Du Dv - c1 int u'v'/r^2 + c2 int uv/r^4`` (radial, no sphere area)."""
    cfg = cfg or QuadratureConfig()
    m = 0.5 * (N - 4)
    win = _union(u.window(m, cfg.window_tol), v.window(m, cfg.window_tol))
    return integrate_log(
        lambda t: form_integrand(u.theta(t, m, 2), v.theta(t, m, 2), N, c1, c2), cfg, win
    )


def inner_product_mu(u: RadialProfile, v: RadialProfile, params: ParameterSet,
                     cfg: QuadratureConfig | None = None) -> float:
    """Radial Hardy-Rellich inner product ``<u, v>_mu``."""
    return hardy_form(u, v, params.N, params.c1, params.c2, cfg)


def norm_mu_sq(u: RadialProfile, params: ParameterSet, cfg: QuadratureConfig | None = None) -> float:
    return inner_product_mu(u, u, params, cfg)


def lp_integral(u: RadialProfile, exponent: float, N: int, cfg: QuadratureConfig | None = None) -> float:
    """``int |u|^exponent r^(N-1) dr``."""
    if exponent < 1:
        raise ValueError("exponent must be >= 1")
    cfg = cfg or QuadratureConfig()
    shift = N / exponent
    win = u.window(shift, cfg.window_tol ** (1.0 / exponent))
    return integrate_log(lambda t: np.abs(u.theta(t, shift, 0)[0]) ** exponent, cfg, win)


def lp_norm(u: RadialProfile, exponent: float, N: int, cfg: QuadratureConfig | None = None) -> float:
    """``(int |u|^exponent r^(N-1) dr)^(1/exponent)``."""
    return lp_integral(u, exponent, N, cfg) ** (1.0 / exponent)


@dataclass(frozen=True)
class FixedRule:
    """A frozen composite rule ``(t, w)`` for repeated integrals over shared channels.

    Built once by :meth:`covering`, which takes node density and window from
    the adaptive integrator, so sums over this rule carry the same accuracy.
    """

    t: np.ndarray
    w: np.ndarray

    @classmethod
    def covering(cls, profiles, params: ParameterSet, cfg: QuadratureConfig | None = None,
                 pad: float = 0.0) -> "FixedRule":
        """Rule that resolves ``||p||_mu^2`` for each profile on a window padded by ``pad``."""
        cfg = cfg or QuadratureConfig()
        density, lo, hi = 0.0, math.inf, -math.inf
        for p in profiles:
            m = params.m
            est = integrate_log(
                lambda t: form_integrand(p.theta(t, m, 2), p.theta(t, m, 2), params.N, params.c1, params.c2),
                cfg, p.window(m, cfg.window_tol), full_output=True,
            )
            density = max(density, est.nodes / (est.window[1] - est.window[0]))
            lo, hi = min(lo, est.window[0]), max(hi, est.window[1])
        lo, hi = lo - pad, hi + pad
        t, w = make_rule(lo, hi, int(math.ceil(density * (hi - lo))), cfg.mapping)
        return cls(t, w)

    def channels(self, u: RadialProfile, shift: float, order: int = 2) -> np.ndarray:
        return u.theta(self.t, shift, order)

    def integrate(self, values: np.ndarray) -> float:
        return float(values @ self.w)
