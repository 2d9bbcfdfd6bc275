"""Deficit, distance to the extremal manifold, and the local stability ratio.

The manifold is ``{c U_lam : c real, lam > 0}``.  Dilation ``U -> U_lam`` is
a translation by ``log lam`` in ``t = log r`` for the shifted channels
``r^m theta^j U``, so every projection reduces to sums over one frozen
quadrature rule with cached channels.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import binom

from .extremals import generator_profile, make_bubble
from .params import ParameterSet
from .profiles import LogGaussianProfile, RadialProfile
from .quadrature import (
    FixedRule,
    QuadratureConfig,
    form_integrand,
    inner_product_mu,
    integrate_log,
    lp_integral,
)
from .spectrum import GridSpec, sector_spectrum

LOG_LAM_BOUNDS = (math.log(1e-3), math.log(1e3))
SEED_SCALES = (0.1, 1.0, 10.0)
DEFAULT_EPSILONS = (0.02, 0.01, 0.005)


class BoundaryWarning(UserWarning):
    """The optimal scaling sits on the edge of the search bracket."""


class SamplingDegeneracyError(RuntimeError):
    pass


def deficit(u: RadialProfile, params: ParameterSet, cfg: QuadratureConfig | None = None) -> float:
    """``||u||_mu^2 - S_mu (int |u|^2**)^(2/2**)`` in radial units."""
    cfg = cfg or QuadratureConfig()
    crit = lp_integral(u, params.two_crit, params.N, cfg)
    return inner_product_mu(u, u, params, cfg) - params.s_mu_radial * crit ** (2.0 / params.two_crit)


@dataclass(frozen=True)
class ManifoldProjection:
    c_star: float
    lam_star: float
    distance: float
    orth_residual_c: float
    orth_residual_lam: float


class _Projector:
    """Projection engine on a fixed rule with the bubble channels precomputed."""

    def __init__(self, params: ParameterSet, rule: FixedRule):
        self.params = params
        self.rule = rule
        self.U = make_bubble(params).profile
        m = params.m
        self.norm_U_sq = self.form(rule.channels(self.U, m, 2), rule.channels(self.U, m, 2))

    def form(self, a, b) -> float:
        p = self.params
        return self.rule.integrate(form_integrand(a, b, p.N, p.c1, p.c2))

    def bubble(self, s: float, order: int = 2) -> np.ndarray:
        # shifted channels of U_lam at t equal those of U at t + log lam
        return self.U.theta(self.rule.t + s, self.params.m, order)

    def _d(self, ch: np.ndarray, s: float, deriv: int) -> float:
        """``d^deriv/ds^deriv <u, U_{e^s}>``."""
        B = self.bubble(s, 2 + deriv)
        m = self.params.m
        # d/ds of a shifted channel j is m*ch_j + ch_{j+1}
        for _ in range(deriv):
            B = m * B[:-1] + B[1:]
        return self.form(ch, B[:3])

    def project(self, ch: np.ndarray) -> ManifoldProjection:
        lo, hi = LOG_LAM_BOUNDS
        grid = np.unique(np.concatenate([np.linspace(lo, hi, 121), np.log(SEED_SCALES)]))
        vals = np.array([abs(self._d(ch, s, 0)) for s in grid])
        i = int(np.argmax(vals))
        if i in (0, grid.size - 1):
            warnings.warn(f"optimal log-scaling at the search boundary ({grid[i]:.3f})", BoundaryWarning,
                          stacklevel=3)
            s = grid[i]
        else:
            res = minimize_scalar(lambda s: -abs(self._d(ch, s, 0)), bounds=(grid[i - 1], grid[i + 1]),
                                  method="bounded", options={"xatol": 1e-8})
            s = float(res.x)
            # Newton polish on the stationarity condition
            for _ in range(3):
                g1, g2 = self._d(ch, s, 1), self._d(ch, s, 2)
                if g2 == 0.0:
                    break
                step = g1 / g2
                if abs(step) > 1e-3:
                    break
                s -= step
                if abs(step) < 1e-14:
                    break
        f = self._d(ch, s, 0)
        c = f / self.norm_U_sq
        diff = ch - c * self.bubble(s)
        dist_sq = self.form(diff, diff)
        return ManifoldProjection(
            c_star=c,
            lam_star=math.exp(s),
            distance=math.sqrt(max(dist_sq, 0.0)),
            orth_residual_c=self.form(diff, self.bubble(s)),
            orth_residual_lam=self._d(ch, s, 1) - c * self._d(self.bubble(s), s, 1),
        )

    def brute_force(self, ch: np.ndarray, size: int = 41, rounds: int = 8) -> ManifoldProjection:
        norm_u_sq = self.form(ch, ch)
        cmax = 2.0 * math.sqrt(norm_u_sq / self.norm_U_sq)
        c_lo, c_hi = -cmax, cmax
        s_lo, s_hi = LOG_LAM_BOUNDS
        best = None
        for _ in range(rounds):
            cs = np.linspace(c_lo, c_hi, size)
            ss = np.linspace(s_lo, s_hi, size)
            f = np.array([self._d(ch, s, 0) for s in ss])
            D = norm_u_sq - 2.0 * cs[:, None] * f[None, :] + cs[:, None] ** 2 * self.norm_U_sq
            i, j = np.unravel_index(np.argmin(D), D.shape)
            best = (cs[i], ss[j], D[i, j])
            dc, ds = 2 * (cs[1] - cs[0]), 2 * (ss[1] - ss[0])
            c_lo, c_hi = cs[i] - dc, cs[i] + dc
            s_lo, s_hi = max(LOG_LAM_BOUNDS[0], ss[j] - ds), min(LOG_LAM_BOUNDS[1], ss[j] + ds)
        c, s = float(best[0]), float(best[1])
        diff = ch - c * self.bubble(s)
        return ManifoldProjection(c, math.exp(s), math.sqrt(max(self.form(diff, diff), 0.0)),
                                  self.form(diff, self.bubble(s)), math.nan)


def _rule_for(u: RadialProfile, params: ParameterSet, cfg: QuadratureConfig) -> FixedRule:
    U = make_bubble(params).profile
    return FixedRule.covering([u, U], params, cfg, pad=max(abs(x) for x in LOG_LAM_BOUNDS))


def project_to_manifold(u: RadialProfile, params: ParameterSet,
                        cfg: QuadratureConfig | None = None) -> ManifoldProjection:
    """Nearest point ``c* U_lam*`` to ``u`` in the mu-norm.

    ``c`` is eliminated in closed form; ``log lam`` is found by a scan over
    ``[log 1e-3, log 1e3]`` (seeded at 0.1, 1, 10), bounded golden-section
    refinement and a Newton polish of the tangency condition.
    """
    cfg = cfg or QuadratureConfig()
    rule = _rule_for(u, params, cfg)
    proj = _Projector(params, rule)
    return proj.project(rule.channels(u, params.m, 2))


def brute_force_projection(u: RadialProfile, params: ParameterSet, cfg: QuadratureConfig | None = None,
                           size: int = 41, rounds: int = 8) -> ManifoldProjection:
    """Reference projector: iterated ``size x size`` grid over ``(c, log lam)``."""
    cfg = cfg or QuadratureConfig()
    rule = _rule_for(u, params, cfg)
    proj = _Projector(params, rule)
    return proj.brute_force(rule.channels(u, params.m, 2), size, rounds)


def _taylor_remainder_density(wU: np.ndarray, ww: np.ndarray, eps: float, p: float) -> np.ndarray:
    """``wU^p [ |1+x|^p - 1 - p x - p(p-1)/2 x^2 ]`` with ``x = eps ww / wU``."""
    out = np.zeros_like(wU)
    pos = wU > 0
    x = np.zeros_like(wU)
    x[pos] = eps * ww[pos] / wU[pos]
    small = pos & (np.abs(x) < 0.25)
    xs = x[small]
    acc = np.zeros_like(xs)
    for j in range(3, 80):
        acc += binom(p, j) * xs ** j
    out[small] = wU[small] ** p * acc
    big = pos & ~small
    xb = x[big]
    out[big] = wU[big] ** p * (np.abs(1 + xb) ** p - 1 - p * xb - 0.5 * p * (p - 1) * xb ** 2)
    lone = ~pos
    out[lone] = np.abs(eps * ww[lone]) ** p
    return out


@dataclass(frozen=True)
class TaylorRecord:
    epsilon: float
    remainder: float
    scaled: float


def taylor_check(w: RadialProfile, eps_list, params: ParameterSet,
                 cfg: QuadratureConfig | None = None) -> list[TaylorRecord]:
    """Remainder of the second-order expansion of ``int |U + eps w|^2**``.

    ``R = int |U+eps w|^p - int U^p - eps p int U^(p-1) w - eps^2 p(p-1)/2 int U^(p-2) w^2``
    with ``p = 2**``, integrated pointwise so no cancellation occurs between
    separately computed integrals.
    """
    cfg = cfg or QuadratureConfig()
    U = make_bubble(params).profile
    p, m = params.two_crit, params.m
    win = w.window(m, cfg.window_tol)
    records = []
    for eps in eps_list:
        eps = float(eps)
        if eps == 0.0:
            records.append(TaylorRecord(0.0, 0.0, math.nan))
            continue
        R = integrate_log(
            lambda t: _taylor_remainder_density(U.theta(t, m, 0)[0], w.theta(t, m, 0)[0], eps, p), cfg, win
        )
        records.append(TaylorRecord(eps, R, R / eps ** 2))
    return records


@dataclass(frozen=True)
class DeficitSample:
    seed: int
    direction_id: int
    epsilon: float
    deficit: float
    distance: float
    ratio: float
    c_star: float = math.nan
    lam_star: float = math.nan

    CSV_FIELDS = ("seed", "direction_id", "epsilon", "deficit", "distance", "ratio")

    def csv_row(self) -> list:
        return [self.seed, self.direction_id, repr(self.epsilon), repr(self.deficit),
                repr(self.distance), repr(self.ratio)]


@dataclass
class RatioStudy:
    min_ratio: float
    bound: float
    samples: list[DeficitSample]
    nu2: float
    nu3: float
    eigen_direction_ratio: float = math.nan
    epsilon: float = math.nan
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.min_ratio >= self.bound * (1 - 0.05)


def _orthonormalize(ch: np.ndarray, basis, form) -> np.ndarray:
    before = math.sqrt(form(ch, ch))
    for b, bb in basis:
        ch = ch - form(ch, b) / bb * b
    after = form(ch, ch)
    if not after > (1e-8 * before) ** 2:
        raise SamplingDegeneracyError("direction collapsed under orthogonalization")
    return ch / math.sqrt(after)


def local_ratio_study(params: ParameterSet, cfg: QuadratureConfig | None = None, sample_count: int = 50,
                      seed: int = 0, epsilons=DEFAULT_EPSILONS, grid_spec: GridSpec | None = None,
                      eigen_count: int = 10, workers: int = 1) -> RatioStudy:
    """Deficit-to-distance ratios near ``U_mu``.

    Directions are k=0 eigenvectors ``e_3, e_4, ...`` followed by random
    Gaussian combinations of them, each orthonormalized in the mu-form against
    ``U_mu`` and the scaling generator.  For every direction and ``eps`` the
    ratio ``deficit / distance^2`` of ``U + eps w`` is recorded.  ``min_ratio``
    is taken over the smallest ``eps``; ``bound = 1 - nu_2/nu_3``.
    """
    cfg = cfg or QuadratureConfig()
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    sol = sector_spectrum(0, params, eigen_count + 2, grid_spec)
    nu2, nu3 = float(sol.eigenvalues[1]), float(sol.eigenvalues[2])
    eig = sol.eigenvectors[2:]
    U = make_bubble(params).profile
    G = generator_profile(params)
    rule = FixedRule.covering([U, *eig], params, cfg, pad=max(abs(x) for x in LOG_LAM_BOUNDS))
    proj = _Projector(params, rule)
    m, p = params.m, params.two_crit
    chU = rule.channels(U, m, 2)
    chG = rule.channels(G, m, 2)
    basis = [(chU, proj.form(chU, chU)), (chG, proj.form(chG, chG))]
    eig_ch = [rule.channels(e, m, 2) for e in eig]

    children = np.random.SeedSequence(seed).spawn(sample_count)
    directions = []
    for d in range(sample_count):
        if d < len(eig_ch):
            raw = eig_ch[d]
        else:
            rng = np.random.Generator(np.random.Philox(children[d]))
            coef = rng.standard_normal(len(eig_ch))
            raw = np.tensordot(coef, np.array(eig_ch), axes=1)
        directions.append(_orthonormalize(raw, basis, proj.form))

    def run(d):
        out = []
        for eps in epsilons:
            ch = chU + eps * directions[d]
            norm_sq = proj.form(ch, ch)
            crit = rule.integrate(np.abs(ch[0]) ** p)
            dfc = norm_sq - params.s_mu_radial * crit ** (2.0 / p)
            pr = proj.project(ch)
            ratio = dfc / pr.distance ** 2 if pr.distance > 0 else math.nan
            out.append(DeficitSample(seed, d, float(eps), dfc, pr.distance, ratio, pr.c_star, pr.lam_star))
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(run, range(sample_count)))
    else:
        chunks = [run(d) for d in range(sample_count)]
    samples = [s for chunk in chunks for s in chunk]
    eps_min = min(epsilons)
    cohort = [s for s in samples if s.epsilon == eps_min]
    e3 = [s.ratio for s in cohort if s.direction_id == 0]
    return RatioStudy(
        min_ratio=min(s.ratio for s in cohort),
        bound=1.0 - nu2 / nu3,
        samples=samples,
        nu2=nu2,
        nu3=nu3,
        eigen_direction_ratio=e3[0] if e3 else math.nan,
        epsilon=eps_min,
    )


def samples_as_dicts(samples) -> list[dict]:
    return [asdict(s) for s in samples]


def random_profiles(params: ParameterSet, count: int, seed: int, near: float = 0.3) -> list[RadialProfile]:
    """Deterministic test profiles ``c U_lam + delta * bump``.

    Bumps are log-Gaussians with random centre, width and amplitude; ``near``
    scales the bump relative to the bubble (``near=inf`` gives bare bumps).
    """
    out = []
    for child in np.random.SeedSequence(seed).spawn(count):
        rng = np.random.Generator(np.random.Philox(child))
        center, width = rng.uniform(-1.5, 1.5), rng.uniform(0.4, 1.2)
        amp = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 1.0)
        bump = LogGaussianProfile(amp, center, width)
        if math.isinf(near):
            out.append(bump)
        else:
            lam, c = math.exp(rng.uniform(-1.0, 1.0)), rng.uniform(0.5, 2.0)
            out.append(c * make_bubble(params, lam).profile + near * bump)
    return out
