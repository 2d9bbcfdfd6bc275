import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate
from scipy.special import beta, gamma

from rellich_sobolev.extremals import make_bubble
from rellich_sobolev.profiles import (
    DilationGenerator,
    GaussianProfile,
    LogGaussianProfile,
    PowerProfile,
    ProfileDomainError,
    ZeroProfile,
)
from rellich_sobolev.quadrature import (
    DivergenceError,
    FixedRule,
    NonConvergenceError,
    QuadratureConfig,
    hardy_form,
    inner_product_mu,
    integrate_radial,
    lp_integral,
    lp_norm,
)


@pytest.mark.parametrize("mapping", ["log_uniform", "double_exponential"])
def test_gamma_integral(mapping):
    cfg = QuadratureConfig(mapping=mapping)
    assert_allclose(integrate_radial(lambda r: np.exp(-r), 5, 0, cfg, decay=(0, math.inf)), 24.0, rtol=1e-10)


def test_beta_integral(cfg):
    prof = PowerProfile(1.0, 0.0, 1.0, 5.0)
    assert_allclose(integrate_radial(prof, 5, 0, cfg), 0.5 * beta(2.5, 2.5), rtol=1e-10)
    assert_allclose(0.5 * beta(2.5, 2.5), 0.0368155, atol=1e-7)


def test_zero_integrand(cfg):
    assert integrate_radial(ZeroProfile(), 5, 0, cfg) == 0.0
    assert integrate_radial(lambda r: 0 * r, 6, 2, cfg) == 0.0


@pytest.mark.parametrize("k", [0, 1, 2, 3, 6])
@pytest.mark.parametrize("N, p", [(5, 0), (6, 2), (7, 4)])
def test_polynomial_times_gaussian(k, N, p, cfg):
    # int r^(k+N-1-p) e^(-r^2) dr = Gamma((k+N-p)/2)/2
    prof = GaussianProfile(1.0, 1.0, float(k))
    assert_allclose(integrate_radial(prof, N, p, cfg), 0.5 * gamma((k + N - p) / 2), rtol=1e-10)


def test_divergent_integrand_is_rejected(cfg):
    with pytest.raises(DivergenceError):
        integrate_radial(lambda r: r ** -5.0, 5, 0, cfg, decay=(-5, 5))
    with pytest.raises(ProfileDomainError):
        integrate_radial(PowerProfile(1.0, -5.0, 1.0, 1.0), 5, 0, cfg)


def test_tail_growth_is_detected():
    cfg = QuadratureConfig()
    with pytest.raises(DivergenceError):
        integrate_radial(lambda r: 1.0 / (1.0 + r ** 4), 5, 0, cfg)


def test_unresolvable_oscillation_is_reported():
    cfg = QuadratureConfig(node_count=16)
    with pytest.raises(NonConvergenceError):
        integrate_radial(lambda r: np.cos(1e4 * r) * np.exp(-r), 5, 0, cfg, decay=(0, math.inf))


@pytest.mark.parametrize("kw", [dict(node_count=8), dict(r_min=2.0), dict(rel_tol=0.0), dict(mapping="simpson")])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        QuadratureConfig(**kw)


def _sympy_profile(kind):
    r = sp.symbols("r", positive=True)
    if kind == "loggauss":
        return r, sp.Rational(7, 10) * sp.exp(-(sp.log(r) - sp.Rational(1, 5)) ** 2 / (2 * sp.Rational(3, 5) ** 2))
    return r, 2 * r ** sp.Rational(-1, 4) * (1 + (r / 2) ** 1) ** -6


@pytest.mark.parametrize(
    "kind, prof",
    [("loggauss", LogGaussianProfile(0.7, 0.2, 0.6)), ("power", PowerProfile(2.0, -0.25, 0.5, 6.0, scale=2.0))],
)
def test_channels_match_symbolic_derivatives(kind, prof):
    r, expr = _sympy_profile(kind)
    pts = np.array([1e-3, 0.05, 0.7, 1.0, 3.3, 40.0])
    got = prof.eval(pts)
    for j in range(5):
        f = sp.lambdify(r, sp.diff(expr, r, j), "numpy")
        assert_allclose(got[j], f(pts), rtol=1e-11)


@pytest.mark.parametrize("r0", [0.3, 1.0, 4.0])
def test_channels_match_finite_differences(r0, fd, p5):
    U = make_bubble(p5).profile
    h = 1e-3 * r0
    vals = U.eval(np.array([r0]))[:, 0]
    assert_allclose(vals[1], fd(U, r0, h, 1), rtol=1e-7)
    assert_allclose(vals[2], fd(U, r0, h, 2), rtol=1e-5)
    d1 = lambda x: U.eval(np.atleast_1d(x))[1]
    d3 = lambda x: U.eval(np.atleast_1d(x))[3]
    assert_allclose(vals[3], fd(d1, r0, h, 2)[0], rtol=1e-5)
    assert_allclose(vals[4], fd(d3, r0, h, 1)[0], rtol=1e-7)


def test_mu_form_against_raw_quadrature(p5, cfg):
    # the form written directly in r with symbolic derivatives, integrated by scipy
    r, e1 = _sympy_profile("loggauss")
    e2 = sp.exp(-(sp.log(r) + sp.Rational(1, 2)) ** 2 / 2) * sp.Rational(-3, 10)
    N, c1, c2 = p5.N, p5.c1, p5.c2
    lap = lambda e: sp.diff(e, r, 2) + (N - 1) / r * sp.diff(e, r)
    dens = lap(e1) * lap(e2) * r ** (N - 1) - c1 * sp.diff(e1, r) * sp.diff(e2, r) * r ** (N - 3) + c2 * e1 * e2 * r ** (N - 5)
    f = sp.lambdify(r, dens, "math")
    ref = sum(integrate.quad(f, a, b, epsabs=0, epsrel=1e-13, limit=400)[0]
              for a, b in [(1e-12, 0.1), (0.1, 1), (1, 10), (10, 1e4)])
    got = inner_product_mu(LogGaussianProfile(0.7, 0.2, 0.6), LogGaussianProfile(-0.3, -0.5, 1.0), p5, cfg)
    assert_allclose(got, ref, rtol=1e-9)


def test_extremal_norm_equals_critical_integral(p5, cfg):
    U = make_bubble(p5).profile
    lhs = inner_product_mu(U, U, p5, cfg)
    rhs = lp_integral(U, p5.two_crit, 5, cfg)
    # 30-digit quadrature of the same integral written in r
    assert_allclose(lhs, 0.773388666141169223, rtol=1e-12)
    assert_allclose(lhs, rhs, rtol=1e-10)
    assert_allclose(lp_norm(U, p5.two_crit, 5, cfg), rhs ** (1 / p5.two_crit), rtol=1e-15)


def test_bilinearity_with_zero(p5, cfg):
    assert inner_product_mu(make_bubble(p5).profile, ZeroProfile(), p5, cfg) == 0.0
    assert lp_norm(ZeroProfile(), 3.0, 5, cfg) == 0.0


@settings(max_examples=15, deadline=None)
@given(
    st.floats(-1.5, 1.5), st.floats(0.3, 1.5), st.floats(-1.5, 1.5), st.floats(0.3, 1.5),
)
def test_form_is_symmetric(c_a, w_a, c_b, w_b):
    from rellich_sobolev.params import derive_constants

    p = derive_constants(6, 1.3)
    u, v = LogGaussianProfile(1.0, c_a, w_a), LogGaussianProfile(-0.5, c_b, w_b)
    cfg = QuadratureConfig()
    uv, vu = inner_product_mu(u, v, p, cfg), inner_product_mu(v, u, p, cfg)
    scale = math.sqrt(inner_product_mu(u, u, p, cfg) * inner_product_mu(v, v, p, cfg))
    assert abs(uv - vu) <= 1e-12 * scale


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_critical_norm_scaling_invariance(lam, p6, cfg):
    base = make_bubble(p6).profile + LogGaussianProfile(0.2, 0.0, 0.5)
    scaled = lambda r: lam ** p6.m * base(lam * r)
    ref = lp_norm(base, p6.two_crit, 6, cfg)
    got = integrate_radial(lambda r: np.abs(scaled(r)) ** p6.two_crit, 6, 0, cfg,
                           decay=(p6.a * p6.two_crit, (2 * p6.b * p6.m - p6.a) * p6.two_crit)) ** (1 / p6.two_crit)
    assert_allclose(got, ref, rtol=1e-10)


def test_form_nonnegative_and_above_sobolev_bound(p5, cfg):
    for prof in (LogGaussianProfile(1.0, 0.0, 0.5), make_bubble(p5, 2.0).profile + LogGaussianProfile(0.4, 1.0, 0.3)):
        norm = inner_product_mu(prof, prof, p5, cfg)
        crit = lp_integral(prof, p5.two_crit, 5, cfg)
        assert norm >= p5.s_mu_radial * crit ** (2 / p5.two_crit) - 1e-12


def test_generator_is_derivative_in_scale(p5):
    r = np.logspace(-2, 2, 9)
    h = 1e-4
    bub = lambda lam: make_bubble(p5, lam)(r)
    fd = (bub(1 + h) - bub(1 - h)) / (2 * h)
    assert_allclose(DilationGenerator(make_bubble(p5).profile, p5.m)(r), fd, rtol=1e-6, atol=1e-8)


def test_unweighted_form_of_bubble(cfg):
    from rellich_sobolev.params import derive_constants

    p = derive_constants(7, 1.0)
    v = PowerProfile(1.0, 0.0, 1.0, 1.5)
    q = hardy_form(v, v, 7, 0.0, 0.0, cfg)
    crit = lp_integral(v, p.two_crit, 7, cfg)
    assert_allclose(q / crit ** (2 / p.two_crit), p.s0_radial, rtol=1e-10)


def test_fixed_rule_matches_adaptive(p5, cfg):
    u = make_bubble(p5).profile + LogGaussianProfile(0.5, 0.3, 0.4)
    rule = FixedRule.covering([u], p5, cfg)
    ch = rule.channels(u, p5.m, 2)
    from rellich_sobolev.quadrature import form_integrand

    val = rule.integrate(form_integrand(ch, ch, 5, p5.c1, p5.c2))
    assert_allclose(val, inner_product_mu(u, u, p5, cfg), rtol=1e-10)
