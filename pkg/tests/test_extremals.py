import dataclasses
import math

import mpmath

import numpy as np
import pytest
import sympy as sp
from numpy.testing import assert_allclose

from rellich_sobolev.extremals import (
    ContractViolation,
    el_operator,
    el_residual,
    equality_case_check,
    generator_profile,
    make_bubble,
    relative_el_residual,
    sharp_constant_identity,
)
from rellich_sobolev.params import derive_constants
from rellich_sobolev.profiles import ZeroProfile
from rellich_sobolev.quadrature import QuadratureConfig, inner_product_mu, lp_integral

PAIRS = [(N, f * (N - 4)) for N in (5, 6, 7) for f in (0.25, 0.5, 0.75)]


def test_value_at_one(p5):
    K = 6.5625 ** 0.125
    assert_allclose(p5.k_coeff, K, rtol=1e-15)
    # (105/16)^(1/8) and its quotient by sqrt(2), 30 digits
    assert_allclose(K, 1.26512566034834647641, rtol=1e-15)
    assert_allclose(make_bubble(p5)(1.0), 0.894578933485424675603, rtol=1e-15)


def test_scaling_law(p5):
    lam, r = 2.0, 0.7
    assert_allclose(make_bubble(p5, lam)(r), lam ** 0.5 * make_bubble(p5)(lam * r), rtol=1e-14)


def test_origin_asymptotics(p5):
    r = np.array([1e-8, 1e-12])
    assert_allclose(make_bubble(p5)(r) * r ** 0.25, p5.k_coeff, rtol=1e-7)


def test_bad_scale(p5):
    with pytest.raises(ValueError):
        make_bubble(p5, 0.0)


def _symbolic_residual(N, mu, lam, radii):
    """Residual of the radial equation from exact symbolic derivatives."""
    r = sp.symbols("r", positive=True)
    mu = sp.nsimplify(mu)
    a, b, m = -mu / 2, 1 - mu / (N - 4), sp.Rational(N - 4, 2)
    q = mu * (2 * (N - 4) - mu)
    c1 = sp.Rational(N * N - 4 * N + 8, 2 * (N - 4) ** 2) * q
    c2 = sp.Rational(N * N, 16 * (N - 4) ** 2) * q * q - sp.Rational(N - 2, 2) * q
    K = (b ** 4 * (N - 4) * (N - 2) * N * (N + 2)) ** sp.Rational(N - 4, 8)
    lam = sp.nsimplify(lam)
    U = lam ** m * K * (lam * r) ** a * (1 + (lam * r) ** (2 * b)) ** (-m)
    d = [sp.diff(U, r, j) for j in range(5)]
    expo = sp.Rational(N + 4, N - 4)
    res = (d[4] + 2 * (N - 1) / r * d[3] + ((N - 1) * (N - 3) + c1) / r ** 2 * d[2]
           - (N - 3) * (N - 1 - c1) / r ** 3 * d[1] + c2 / r ** 4 * U - U ** expo)
    f = sp.lambdify(r, res / U ** expo, "mpmath")
    with mpmath.workdps(40):
        return np.array([float(f(mpmath.mpf(x))) for x in radii])


@pytest.mark.parametrize("lam", [1.0, 3.0])
def test_residual_matches_symbolic_oracle(p5, lam):
    radii = [0.1, 0.5, 1.0, 10.0]
    oracle = _symbolic_residual(5, 0.5, lam, radii)
    assert np.all(np.abs(oracle) < 1e-12)
    got = relative_el_residual(make_bubble(p5, lam).profile, p5, radii)
    assert np.all(got < 1e-6)


@pytest.mark.parametrize("N, mu", PAIRS)
def test_residual_small_on_log_grid(N, mu):
    p = derive_constants(N, mu)
    r = np.logspace(-3, 3, 50)
    assert relative_el_residual(make_bubble(p).profile, p, r).max() < 1e-6


def test_residual_of_zero(p5):
    assert_allclose(el_residual(ZeroProfile(), p5, [0.5, 2.0]), 0.0, atol=0)


def test_residual_rejects_origin(p5):
    with pytest.raises(ValueError):
        el_operator(make_bubble(p5).profile, p5, [0.0, 1.0])


@pytest.mark.parametrize("N, mu", [(5, 0.5), (6, 1.0), (7, 0.8)])
def test_equality_case(N, mu):
    lhs, rhs, gap = equality_case_check(derive_constants(N, mu))
    assert abs(gap / lhs) < 1e-7


def test_equality_case_small_mu():
    p = derive_constants(5, 1e-9)
    lhs, rhs, gap = equality_case_check(p)
    assert abs(gap / lhs) < 1e-7
    assert_allclose(p.s_mu, p.s0, rtol=1e-8)


@pytest.mark.parametrize("N, mu, rtol", [(5, 0.5, 1e-6), (6, 1.0, 1e-6), (5, 0.9, 1e-4)])
def test_sharp_constant_identity(N, mu, rtol):
    p = derive_constants(N, mu)
    assert_allclose(sharp_constant_identity(p, rtol=rtol), p.s_mu, rtol=rtol)


def test_sharp_constant_identity_flags_mismatch(p5):
    wrong = dataclasses.replace(p5, s_mu=1.01 * p5.s_mu)
    with pytest.raises(ContractViolation):
        sharp_constant_identity(wrong)


def test_norm_independent_of_scale(p6, cfg):
    norms = [inner_product_mu(make_bubble(p6, lam).profile, make_bubble(p6, lam).profile, p6, cfg)
             for lam in (0.25, 1.0, 4.0)]
    assert (max(norms) - min(norms)) / norms[1] < 1e-7


def test_norm_equals_critical_integral(p6, cfg):
    U = make_bubble(p6).profile
    assert_allclose(inner_product_mu(U, U, p6, cfg), lp_integral(U, p6.two_crit, 6, cfg), rtol=1e-7)
    # 30-digit quadrature in r
    assert_allclose(inner_product_mu(U, U, p6, cfg), 3.91918358845308495, rtol=1e-12)


def test_generator_matches_scale_derivative(p5):
    r = np.logspace(-2, 2, 13)
    h = 1e-4
    fd = (make_bubble(p5, 1 + h)(r) - make_bubble(p5, 1 - h)(r)) / (2 * h)
    assert_allclose(generator_profile(p5)(r), fd, rtol=1e-6, atol=1e-9)


def test_generator_orthogonal_to_bubble(p5, cfg):
    U = make_bubble(p5).profile
    G = generator_profile(p5)
    assert abs(inner_product_mu(U, G, p5, cfg)) < 1e-10 * math.sqrt(inner_product_mu(G, G, p5, cfg))


def test_coarse_config_still_passes_contract(p5):
    cfg = QuadratureConfig(node_count=512, rel_tol=1e-8)
    assert_allclose(sharp_constant_identity(p5, cfg), p5.s_mu, rtol=1e-6)
