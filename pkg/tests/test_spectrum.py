import math
from types import SimpleNamespace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rellich_sobolev.extremals import generator_profile, make_bubble
from rellich_sobolev.params import derive_constants, sphere_eigen
from rellich_sobolev.profiles import LogGaussianProfile
from rellich_sobolev.quadrature import inner_product_mu
from rellich_sobolev.spectrum import (
    GridSpec,
    assemble_sector,
    convergence_study,
    eigenfunction_alignment,
    lift_conditions,
    mass_form,
    sector_coefficients,
    sector_form,
    sector_spectrum,
    solve_generalized,
    strong_form_pairing,
)
from rellich_sobolev.stability import random_profiles

PAIRS = [(N, f * (N - 4)) for N in (5, 6, 7) for f in (0.25, 0.5, 0.75)]


def radial_eigenvalues(N, count):
    """k=0 eigenvalues ``prod_j (l + N/2 + j) / prod_j (N/2 + j)``, ``j = -2..1``."""
    h = N / 2
    base = (h - 2) * (h - 1) * h * (h + 1)
    return np.array([(l + h - 2) * (l + h - 1) * (l + h) * (l + h + 1) / base for l in range(count)])


def test_closed_form_oracle_values():
    assert_allclose(radial_eigenvalues(5, 3), [1, 9, 33])
    for N in (5, 6, 7, 11):
        assert_allclose(radial_eigenvalues(N, 2)[1], (N + 4) / (N - 4))


@pytest.mark.parametrize("N, mu", PAIRS)
def test_radial_spectrum(N, mu):
    p = derive_constants(N, mu)
    res = sector_spectrum(0, p, 4)
    assert_allclose(res.eigenvalues, radial_eigenvalues(N, 4), rtol=1e-8)
    assert res.residuals.max() < 1e-8
    assert np.all(np.diff(res.eigenvalues) > 0)
    # the nu_2 eigenspace is isolated
    assert res.eigenvalues[2] - res.eigenvalues[1] > 0.1 * res.eigenvalues[1]


def test_four_hundred_point_grid(p5):
    res = sector_spectrum(0, p5, 3, GridSpec(400))
    assert 0.999 <= res.eigenvalues[0] <= 1.001
    assert abs(res.eigenvalues[1] / 9 - 1) < 1e-3
    assert res.eigenvalues[2] > 9
    fine = sector_spectrum(0, p5, 3, GridSpec(800))
    assert abs(fine.eigenvalues[1] / res.eigenvalues[1] - 1) < 1e-4


def test_diagonal_toy():
    op = SimpleNamespace(stiffness=np.diag([2.0, 6.0]), mass=np.eye(2), k=0)
    res = solve_generalized(op, 2)
    assert_allclose(res.eigenvalues, [2.0, 6.0], rtol=1e-14)
    assert res.residuals.max() < 1e-14


def test_count_validation(p5):
    op = assemble_sector(0, p5, GridSpec(16))
    with pytest.raises(ValueError):
        solve_generalized(op, 17)


def test_operator_symmetry(p5):
    op = assemble_sector(1, p5, GridSpec(64))
    for M in (op.stiffness, op.mass):
        assert np.abs(M - M.T).max() <= 1e-12 * np.abs(M).max()
    np.linalg.cholesky(op.stiffness)
    assert np.all(np.diag(op.mass) > 0)


def test_rayleigh_quotients(p6):
    res = sector_spectrum(0, p6, 3)
    op = res.operator
    for nu, x in zip(res.eigenvalues, res.vectors.T):
        assert_allclose(x @ op.stiffness @ x / (x @ op.mass @ x), nu, rtol=1e-8)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("N, mu", PAIRS)
def test_higher_sectors_avoid_critical_value(k, N, mu):
    p = derive_constants(N, mu)
    res = sector_spectrum(k, p, 3)
    assert np.min(np.abs(res.eigenvalues - (p.two_crit - 1))) > 1e-2
    assert res.eigenvalues[0] > p.two_crit - 1


def test_alignment_with_bubble_and_generator(p5, cfg):
    res = sector_spectrum(0, p5, 3)
    assert eigenfunction_alignment(res, p5, cfg, index=0) > 0.999
    assert eigenfunction_alignment(res, p5, cfg) > 0.999
    e1, e2 = res.eigenvectors[:2]
    scale = math.sqrt(inner_product_mu(e1, e1, p5, cfg) * inner_product_mu(e2, e2, p5, cfg))
    assert abs(inner_product_mu(e1, e2, p5, cfg)) < 1e-6 * scale


def test_discrete_forms_match_quadrature(p5, cfg):
    res = sector_spectrum(0, p5, 3)
    op = res.operator
    for x, prof in zip(res.vectors.T, res.eigenvectors):
        assert_allclose(x @ op.stiffness @ x, inner_product_mu(prof, prof, p5, cfg), rtol=1e-6)
        assert_allclose(x @ op.mass @ x, mass_form(prof, prof, p5, cfg), rtol=1e-6)


def test_sector_zero_is_mu_form(p5, cfg):
    U = make_bubble(p5).profile
    assert_allclose(sector_form(0, U, U, p5, cfg), inner_product_mu(U, U, p5, cfg), rtol=1e-12)
    g = LogGaussianProfile(1.0)
    assert sector_form(2, g, LogGaussianProfile(1.0) * 0.0, p5, cfg) == 0.0


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_weak_and_strong_forms_agree(k, p5, cfg):
    phi, psi = LogGaussianProfile(1.0, 0.3, 0.5), LogGaussianProfile(0.7, -0.2, 0.6)
    weak = sector_form(k, phi, psi, p5, cfg)
    assert_allclose(strong_form_pairing(k, phi, psi, p5, cfg), weak, rtol=1e-5)
    assert_allclose(sector_form(k, psi, phi, p5, cfg), weak, rtol=1e-12)


def test_sector_coefficients_match_quadrature(p6, cfg):
    # w = r^m phi turns Q_k into int w''^2 + alpha1 w'^2 + alpha0 w^2 dt; check on a log-Gaussian w
    k = 2
    a1, a0 = sector_coefficients(k, p6)
    s = 0.7
    w0, w1, w2 = (math.sqrt(math.pi) * s, math.sqrt(math.pi) / (2 * s), 3 * math.sqrt(math.pi) / (4 * s ** 3))
    # ints of w^2, w'^2, w''^2 for w = exp(-t^2 / (2 s^2))
    expected = w2 + a1 * w1 + a0 * w0
    from rellich_sobolev.profiles import PowerChangeProfile

    phi = PowerChangeProfile(LogGaussianProfile(1.0, 0.0, s), -p6.m, 1.0)
    assert_allclose(sector_form(k, phi, phi, p6, cfg), expected, rtol=1e-10)


def test_convergence_under_refinement(p5):
    rep = convergence_study(0, p5, 3, GridSpec(400, 40.0))
    assert rep.shift < 1e-4


@pytest.mark.parametrize(
    "N, k, mu, expected",
    [(5, 1, 0.5, (945, 945, 156.0)), (5, 2, 0.5, (945, 3465, None)), (5, 1, 0.1, (945, 945, None))],
)
def test_lift_condition_examples(N, k, mu, expected):
    lhs, rhs, pos = lift_conditions(k, derive_constants(N, mu))
    assert (lhs, rhs) == expected[:2]
    if expected[2] is not None:
        assert_allclose(pos, expected[2], rtol=1e-15)
    assert pos > 0


def test_lift_condition_sweep():
    rng = np.random.default_rng(7)
    for _ in range(100):
        N = int(rng.integers(5, 16))
        p = derive_constants(N, rng.uniform(0.001, 0.999) * (N - 4))
        k = int(rng.integers(1, 8))
        lhs, rhs, pos = lift_conditions(k, p)
        assert lhs <= rhs and pos > 0


def test_lift_rejects_radial_sector(p5):
    with pytest.raises(ValueError):
        lift_conditions(0, p5)


def test_spectral_gap_inequality(p5, cfg):
    res = sector_spectrum(0, p5, 3)
    nu3 = res.eigenvalues[2]
    U, G = make_bubble(p5).profile, generator_profile(p5)
    nU, nG = inner_product_mu(U, U, p5, cfg), inner_product_mu(G, G, p5, cfg)
    for u in random_profiles(p5, 20, seed=3):
        w = u - (inner_product_mu(u, U, p5, cfg) / nU) * U - (inner_product_mu(u, G, p5, cfg) / nG) * G
        assert nu3 * mass_form(w, w, p5, cfg) <= inner_product_mu(w, w, p5, cfg) * (1 + 1e-3)


def test_record_layout(p5):
    rec = sector_spectrum(1, p5, 2, GridSpec(64)).to_record()
    assert set(rec) == {"k", "eigenvalues", "residuals", "grid_size"}
    assert rec["k"] == 1 and rec["grid_size"] == 64


@pytest.mark.parametrize("kw", [dict(n=7), dict(n=9), dict(half_width=0.0)])
def test_grid_validation(kw):
    with pytest.raises(ValueError):
        GridSpec(**kw)
