"""Riesz family assembly, Gram solve, and spectrum diagnostics."""

import numpy as np
import numpy.testing as npt
import pytest

import wavesteer as ws
from wavesteer.errors import IllConditionedError, InvalidArgumentError
from wavesteer.kernel import trapezoid_weights
from wavesteer.moment import (MomentSystem, build_family, gram,
                              quadratic_closeness, rhs_from_target,
                              riesz_diagnostics, solve_min_norm, steering_rhs)
from wavesteer.spectral import target_from_coefficients

# regression anchors for M(t) = e^{-t}, T = 7, K = 1024, n_max = 8,
# recorded from the first verified run
EXP_MIN_EIG = 5.525371130307
EXP_MAX_EIG = 1942.580916587
EXP_COND = 351.5747396464
EXP_NORM_G = 0.3574387994811  # density norm for the xi_1 = 1 steering target


@pytest.fixture(scope="module")
def exp_family(exp_modes, grid_t7):
    return build_family(exp_modes, grid_t7)


def _steering_system(family, grid, xi, eta):
    system = gram(family, grid)
    system.c = steering_rhs(target_from_coefficients(xi, eta))
    return system


def test_family_ordering_and_zero_row(exp_family):
    assert [el.n for el in exp_family] == list(range(-8, 9))
    z0 = exp_family[8]
    assert z0.n == 0
    npt.assert_array_equal(z0.Z, np.ones(z0.Z.size, dtype=complex))


def test_family_conjugate_symmetry_bit_exact(exp_family):
    by_n = {el.n: el for el in exp_family}
    for n in range(1, 9):
        npt.assert_array_equal(by_n[-n].Z, np.conj(by_n[n].Z))


def test_family_matches_mode_solutions(exp_modes, exp_family):
    by_n = {el.n: el for el in exp_family}
    for sol in exp_modes:
        npt.assert_array_equal(by_n[sol.n].Z, sol.z + (1j / sol.n) * sol.dz)


def test_family_rejects_mode_gap(exp_modes, grid_t7):
    with pytest.raises(InvalidArgumentError):
        build_family([exp_modes[0], exp_modes[2]], grid_t7)


def test_gram_hermitian_bit_exact(exp_family, grid_t7):
    system = gram(exp_family, grid_t7)
    npt.assert_array_equal(system.G, system.G.conj().T)


def test_gram_memoryless_orthogonality():
    grid = ws.make_grid(2.0 * np.pi, 2048)
    ker = ws.build_kernel(ws.ZeroKernel(), grid)
    fam = build_family(ws.solve_all_modes(4, ker, grid), grid)
    system = gram(fam, grid)
    npt.assert_allclose(system.G, 2.0 * np.pi * np.eye(9), atol=1e-5)


def test_rhs_conventions():
    tgt = target_from_coefficients([1.0, 0.0], [0.0, 2.0])
    c_plain = rhs_from_target(tgt)
    c_steer = steering_rhs(tgt)
    assert c_plain[2] == 0.0  # center entry is the zero mode
    npt.assert_array_equal(c_plain[:2][::-1], np.conj(c_plain[3:]))
    npt.assert_array_equal(c_steer[:2][::-1], np.conj(c_steer[3:]))
    # steering data is the negated conjugate of the plain convention
    npt.assert_array_equal(c_steer[3:], -np.conj(c_plain[3:]))
    assert c_plain[3] == 1.0 + 0.0j
    assert c_plain[4] == -2.0j


def test_min_norm_density_memoryless_closed_form():
    grid = ws.make_grid(2.0 * np.pi, 1024)
    ker = ws.build_kernel(ws.ZeroKernel(), grid)
    fam = build_family(ws.solve_all_modes(2, ker, grid), grid)
    system = gram(fam, grid)
    c = np.zeros(5, dtype=complex)
    c[1] = c[3] = 1.0  # n = -1 and n = 1
    system.c = c
    result = solve_min_norm(system, fam, grid)
    npt.assert_allclose(result.g, np.cos(grid.t) / np.pi, atol=1e-6)
    assert result.residual <= 1e-10
    assert result.moment_defect <= 1e-10
    assert result.imag_ratio <= 1e-12
    assert result.g.dtype == np.float64


def test_min_norm_identity(exp_family, grid_t7):
    # ||g||^2 = Re(beta^H c) for the minimum-norm solution
    xi = np.zeros(8)
    xi[0] = 1.0
    system = _steering_system(exp_family, grid_t7, xi, np.zeros(8))
    result = solve_min_norm(system, exp_family, grid_t7)
    w = trapezoid_weights(grid_t7)
    norm_sq = float(np.dot(w, result.g ** 2))
    identity = float(np.real(np.vdot(result.beta, system.c)))
    npt.assert_allclose(norm_sq, identity, rtol=1e-10)


def test_exp_kernel_regression_anchors(exp_family, grid_t7):
    system = gram(exp_family, grid_t7)
    diag = riesz_diagnostics(system)
    npt.assert_allclose(diag.min_eig, EXP_MIN_EIG, rtol=1e-9)
    npt.assert_allclose(diag.max_eig, EXP_MAX_EIG, rtol=1e-9)
    npt.assert_allclose(diag.cond, EXP_COND, rtol=1e-9)
    xi = np.zeros(8)
    xi[0] = 1.0
    system.c = steering_rhs(target_from_coefficients(xi, np.zeros(8)))
    result = solve_min_norm(system, exp_family, grid_t7)
    w = trapezoid_weights(grid_t7)
    norm_g = float(np.sqrt(np.dot(w, result.g ** 2)))
    npt.assert_allclose(norm_g, EXP_NORM_G, rtol=1e-9)


def test_ridge_solve_warns(exp_family, grid_t7):
    xi = np.zeros(8)
    xi[0] = 1.0
    system = _steering_system(exp_family, grid_t7, xi, np.zeros(8))
    with pytest.warns(RuntimeWarning):
        solve_min_norm(system, exp_family, grid_t7, ridge=1e-8)


def test_rejects_asymmetric_rhs(exp_family, grid_t7):
    system = gram(exp_family, grid_t7)
    c = np.zeros(17, dtype=complex)
    c[-1] = 1.0  # positive-side entry without its mirror
    system.c = c
    with pytest.raises(InvalidArgumentError):
        solve_min_norm(system, exp_family, grid_t7)


def test_singular_gram_raises():
    grid = ws.make_grid(3.0, 1024)  # below the critical horizon
    ker = ws.build_kernel(ws.ZeroKernel(), grid)
    fam = build_family(ws.solve_all_modes(16, ker, grid), grid)
    system = gram(fam, grid)
    c = np.zeros(33, dtype=complex)
    c[15] = c[17] = 1.0
    system.c = c
    with pytest.raises(IllConditionedError):
        solve_min_norm(system, fam, grid)


def test_closeness_memoryless_closed_form(grid_period, zero_kernel):
    # literal pairing: int_0^T |e^{-int} - e^{int}|^2 = 2(2T - sin(2nT)/n)
    fam = build_family(ws.solve_all_modes(8, zero_kernel, grid_period),
                       grid_period)
    rep = quadratic_closeness(fam, zero_kernel, grid_period)
    T = grid_period.T
    n = np.arange(1, 9)
    closed = 2.0 * (2.0 * T - np.sin(2.0 * n * T) / n)
    npt.assert_allclose(rep.per_term_literal, closed, atol=5e-4)
    assert rep.gamma == 0.0
    assert not rep.literal_saturates
    assert rep.swapped_saturates
    assert rep.S_swapped[-1] <= 1e-5


def test_closeness_monotone_and_finite(exp_family, exp_kernel, grid_t7):
    rep = quadratic_closeness(exp_family, exp_kernel, grid_t7)
    assert rep.gamma == 1.0
    assert np.all(np.isfinite(rep.S_literal))
    assert np.all(np.isfinite(rep.S_swapped))
    assert np.all(np.diff(rep.S_literal) >= 0.0)
    assert np.all(np.diff(rep.S_swapped) >= 0.0)
    npt.assert_allclose(rep.S_literal[-1], np.sum(rep.per_term_literal),
                        rtol=1e-12)


def test_riesz_bounds_memoryless_t7():
    grid = ws.make_grid(7.0, 1024)
    ker = ws.build_kernel(ws.ZeroKernel(), grid)
    fam = build_family(ws.solve_all_modes(8, ker, grid), grid)
    diag = riesz_diagnostics(gram(fam, grid))
    assert diag.min_eig > 6.28
    assert diag.cond < 2.01
    npt.assert_allclose(diag.frame_lower, diag.min_eig / 7.0, rtol=1e-15)
    assert diag.eigenvalues[0] == diag.min_eig
    assert diag.eigenvalues[-1] == diag.max_eig


def test_riesz_condition_infinite_on_singular():
    system = MomentSystem(indices=np.array([-1, 0, 1]),
                          G=np.ones((3, 3), dtype=complex), T=1.0)
    diag = riesz_diagnostics(system)
    assert diag.cond == np.inf
    assert diag.min_eig <= 1e-14
