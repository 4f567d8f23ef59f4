"""Mode Volterra solver against closed forms and an independent ODE oracle."""

import numpy as np
import numpy.testing as npt
import pytest

import wavesteer as ws
from wavesteer.errors import InstabilityError, InvalidArgumentError
from wavesteer.volterra import trapezoid_convolution

# z_1(1) for M(t) = e^{-t}, from the equivalent ODE system
# z' = -(2Q - y), Q' = z, y' = z - y, integrated by three independent
# methods (8th-order explicit with dense output, implicit Radau, and
# classic RK4 at 1e6 steps), which agree to 9.4e-15.
Z1_EXP_AT_1 = 0.4229004149067401


@pytest.mark.parametrize("n", [1, 3, 5])
def test_memoryless_modes_are_cosines(n, grid_period, zero_kernel):
    sol = ws.solve_mode(n, zero_kernel, grid_period)
    t = grid_period.t
    npt.assert_allclose(sol.z, np.cos(n * t), atol=1e-4)
    npt.assert_allclose(sol.dz, -n * np.sin(n * t), atol=1e-3)
    npt.assert_allclose(sol.ddz, -n * n * np.cos(n * t), atol=2e-3)


def test_initial_conditions_exact(grid_period, zero_kernel):
    sol = ws.solve_mode(4, zero_kernel, grid_period)
    assert sol.z[0] == 1.0
    assert sol.dz[0] == 0.0
    assert sol.ddz[0] == -16.0  # z''(0) = -n^2 N(0)


def test_exponential_kernel_oracle():
    grid = ws.make_grid(1.0, 2048)
    ker = ws.build_kernel(ws.ExponentialKernel(alpha=1.0, beta=1.0), grid)
    sol = ws.solve_mode(1, ker, grid)
    assert abs(sol.z[-1] - Z1_EXP_AT_1) <= 1e-6


@pytest.mark.parametrize("kind", [ws.ZeroKernel(),
                                  ws.ExponentialKernel(alpha=1.0, beta=1.0)])
def test_convergence_order_second(kind):
    order = ws.convergence_order(1, kind, 1.0, steps=(128, 256, 512))
    assert abs(order - 2.0) <= 0.3


def test_convergence_order_rejects_tabulated():
    grid = ws.make_grid(1.0, 8)
    tab = ws.TabulatedKernel(t=grid.t, M=np.ones(9))
    with pytest.raises(InvalidArgumentError):
        ws.convergence_order(1, tab, 1.0)


def test_fine_trace_restriction(grid_t7, exp_kernel):
    sol = ws.solve_mode(2, exp_kernel, grid_t7, refine=4)
    assert sol.fine.grid.K == 4 * grid_t7.K
    npt.assert_array_equal(sol.fine.z[::4], sol.z)
    npt.assert_array_equal(sol.fine.dz[::4], sol.dz)


def test_solution_arrays_read_only(exp_modes):
    sol = exp_modes[0]
    for arr in (sol.z, sol.dz, sol.ddz):
        assert not arr.flags.writeable


@pytest.mark.parametrize("n", [0, -3, 1.5])
def test_rejects_bad_mode_index(n, grid_period, zero_kernel):
    with pytest.raises(InvalidArgumentError):
        ws.solve_mode(n, zero_kernel, grid_period)


def test_trapezoid_convolution_matches_direct_sum():
    rng = np.random.default_rng(7)
    K, h = 64, 0.25
    kernel_vals = rng.normal(size=K + 1)
    y = rng.normal(size=K + 1)
    out = trapezoid_convolution(kernel_vals, y, h)
    assert out[0] == 0.0
    for k in (1, 2, 5, K):
        acc = 0.0
        for j in range(k + 1):
            w = 0.5 if j in (0, k) else 1.0
            acc += w * kernel_vals[k - j] * y[j]
        npt.assert_allclose(out[k], h * acc, atol=1e-13)


def test_growth_guard_trips():
    # negative relaxation drives a true exponential runaway
    grid = ws.make_grid(40.0, 256)
    M = np.full(grid.K + 1, -1.0)
    ker = ws.build_kernel(ws.TabulatedKernel(t=grid.t, M=M), grid)
    with pytest.raises(InstabilityError):
        ws.solve_mode(4, ker, grid)
