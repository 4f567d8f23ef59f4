"""Grid construction, kernel evaluation, and internal refinement."""

import numpy as np
import numpy.testing as npt
import pytest

import wavesteer as ws
from wavesteer.errors import GridMismatchError, InvalidArgumentError
from wavesteer.kernel import refine_kernel, trapezoid_weights


def test_make_grid_nodes():
    grid = ws.make_grid(3.0, 6)
    assert grid.K == 6
    assert grid.t.shape == (7,)
    assert grid.t[0] == 0.0
    assert grid.t[-1] == 3.0
    npt.assert_allclose(np.diff(grid.t), grid.h, rtol=1e-12)


def test_make_grid_critical_flag():
    assert ws.make_grid(7.0, 8).above_critical
    assert not ws.make_grid(3.0, 8).above_critical
    # the horizon itself does not count as above
    assert not ws.make_grid(2.0 * np.pi, 8).above_critical


@pytest.mark.parametrize("T,K", [(0.0, 8), (-1.0, 8), (np.inf, 8),
                                 (1.0, 1), (1.0, 2.5)])
def test_make_grid_rejects(T, K):
    with pytest.raises(InvalidArgumentError):
        ws.make_grid(T, K)


def test_trapezoid_weights():
    grid = ws.make_grid(2.0, 10)
    w = trapezoid_weights(grid)
    assert w[0] == w[-1] == 0.5 * grid.h
    npt.assert_allclose(np.sum(w), grid.T, rtol=1e-14)


def test_zero_kernel_relaxation():
    grid = ws.make_grid(5.0, 64)
    ker = ws.build_kernel(ws.ZeroKernel(), grid)
    npt.assert_array_equal(ker.M, np.zeros(65))
    npt.assert_array_equal(ker.N, np.ones(65))
    assert ker.gamma == 0.0


def test_exponential_closed_form():
    grid = ws.make_grid(4.0, 256)
    ker = ws.build_kernel(ws.ExponentialKernel(alpha=0.7, beta=2.0), grid)
    npt.assert_allclose(ker.M, 0.7 * np.exp(-2.0 * grid.t), rtol=1e-15)
    npt.assert_allclose(ker.N, 1.0 + 0.35 * (1.0 - np.exp(-2.0 * grid.t)),
                        rtol=1e-14)
    assert ker.N[0] == 1.0
    assert ker.gamma == 0.7


def test_exponential_rejects_bad_decay():
    grid = ws.make_grid(1.0, 8)
    with pytest.raises(InvalidArgumentError):
        ws.build_kernel(ws.ExponentialKernel(alpha=1.0, beta=0.0), grid)


def test_tabulated_matches_closed_form():
    grid = ws.make_grid(4.0, 512)
    tab = ws.build_kernel(ws.TabulatedKernel(t=grid.t, M=np.exp(-grid.t)), grid)
    ref = ws.build_kernel(ws.ExponentialKernel(alpha=1.0, beta=1.0), grid)
    assert tab.gamma == 1.0
    # cumulative trapezoid of the samples vs the exact relaxation: O(h^2)
    npt.assert_allclose(tab.N, ref.N, atol=5.0 * grid.h ** 2)


def test_tabulated_rejects_grid_mismatch():
    grid = ws.make_grid(1.0, 16)
    other = ws.make_grid(1.0, 32)
    with pytest.raises(GridMismatchError):
        ws.build_kernel(ws.TabulatedKernel(t=other.t, M=np.exp(-other.t)), grid)
    with pytest.raises(GridMismatchError):
        ws.build_kernel(ws.TabulatedKernel(t=grid.t + 0.01, M=np.exp(-grid.t)),
                        grid)


def test_refine_kernel_identity():
    grid = ws.make_grid(1.0, 16)
    ker = ws.build_kernel(ws.ZeroKernel(), grid)
    assert refine_kernel(ker, 1) is ker


def test_refine_kernel_closed_form_nodes():
    grid = ws.make_grid(4.0, 64)
    ker = ws.build_kernel(ws.ExponentialKernel(alpha=1.0, beta=1.0), grid)
    fine = refine_kernel(ker, 4)
    assert fine.grid.K == 256
    npt.assert_allclose(fine.grid.t[::4], grid.t, rtol=1e-15, atol=1e-15)
    npt.assert_allclose(fine.N[::4], ker.N, rtol=1e-14)


def test_refine_kernel_tabulated_consistent():
    grid = ws.make_grid(4.0, 64)
    ker = ws.build_kernel(ws.TabulatedKernel(t=grid.t, M=np.exp(-grid.t)), grid)
    fine = refine_kernel(ker, 4)
    # trapezoid is exact on the linear interpolant, so coarse nodes agree
    npt.assert_allclose(fine.N[::4], ker.N, rtol=1e-13)
    assert fine.gamma == ker.gamma


def test_refine_kernel_rejects():
    grid = ws.make_grid(1.0, 8)
    ker = ws.build_kernel(ws.ZeroKernel(), grid)
    with pytest.raises(InvalidArgumentError):
        refine_kernel(ker, 0)
