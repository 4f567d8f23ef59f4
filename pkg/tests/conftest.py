"""Shared small-scale grids, kernels, and solved modes."""

import numpy as np
import pytest

import wavesteer as ws


@pytest.fixture(scope="session")
def grid_period():
    # one period of the memoryless string
    return ws.make_grid(2.0 * np.pi, 1024)


@pytest.fixture(scope="session")
def zero_kernel(grid_period):
    return ws.build_kernel(ws.ZeroKernel(), grid_period)


@pytest.fixture(scope="session")
def grid_t7():
    return ws.make_grid(7.0, 1024)


@pytest.fixture(scope="session")
def exp_kernel(grid_t7):
    return ws.build_kernel(ws.ExponentialKernel(alpha=1.0, beta=1.0), grid_t7)


@pytest.fixture(scope="session")
def exp_modes(exp_kernel, grid_t7):
    return ws.solve_all_modes(8, exp_kernel, grid_t7)
