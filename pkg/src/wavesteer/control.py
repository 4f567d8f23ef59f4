"""From density to boundary control: f(t) = int_0^t g(s) ds.

The density g solves the moment constraints; its primitive f is the control
actually applied at the boundary.  Because the constant-moment row forces
int_0^T g = 0, the primitive vanishes at both endpoints and f lands in
H^1_0(0,T).  Internal math uses the renamed control (the sqrt(2/pi) basis
factor absorbed); the physical boundary value is emitted alongside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import InvalidArgumentError, MeanZeroViolationError
from .kernel import TimeGrid, trapezoid_weights

DEFAULT_TOL_T = 1e-6


@dataclass(frozen=True)
class ControlSignal:
    """Density g, renamed control f (its primitive), and physical control.

    f_phys = f / sqrt(2/pi) is the value applied at x = 0.
    """

    grid: TimeGrid
    g: np.ndarray
    f: np.ndarray
    f_phys: np.ndarray
    integral_g: float
    norm_g: float
    norm_f_l2: float
    norm_f_h1: float
    tol_T: float


@dataclass(frozen=True)
class CascadeReport:
    """Numerical confirmation that (f, g) is an integrator cascade.

    The pair must satisfy y' = g with y = f: f is the integrator state
    driven by the mean-zero density, which is what makes the boundary
    control H^1-regular with fixed endpoints.
    """

    mean_value: float
    mean_ok: bool
    endpoint_value: float
    endpoint_ok: bool
    max_derivative_residual: float
    passed: bool


def integrate_density(g: np.ndarray, grid: TimeGrid,
                      tol_T: float = DEFAULT_TOL_T) -> ControlSignal:
    """Integrate the density into the control, checking the mean-zero law.

    f is the trapezoidal cumulative integral of g with f_0 = 0 exactly.
    Raises MeanZeroViolationError when |int_0^T g| > tol_T * ||g|| * T,
    which signals that the constant-moment row was dropped or the solve
    failed.
    """
    g = np.ascontiguousarray(g, dtype=float)
    if g.shape != grid.t.shape:
        raise InvalidArgumentError(
            f"density has {g.size} samples, grid has {grid.t.size} nodes")
    if not np.all(np.isfinite(g)):
        raise InvalidArgumentError("density must be finite")

    f = cumulative_trapezoid(g, dx=grid.h, initial=0.0)
    integral = float(f[-1])
    w = trapezoid_weights(grid)
    norm_g = float(np.sqrt(np.dot(w, g * g)))
    if abs(integral) > tol_T * norm_g * grid.T:
        raise MeanZeroViolationError(
            f"int_0^T g = {integral:.3e} exceeds tol_T * ||g|| * T = "
            f"{tol_T * norm_g * grid.T:.3e}; density is not mean-zero")

    norm_f_l2 = float(np.sqrt(np.dot(w, f * f)))
    g.flags.writeable = False
    f.flags.writeable = False
    f_phys = f * np.sqrt(np.pi / 2.0)
    f_phys.flags.writeable = False
    return ControlSignal(grid=grid, g=g, f=f, f_phys=f_phys,
                         integral_g=integral, norm_g=norm_g,
                         norm_f_l2=norm_f_l2,
                         norm_f_h1=float(np.hypot(norm_f_l2, norm_g)),
                         tol_T=tol_T)


def cascade_check(signal: ControlSignal) -> CascadeReport:
    """Report-only check that g is mean-zero and f' = g at the nodes.

    The derivative residual uses centered differences at interior nodes;
    for a trapezoid-built f it equals |second difference of g| / 4, which
    is O(h^2) for smooth densities.
    """
    g, f, grid = signal.g, signal.f, signal.grid
    f_max = float(np.max(np.abs(f)))
    mean_ok = abs(signal.integral_g) <= signal.tol_T * signal.norm_g * grid.T
    endpoint_ok = abs(float(f[-1])) <= signal.tol_T * f_max
    if grid.K >= 2:
        residual = np.abs((f[2:] - f[:-2]) / (2.0 * grid.h) - g[1:-1])
        max_residual = float(np.max(residual))
    else:
        max_residual = 0.0
    return CascadeReport(mean_value=signal.integral_g, mean_ok=bool(mean_ok),
                         endpoint_value=float(f[-1]),
                         endpoint_ok=bool(endpoint_ok),
                         max_derivative_residual=max_residual,
                         passed=bool(mean_ok and endpoint_ok))


def hard_zero_end(signal: ControlSignal) -> ControlSignal:
    """Force f(T) = 0 by shifting the density by its mean.

    Subtracts the constant f(T)/T from g and re-integrates, which removes
    the linear drift (f(T)/T) * t from f.  This perturbs every moment by
    O(f(T)), so it is an opt-in repair for densities that barely miss the
    mean-zero law, not part of the normal pipeline.
    """
    shift = float(signal.f[-1]) / signal.grid.T
    return integrate_density(signal.g - shift, signal.grid, tol_T=signal.tol_T)
