"""Memory kernels, the relaxation function, and the shared time grid.

The relaxation function N(t) = 1 + int_0^t M(s) ds turns the second-order
equation with memory into a first-order convolution form; every other module
consumes M and N sampled on one uniform grid built here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import GridMismatchError, InvalidArgumentError

# Horizon above which the exponential family underlying the moment problem
# keeps a positive lower frame bound; shorter horizons are accepted so the
# diagnostics can probe the failure regime.
CRITICAL_HORIZON = 2.0 * np.pi


def _frozen(values: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(values, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class TimeGrid:
    """Uniform nodes t_k = k*h covering [0, T] with t_K = T exactly."""

    T: float
    K: int
    h: float
    t: np.ndarray
    above_critical: bool


@dataclass(frozen=True)
class ZeroKernel:
    """No memory: the plain string equation."""


@dataclass(frozen=True)
class ExponentialKernel:
    """M(t) = alpha * exp(-beta * t), beta > 0."""

    alpha: float
    beta: float


@dataclass(frozen=True)
class TabulatedKernel:
    """Kernel given by samples of M (and optionally M') on a grid.

    The samples must live on the same grid the run uses; no resampling is
    performed.  M' is stored when provided but never differentiated from M.
    """

    t: np.ndarray
    M: np.ndarray
    Mprime: Optional[np.ndarray] = None


KernelKind = Union[ZeroKernel, ExponentialKernel, TabulatedKernel]


@dataclass(frozen=True)
class KernelSpec:
    """A kernel evaluated on a grid: M_k, N_k and gamma = N'(0) = M(0)."""

    kind: KernelKind
    grid: TimeGrid
    M: np.ndarray
    N: np.ndarray
    gamma: float
    Mprime: Optional[np.ndarray] = None


def trapezoid_weights(grid: TimeGrid) -> np.ndarray:
    """Composite trapezoid weights on the grid: h inside, h/2 at the ends."""
    w = np.full(grid.K + 1, grid.h)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def make_grid(T: float, K: int) -> TimeGrid:
    """Build the uniform grid with K steps on [0, T].

    The grid records whether T exceeds the critical steering horizon 2*pi;
    shorter horizons are allowed (the Riesz diagnostics need them) but are
    flagged.
    """
    if not np.isfinite(T) or T <= 0.0:
        raise InvalidArgumentError(f"horizon T must be positive and finite, got {T!r}")
    if int(K) != K or K < 2:
        raise InvalidArgumentError(f"step count K must be an integer >= 2, got {K!r}")
    K = int(K)
    t = np.linspace(0.0, float(T), K + 1)
    return TimeGrid(T=float(T), K=K, h=float(T) / K, t=_frozen(t),
                    above_critical=bool(T > CRITICAL_HORIZON))


def _cumulative_trapezoid_relaxation(M: np.ndarray, h: float) -> np.ndarray:
    """N_k = 1 + cumulative trapezoid of M; N_0 = 1 exactly."""
    increments = 0.5 * h * (M[1:] + M[:-1])
    N = np.empty_like(M)
    N[0] = 1.0
    np.cumsum(increments, out=N[1:])
    N[1:] += 1.0
    return N


def build_kernel(kind: KernelKind, grid: TimeGrid) -> KernelSpec:
    """Evaluate a kernel on a grid, preferring closed-form relaxation.

    For the exponential kernel N(t) = 1 + (alpha/beta) * (1 - exp(-beta t))
    is used directly so the relaxation carries no quadrature error; tabulated
    kernels fall back to cumulative trapezoidal integration of M.
    """
    t = grid.t
    if isinstance(kind, ZeroKernel):
        M = np.zeros_like(t)
        N = np.ones_like(t)
        gamma = 0.0
        Mprime = None
    elif isinstance(kind, ExponentialKernel):
        if not np.isfinite(kind.beta) or kind.beta <= 0.0:
            raise InvalidArgumentError(
                f"exponential kernel needs beta > 0, got beta={kind.beta!r}")
        if not np.isfinite(kind.alpha):
            raise InvalidArgumentError("exponential kernel amplitude must be finite")
        decay = np.exp(-kind.beta * t)
        M = kind.alpha * decay
        N = 1.0 + (kind.alpha / kind.beta) * (1.0 - decay)
        N[0] = 1.0
        gamma = float(kind.alpha)
        Mprime = None
    elif isinstance(kind, TabulatedKernel):
        samples_t = np.asarray(kind.t, dtype=float)
        M = np.asarray(kind.M, dtype=float)
        if samples_t.shape != t.shape or M.shape != t.shape:
            raise GridMismatchError(
                f"tabulated kernel has {samples_t.size} samples, grid has {t.size} nodes")
        if np.max(np.abs(samples_t - t)) > 1e-12 * max(1.0, grid.T):
            raise GridMismatchError("tabulated kernel sampled on different nodes")
        if not np.all(np.isfinite(M)):
            raise InvalidArgumentError("tabulated kernel samples must be finite")
        Mprime = None
        if kind.Mprime is not None:
            Mprime = np.asarray(kind.Mprime, dtype=float)
            if Mprime.shape != t.shape:
                raise GridMismatchError("tabulated kernel derivative on different grid")
        N = _cumulative_trapezoid_relaxation(M, grid.h)
        gamma = float(M[0])
    else:
        raise InvalidArgumentError(f"unknown kernel kind {type(kind).__name__}")

    return KernelSpec(kind=kind, grid=grid, M=_frozen(M), N=_frozen(N),
                      gamma=gamma,
                      Mprime=None if Mprime is None else _frozen(Mprime))


def refine_kernel(kernel: KernelSpec, refine: int) -> KernelSpec:
    """Re-evaluate a kernel on a grid subdivided `refine` times.

    Closed-form kinds are rebuilt exactly; tabulated kernels are linearly
    interpolated (second-order consistent, matching the solver's order) and
    the relaxation is re-accumulated, which reproduces the coarse N at the
    shared nodes because the trapezoid rule is exact on linear pieces.
    """
    if int(refine) != refine or refine < 1:
        raise InvalidArgumentError(f"refine must be a positive integer, got {refine!r}")
    refine = int(refine)
    if refine == 1:
        return kernel
    fine = make_grid(kernel.grid.T, kernel.grid.K * refine)
    if isinstance(kernel.kind, TabulatedKernel):
        M = np.interp(fine.t, kernel.grid.t, kernel.M)
        N = _cumulative_trapezoid_relaxation(M, fine.h)
        return KernelSpec(kind=kernel.kind, grid=fine, M=_frozen(M),
                          N=_frozen(N), gamma=kernel.gamma)
    return build_kernel(kernel.kind, fine)
