"""Sine basis on (0, pi), target coefficients, and state-error norms.

Targets are stored in the weighted coefficient convention: the position
expands as xi = sum_n (xi_n / n) Phi_n with Phi_n = sqrt(2/pi) sin(nx), so
that the squared H^1_0 norm is plainly sum_n xi_n^2, and the velocity as
eta = sum_n eta_n Phi_n with squared L^2 norm sum_n eta_n^2.  All error norms
are computed in coefficient space, which is exact for truncated series.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import AliasingError, InvalidArgumentError, NotInH10Error

ENDPOINT_TOL = 1e-8


@dataclass(frozen=True)
class Target:
    """Weighted coefficients (xi_n, eta_n) for n = 1..n_max."""

    n_max: int
    xi: np.ndarray
    eta: np.ndarray
    provenance: str
    tail_energy: Optional[float] = None

    def norm(self) -> float:
        """Norm of the pair in H^1_0 x L^2: sqrt(sum xi_n^2 + sum eta_n^2)."""
        return float(np.sqrt(np.sum(self.xi ** 2) + np.sum(self.eta ** 2)))


@dataclass(frozen=True)
class StateSnapshot:
    """Basis coefficients of position (a_n) and velocity (b_n) at time t."""

    n_max: int
    a: np.ndarray
    b: np.ndarray
    t: float


def _frozen(values, n_max: int) -> np.ndarray:
    out = np.ascontiguousarray(values, dtype=float)
    if out.shape != (n_max,):
        raise InvalidArgumentError(
            f"expected {n_max} coefficients, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise InvalidArgumentError("coefficients must be finite")
    out.flags.writeable = False
    return out


def target_from_coefficients(xi, eta, provenance: str = "coefficients") -> Target:
    """Build a target directly from weighted coefficient arrays."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if xi.shape != eta.shape:
        raise InvalidArgumentError(
            f"xi and eta must have equal length, got {xi.size} and {eta.size}")
    n_max = xi.size
    if n_max < 1:
        raise InvalidArgumentError("target needs at least one mode")
    return Target(n_max=n_max, xi=_frozen(xi, n_max), eta=_frozen(eta, n_max),
                  provenance=provenance)


def basis_values(n: int, x: np.ndarray) -> np.ndarray:
    """Phi_n(x) = sqrt(2/pi) sin(n x)."""
    return np.sqrt(2.0 / np.pi) * np.sin(n * x)


def coefficients_from_function(xi_fn: Callable[[np.ndarray], np.ndarray],
                               eta_fn: Optional[Callable[[np.ndarray], np.ndarray]],
                               n_max: int, Q: int = 2048,
                               tail_factor: int = 4) -> Target:
    """Project analytic targets onto the sine basis by composite trapezoid.

    Parameters
    ----------
    xi_fn, eta_fn : callables on (0, pi), vectorized; eta_fn may be None for a
        zero velocity target.  xi_fn must vanish at both endpoints.
    n_max : mode cutoff of the stored coefficients.
    Q : number of quadrature subintervals; must be at least 8 * n_max.
    tail_factor : modes up to tail_factor * n_max (quadrature permitting) are
        projected once more to estimate the truncated tail energy.
    """
    if int(n_max) != n_max or n_max < 1:
        raise InvalidArgumentError(f"n_max must be a positive integer, got {n_max!r}")
    n_max = int(n_max)
    if Q < 8 * n_max:
        raise AliasingError(
            f"quadrature resolution Q={Q} is below 8*n_max={8 * n_max}")

    x = np.linspace(0.0, np.pi, int(Q) + 1)
    xi_vals = np.asarray(xi_fn(x), dtype=float)
    if abs(xi_vals[0]) > ENDPOINT_TOL or abs(xi_vals[-1]) > ENDPOINT_TOL:
        raise NotInH10Error(
            f"position target must vanish at 0 and pi, got "
            f"({xi_vals[0]:.3e}, {xi_vals[-1]:.3e})")
    eta_vals = None
    if eta_fn is not None:
        eta_vals = np.asarray(eta_fn(x), dtype=float)

    n_top = max(n_max, min(tail_factor * n_max, int(Q) // 8))
    modes = np.arange(1, n_top + 1)
    phi = np.sqrt(2.0 / np.pi) * np.sin(np.outer(modes, x))
    weights = np.full(x.size, np.pi / Q)
    weights[0] *= 0.5
    weights[-1] *= 0.5

    a = phi @ (weights * xi_vals)              # a_n = <xi, Phi_n>
    xi_w = modes * a                           # stored as xi_n = n * a_n
    eta_w = phi @ (weights * eta_vals) if eta_vals is not None else np.zeros(n_top)

    tail = float(np.sum(xi_w[n_max:] ** 2) + np.sum(eta_w[n_max:] ** 2))
    return Target(n_max=n_max, xi=_frozen(xi_w[:n_max], n_max),
                  eta=_frozen(eta_w[:n_max], n_max), provenance="analytic",
                  tail_energy=tail)


def state_error(final: StateSnapshot, target: Target) -> tuple[float, float, float]:
    """(H^1_0 error, L^2 error, combined) between a snapshot and a target.

    e_H1^2 = sum (n a_n - xi_n)^2 and e_L2^2 = sum (b_n - eta_n)^2, exact for
    the truncated expansions.
    """
    if final.n_max != target.n_max:
        raise InvalidArgumentError(
            f"snapshot cutoff {final.n_max} != target cutoff {target.n_max}")
    modes = np.arange(1, target.n_max + 1)
    e_h1 = float(np.sqrt(np.sum((modes * final.a - target.xi) ** 2)))
    e_l2 = float(np.sqrt(np.sum((final.b - target.eta) ** 2)))
    return e_h1, e_l2, float(np.hypot(e_h1, e_l2))


def reconstruct(snapshot: StateSnapshot, resolution: int = 256
                ) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise position sum_n a_n Phi_n(x) on a uniform x grid (for export)."""
    x = np.linspace(0.0, np.pi, int(resolution) + 1)
    modes = np.arange(1, snapshot.n_max + 1)
    values = np.sqrt(2.0 / np.pi) * (snapshot.a @ np.sin(np.outer(modes, x)))
    return x, values
