"""Retarded Duhamel operators and the free-space kernel quadrature.

Sign convention: the Duhamel formula carries a factor ``-i`` in front of the
time integral.  Every routine here omits it; it is unimodular and irrelevant
for the norms the library measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from .grid import SpaceTimeField
from .propagator import cutoff_on_grid


def ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n."""
    return math.pi ** (n / 2) / gamma(n / 2 + 1)


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n."""
    return 2 * math.pi ** (n / 2) / gamma(n / 2)


# ---------------------------------------------------------------------------
# Periodic-spectral Duhamel sums
# ---------------------------------------------------------------------------

def _left_endpoint_sum(F: SpaceTimeField, localized: bool) -> np.ndarray:
    """``out_k = sum_{i < k} M(t_k - s_i) F_i dt`` with M the (localised) group."""
    spec = F.spec
    k2 = spec.frequency_squared()
    weight = cutoff_on_grid(spec) ** 2 if localized else 1.0
    acc = np.zeros(spec.shape, dtype=complex)
    out = np.zeros(F.values.shape, dtype=complex)
    for k, t in enumerate(F.times):
        if k:
            out[k] = np.fft.ifftn(np.exp(-1j * t * k2) * acc)
        if F.values[k].any():
            acc = acc + np.exp(1j * t * k2) * weight * np.fft.fftn(F.values[k]) * spec.dt
    return out


def retarded(F: SpaceTimeField, localized: bool = False) -> SpaceTimeField:
    """``I(F)(t) = int_0^t exp(i(t-s)Lap) F(s) ds`` by the left-endpoint rule.

    The window must start at the time origin.  With ``localized`` the group is
    replaced by the ``|phi|^2`` multiplier.
    """
    if len(F) and abs(F.times[0]) > 1e-12:
        raise ValueError(f"retarded() integrates from 0; first stamp is {F.times[0]}")
    return SpaceTimeField(F.spec, F.times, _left_endpoint_sum(F, localized))


def full_line_retarded(F: SpaceTimeField, localized: bool = False) -> SpaceTimeField:
    """``int_{-inf}^t`` for forcings supported inside the window.

    The first slice must vanish so that truncating the lower limit at the
    window start loses nothing.
    """
    if len(F) and np.any(F.values[0]):
        raise ValueError("forcing must vanish on the first slice of the window")
    return SpaceTimeField(F.spec, F.times, _left_endpoint_sum(F, localized))


# ---------------------------------------------------------------------------
# Free-space counterexample family
# ---------------------------------------------------------------------------

def phase_split(x, y, s: float, t: float) -> tuple[float, float]:
    """Split ``|x-y|^2 / (4(t-s))`` into ``|x|^2/(4t)`` plus a remainder."""
    if t == 0 or t == s:
        raise ValueError("need t != 0 and t != s")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xx = float(x @ x)
    dxy = float((x - y) @ (x - y))
    main = xx / (4 * t)
    remainder = (t * (dxy - xx) + s * xx) / (4 * t * (t - s))
    return main, remainder


@dataclass(frozen=True)
class KernelValue:
    value: complex
    error: float

    def __abs__(self):
        return abs(self.value)


def _kernel_rule(n: int, eps: float, ny: int, ns: int):
    """Midpoint nodes on ``[-eps, eps]^n x [0, eps^2]`` restricted to the ball.

    The pointwise ball indicator is rescaled so the weights sum to the exact
    ball volume, removing the lattice-count bias of the indicator.
    """
    h = 2 * eps / ny
    axis = -eps + h * (np.arange(ny) + 0.5)
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    inside = np.sum(pts ** 2, axis=1) < eps ** 2
    pts = pts[inside]
    wy = ball_volume(n) * eps ** n / len(pts)
    hs = eps ** 2 / ns
    s = hs * (np.arange(ns) + 0.5)
    return pts, wy, s, hs


def _kernel_quadrature(x: np.ndarray, t: float, eps: float, n: int, ny: int, ns: int) -> complex:
    pts, wy, s, hs = _kernel_rule(n, eps, ny, ns)
    d2 = np.sum((x[None, :] - pts) ** 2, axis=1)
    total = 0j
    for sv in s:
        tau = t - sv
        total += tau ** (-n / 2) * np.sum(np.exp(1j * d2 / (4 * tau)))
    return complex((4 * math.pi) ** (-n / 2) * total * wy * hs)


def kernel_resolution(n: int) -> tuple[int, int]:
    """Default (points per y-axis, points in s)."""
    return (24, 24)


def kernel_duhamel(x, t: float, eps: float, n: int | None = None,
                   resolution: tuple[int, int] | None = None) -> KernelValue:
    """``I(F)(x, t)`` for ``F = 1{0 < s < eps^2, |y| < eps}`` by direct quadrature.

    Uses the free-space kernel ``(4 pi |t-s|)^(-n/2) exp(i |x-y|^2 / (4|t-s|))``.
    The error estimate is twice the change against a half-resolution rule.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = len(x) if n is None else n
    if x.shape != (n,):
        raise ValueError(f"x must be an {n}-vector")
    if not 0 < eps < 0.5:
        raise ValueError("need 0 < eps < 1/2")
    if t <= eps ** 2:
        raise ValueError("need t > eps^2 (kernel singularity)")
    ny, ns = resolution or kernel_resolution(n)
    fine = _kernel_quadrature(x, t, eps, n, ny, ns)
    coarse = _kernel_quadrature(x, t, eps, n, max(ny // 2, 2), max(ns // 2, 1))
    err = 2 * abs(fine - coarse) + 1e-13 * abs(fine)
    return KernelValue(fine, err)


def trivial_kernel_bound(t: float, eps: float, n: int) -> float:
    """``(4 pi)^(-n/2) (t - eps^2)^(-n/2) eps^2 V_n eps^n`` (triangle inequality)."""
    return (4 * math.pi) ** (-n / 2) * (t - eps ** 2) ** (-n / 2) * eps ** 2 * ball_volume(n) * eps ** n


def shell_nodes(eps: float, n: int, count: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint radii on ``(1/eps - eps, 1/eps + eps)`` with weights ``omega |x|^(n-1) dr``."""
    lo, hi = 1 / eps - eps, 1 / eps + eps
    h = (hi - lo) / count
    rho = lo + h * (np.arange(count) + 0.5)
    return rho, sphere_area(n) * rho ** (n - 1) * h


def shell_volume(eps: float, n: int, count: int = 64) -> float:
    """Shell measure by the same radial rule used for the shell norms."""
    return float(np.sum(shell_nodes(eps, n, count)[1]))


def shell_volume_exact(eps: float, n: int) -> float:
    return ball_volume(n) * eps ** (-n) * ((1 + eps ** 2) ** n - (1 - eps ** 2) ** n)
