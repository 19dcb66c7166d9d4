"""Free Schrödinger group and the frequency-localised propagators.

Everything here is a Fourier multiplier on the periodic grid:

* ``free_propagate``:       ``exp(-i t |xi|^2)``
* ``localized_propagate``:  ``phi(xi) exp(-i t |xi|^2)`` and its adjoint
  ``phi(xi) exp(+i t |xi|^2)``

The localised operator written with an explicit Fourier integral and no
``(2 pi)^-n`` prefactor equals ``(2 pi)^n`` times the multiplier used here
(see :func:`fourier_integral_prefactor`).  Every estimate is homogeneous in that
constant, so the library works with the normalised multiplier, which keeps
``T_t`` a contraction and ``T_t T_s*`` exactly the ``|phi|^2`` multiplier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .grid import GridSpec, SpatialField, apply_multiplier, lebesgue_norm


@dataclass(frozen=True)
class CutoffProfile:
    """Radial cutoff: 1 on ``|xi| <= inner``, 0 beyond ``outer``, raised cosine between."""

    inner_radius: float = 1.0
    outer_radius: float = 2.0
    transition: str = "raised-cosine"

    def __call__(self, rho) -> np.ndarray:
        rho = np.abs(np.asarray(rho, dtype=float))
        width = self.outer_radius - self.inner_radius
        s = np.clip((rho - self.inner_radius) / width, 0.0, 1.0)
        out = np.cos(0.5 * np.pi * s) ** 2
        return np.where(rho > self.outer_radius, 0.0, out)


PHI = CutoffProfile()


def cutoff_value(xi) -> np.ndarray | float:
    """``phi(xi)``.  ``xi`` is a scalar radius or a vector (last axis = components)."""
    xi = np.asarray(xi, dtype=float)
    rho = np.abs(xi) if xi.ndim == 0 else np.linalg.norm(xi, axis=-1)
    out = PHI(rho)
    return float(out) if np.ndim(out) == 0 else out


def cutoff_on_grid(spec: GridSpec) -> np.ndarray:
    return PHI(np.sqrt(spec.frequency_squared()))


def fourier_integral_prefactor(n: int) -> float:
    """Constant relating the un-normalised Fourier-integral ``T_t`` to ours."""
    return (2 * math.pi) ** n


def free_multiplier(spec: GridSpec, t: float) -> np.ndarray:
    return np.exp(-1j * t * spec.frequency_squared())


def localized_multiplier(spec: GridSpec, t: float, adjoint: bool = False) -> np.ndarray:
    sign = 1.0 if adjoint else -1.0
    return cutoff_on_grid(spec) * np.exp(sign * 1j * t * spec.frequency_squared())


def composed_multiplier(spec: GridSpec, t: float, s: float) -> np.ndarray:
    """Multiplier of ``T_t T_s*``: ``|phi|^2 exp(-i (t - s) |xi|^2)``."""
    return cutoff_on_grid(spec) ** 2 * np.exp(-1j * (t - s) * spec.frequency_squared())


def free_propagate(f: SpatialField, t: float) -> SpatialField:
    """``exp(i t Laplacian) f``; exactly unitary in the discrete L^2 norm."""
    if t == 0:
        return f
    return SpatialField(f.spec, apply_multiplier(f.values, free_multiplier(f.spec, t), f.spec.n))


def localized_propagate(f: SpatialField, t: float, adjoint: bool = False) -> SpatialField:
    """``T_t f`` (or ``T_t* f`` when ``adjoint``); output band-limited to ``|xi| <= 2``."""
    m = localized_multiplier(f.spec, t, adjoint)
    return SpatialField(f.spec, apply_multiplier(f.values, m, f.spec.n))


def iter_localized_orbit(f: SpatialField, times):
    """Yield ``T_t f`` for each ``t``; phases are evaluated on the band ``phi > 0`` only."""
    spec = f.spec
    phi = cutoff_on_grid(spec)
    band = phi > 0
    fhat = sfft.fftn(f.values)[band] * phi[band]
    k2 = spec.frequency_squared()[band]
    buf = np.zeros(spec.shape, dtype=complex)
    for t in times:
        buf[band] = fhat * np.exp(-1j * t * k2)
        yield sfft.ifftn(buf)


def localized_orbit(f: SpatialField, times) -> np.ndarray:
    """Stack of ``T_t f`` for every ``t`` in ``times`` (one forward FFT)."""
    out = np.empty((len(times),) + f.spec.shape, dtype=complex)
    for i, slice_ in enumerate(iter_localized_orbit(f, times)):
        out[i] = slice_
    return out


def dispersive_ratio(f: SpatialField, t: float) -> float:
    """``||T_t f||_inf (1 + |t|)^(n/2) / ||f||_1``, for ``|t| <= T_max``."""
    spec = f.spec
    if abs(t) > spec.t_max + 1e-12:
        raise ValueError(f"|t| = {abs(t)} exceeds wrap-around guard T_max = {spec.t_max:.4g}")
    l1 = lebesgue_norm(f, 1)
    if l1 == 0:
        raise ValueError("zero field")
    sup = lebesgue_norm(localized_propagate(f, t), 0)
    return sup * (1 + abs(t)) ** (spec.n / 2) / l1


def gaussian_bump(spec: GridSpec, width: float, center=None) -> SpatialField:
    """Periodised-in-place Gaussian ``exp(-|x - c|^2 / (2 width^2))``."""
    xs = spec.coordinates()
    c = np.zeros(spec.n) if center is None else np.asarray(center, dtype=float)
    r2 = sum((x - ci) ** 2 for x, ci in zip(xs, c))
    return SpatialField(spec, np.exp(-r2 / (2 * width ** 2)))


def free_gaussian(spec: GridSpec, width: float, t: float) -> SpatialField:
    """Closed-form whole-space evolution of :func:`gaussian_bump` (centre 0).

    ``exp(i t Lap) exp(-|x|^2/(2a^2)) = (1 + 2it/a^2)^(-n/2) exp(-|x|^2 / (2a^2 + 4it))``
    """
    a2 = width ** 2
    r2 = spec.radius() ** 2
    return SpatialField(spec, (1 + 2j * t / a2) ** (-spec.n / 2) * np.exp(-r2 / (2 * a2 + 4j * t)))
