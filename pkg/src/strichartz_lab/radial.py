"""Exact radial reduction of three-dimensional multipliers.

For radial ``u(x) = v(|x|) / |x|`` on R^3 one has ``-Lap u = (-v'') / |x|``, so
any multiplier ``m(|xi|)`` acts on ``v`` as the one-dimensional multiplier
``m(|k|)`` on the odd extension of ``v``.  Imposing ``v(R) = 0`` turns this into
a sine series on ``(0, R)``, diagonalised by the type-I DST.  The grid is
therefore a ball of radius ``R`` in R^3 at the cost of a 1-D transform, which
is what makes dyadic time separations up to ``2^7`` affordable without
periodic wrap-around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .grid import scaled_power_sum, time_norm
from .propagator import PHI


@dataclass(frozen=True)
class RadialGrid:
    """Nodes ``r_m = m dr`` (``m = 1 .. M-1``) in a ball of radius ``R = M dr``."""

    points: int
    radius: float

    @classmethod
    def covering(cls, radius: float, dr: float = 0.25) -> "RadialGrid":
        M = sfft.next_fast_len(max(16, math.ceil(radius / dr)))
        return cls(M, M * dr)

    @property
    def dr(self) -> float:
        return self.radius / self.points

    @property
    def r(self) -> np.ndarray:
        return self.dr * np.arange(1, self.points)

    @property
    def k(self) -> np.ndarray:
        return math.pi * np.arange(1, self.points) / self.radius

    @property
    def shell_weights(self) -> np.ndarray:
        """``4 pi r^2 dr``: Riemann weights of the radial measure."""
        return 4 * math.pi * self.r ** 2 * self.dr

    def cutoff(self) -> np.ndarray:
        return PHI(self.k)

    # v <-> spectral coefficients (orthonormal, acting on the last axis)
    def forward(self, v: np.ndarray) -> np.ndarray:
        return sfft.dst(v, type=1, norm="ortho", axis=-1)

    def inverse(self, c: np.ndarray) -> np.ndarray:
        return sfft.idst(c, type=1, norm="ortho", axis=-1)

    def from_profile(self, u: np.ndarray) -> np.ndarray:
        """3-D radial values ``u(r_m)`` -> reduced unknown ``v = r u``."""
        return u * self.r

    def to_profile(self, v: np.ndarray) -> np.ndarray:
        return v / self.r

    def origin_value(self, v: np.ndarray) -> np.ndarray:
        """``u(0) = v'(0)`` from the sine series."""
        c = self.forward(v)
        return (c * self.k).sum(axis=-1) * math.sqrt(2 / self.points)

    def inner(self, v1: np.ndarray, v2: np.ndarray) -> complex:
        """L^2(R^3) inner product of two radial functions."""
        return complex(4 * math.pi * self.dr * np.vdot(v2, v1))

    def slice_norms(self, v: np.ndarray, inv_p) -> np.ndarray:
        """``L^p(R^3)`` norm of every row of ``v`` (reduced unknowns)."""
        inv_p = float(inv_p)
        u = np.abs(v) / self.r
        if inv_p == 0:
            return np.maximum(u.max(axis=-1), np.abs(self.origin_value(v)))
        return scaled_power_sum(u, inv_p, self.shell_weights, -1)

    def mixed_norm(self, v: np.ndarray, inv_q, inv_r, dt: float) -> float:
        return time_norm(self.slice_norms(v, inv_r), inv_q, dt)

    def propagate(self, v: np.ndarray, t: float, localized: bool = False,
                  adjoint: bool = False) -> np.ndarray:
        sign = 1.0 if adjoint else -1.0
        m = np.exp(sign * 1j * t * self.k ** 2)
        if localized:
            m = m * self.cutoff()
        return self.inverse(self.forward(v) * m)


def slab_offsets(j: int, dt: float) -> int:
    """Number of time steps in ``2^j``; rejects slabs ``dt`` cannot resolve."""
    width = 2.0 ** j
    if width < dt * (1 - 1e-12):
        raise ValueError(f"slab width 2^{j} = {width} is below the time step {dt}")
    m = width / dt
    if abs(m - round(m)) > 1e-9:
        raise ValueError(f"slab width 2^{j} is not a multiple of dt = {dt}")
    return int(round(m))


def _slab_sums(weighted: np.ndarray, m: int, adjoint: bool) -> np.ndarray:
    """Row ``k`` of the result is ``sum_{i in slab(k)} weighted[i]``.

    Forward slab: ``k - 2m <= i < k - m``; adjoint slab: ``k + m < i <= k + 2m``.
    """
    nt = weighted.shape[0]
    cs = np.concatenate([np.zeros((1,) + weighted.shape[1:], weighted.dtype),
                         np.cumsum(weighted, axis=0)])
    idx = np.arange(nt)
    if adjoint:
        lo, hi = np.minimum(idx + m + 1, nt), np.minimum(idx + 2 * m + 1, nt)
    else:
        lo, hi = np.maximum(idx - 2 * m, 0), np.maximum(idx - m, 0)
    return cs[hi] - cs[lo]


@dataclass
class RadialSlab:
    """Dyadic slab operator on a radial space-time grid.

    ``apply(F)[t] = sum_{t - 2W <= s < t - W} T_t T_s* F_s dt`` and ``adjoint``
    is its transpose, so that ``B_j(F, G) = <apply(F), G>`` over space-time.
    """

    grid: RadialGrid
    times: np.ndarray
    dt: float
    j: int

    def __post_init__(self):
        self.m = slab_offsets(self.j, self.dt)
        if 2 * self.m > len(self.times):
            raise ValueError(f"slab 2^{self.j + 1} exceeds the time window")
        k2 = self.grid.k ** 2
        self._phase = np.exp(1j * np.outer(self.times, k2))
        self._phi = self.grid.cutoff()

    def _star(self, V: np.ndarray) -> np.ndarray:
        """Spectral coefficients of ``T_s* V_s`` for every row."""
        return self.grid.forward(V) * self._phi * self._phase

    def _unstar(self, S: np.ndarray) -> np.ndarray:
        """``T_t`` applied row-wise to spectral coefficients, back to v."""
        return self.grid.inverse(S * self._phi * np.conj(self._phase))

    def apply(self, F: np.ndarray) -> np.ndarray:
        return self._unstar(_slab_sums(self._star(F) * self.dt, self.m, adjoint=False))

    def adjoint(self, G: np.ndarray) -> np.ndarray:
        return self._unstar(_slab_sums(self._star(G) * self.dt, self.m, adjoint=True))

    def bilinear(self, F: np.ndarray, G: np.ndarray) -> complex:
        """``B_j(F, G)``: double Riemann sum of ``<T_s* F_s, T_t* G_t>`` over the slab."""
        S = _slab_sums(self._star(F) * self.dt, self.m, adjoint=False)
        Gs = self._star(G)
        return complex(4 * math.pi * self.grid.dr * np.vdot(Gs, S) * self.dt)


def _unit_rows(grid: RadialGrid, u: np.ndarray, inv_p: float) -> np.ndarray:
    """Scale each row of the profile ``u`` to unit ``L^p`` norm (nodes only)."""
    if inv_p == 0:
        norms = np.abs(u).max(axis=1)
    else:
        norms = scaled_power_sum(np.abs(u), inv_p, grid.shell_weights, 1)
    out = np.zeros_like(u)
    live = norms > 0
    out[live] = u[live] / norms[live, None]
    return out


def duality_map(grid: RadialGrid, H: np.ndarray, inv_q, inv_r, dt: float) -> np.ndarray:
    """Unit-norm ``G`` in ``L^{q'}_t L^{r'}_x`` with ``<H, G> = ||H||_{L^q L^r}``.

    Hölder extremiser ``|H|^{r-2} H`` per slice with time weights
    ``||H_t||_r^{q-1}``; ``r = inf`` concentrates each slice on one shell and
    ``q = inf`` on one time.  For ``r = inf`` the delta sits on the largest
    node value, so the pairing attains the node maximum; it falls short of
    ``||H||`` only when the spectral origin value exceeds every node.  Powers are taken after dividing by the maximum,
    so large exponents cannot overflow.  ``H`` and the result are reduced
    unknowns ``v``.
    """
    inv_q, inv_r = float(inv_q), float(inv_r)
    u = H / grid.r
    a = np.abs(u)
    phase = np.exp(1j * np.angle(u))
    norms = grid.slice_norms(H, inv_r)
    G = np.zeros_like(u)
    if inv_r == 0:
        rows = np.flatnonzero(norms > 0)
        cols = np.argmax(a[rows], axis=1)
        G[rows, cols] = phase[rows, cols] / grid.shell_weights[cols]
    else:
        top = a.max(axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            G = np.where(top > 0, phase * (a / np.where(top > 0, top, 1)) ** (1 / inv_r - 1), 0)
        G = _unit_rows(grid, G, 1 - inv_r)
    if norms.max(initial=0) == 0:
        return np.zeros_like(H)
    if inv_q == 0:
        w = np.zeros_like(norms)
        w[int(np.argmax(norms))] = 1 / dt
    else:
        w = (norms / norms.max()) ** (1 / inv_q - 1)
        w = w / time_norm(w, 1 - inv_q, dt)
    return G * w[:, None] * grid.r
