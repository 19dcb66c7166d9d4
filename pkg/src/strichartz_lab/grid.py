"""Periodic grids, discrete Fourier transforms and Riemann-sum Lebesgue norms."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DEFAULT_POINTS = {1: 1024, 2: 256, 3: 64}
DEFAULT_EXTENT = 16 * math.pi


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[-L/2, L/2)^n`` plus a half-open time window.

    The frequency lattice is ``(2 pi / L) Z^n`` cut to the Nyquist box.  The
    constraints below guarantee the cutoff annulus ``1 <= |xi| <= 2`` gets at
    least four lattice samples radially and sits well inside the box.
    """

    n: int
    points_per_axis: int
    extent: float = DEFAULT_EXTENT
    dt: float = 0.125
    time_window: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.n}")
        N = self.points_per_axis
        if N < 2 or N & (N - 1):
            raise ValueError(f"points_per_axis must be a power of two, got {N}")
        if self.extent <= 0 or self.dt <= 0:
            raise ValueError("extent and dt must be positive")
        if 2 * math.pi / self.extent > 0.25 + 1e-12:
            raise ValueError(f"frequency spacing 2pi/L = {2 * math.pi / self.extent:.4g} > 1/4")
        if math.pi * N / self.extent < 4 - 1e-12:
            raise ValueError(f"Nyquist frequency {math.pi * N / self.extent:.4g} < 4")
        t0, t1 = self.time_window
        if not t1 > t0:
            raise ValueError("time window must be non-empty")
        object.__setattr__(self, "time_window", (float(t0), float(t1)))

    @classmethod
    def default(cls, n: int, **kw) -> "GridSpec":
        return cls(n, DEFAULT_POINTS[n], **kw)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.n

    @property
    def dx(self) -> float:
        return self.extent / self.points_per_axis

    @property
    def cell_volume(self) -> float:
        return self.dx ** self.n

    @property
    def volume(self) -> float:
        return self.extent ** self.n

    @property
    def nyquist(self) -> float:
        return math.pi / self.dx

    @property
    def t_max(self) -> float:
        """Largest |t| for which wrap-around stays negligible for the |xi| <= 2 band."""
        return self.extent / 8

    def axis(self) -> np.ndarray:
        N = self.points_per_axis
        return (np.arange(N) - N // 2) * self.dx

    def coordinates(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*([self.axis()] * self.n), indexing="ij")

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c ** 2 for c in self.coordinates()))

    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        k = 2 * np.pi * np.fft.fftfreq(self.points_per_axis, d=self.dx)
        return np.meshgrid(*([k] * self.n), indexing="ij")

    def frequency_squared(self) -> np.ndarray:
        return sum(k ** 2 for k in self.wavenumbers())

    def times(self) -> np.ndarray:
        t0, t1 = self.time_window
        count = int(math.ceil((t1 - t0) / self.dt - 1e-9))
        return t0 + self.dt * np.arange(count)

    def with_window(self, t0: float, t1: float) -> "GridSpec":
        return GridSpec(self.n, self.points_per_axis, self.extent, self.dt, (t0, t1))

    def mode_index(self, xi) -> tuple[int, ...]:
        """Array index of a lattice frequency ``xi`` (must lie on the lattice)."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if xi.shape != (self.n,):
            raise ValueError(f"need a {self.n}-vector")
        m = xi * self.extent / (2 * np.pi)
        if not np.allclose(m, np.round(m), atol=1e-9):
            raise ValueError(f"{xi} is not on the mode lattice")
        return tuple(int(v) % self.points_per_axis for v in np.round(m))

    def lattice_frequency(self, modes) -> np.ndarray:
        return 2 * np.pi * np.asarray(modes, dtype=float) / self.extent


class SpatialField:
    """Complex samples of a function on ``spec``'s spatial grid (read-only)."""

    __slots__ = ("spec", "values")

    def __init__(self, spec: GridSpec, values):
        values = np.array(values, dtype=complex)
        if values.shape != spec.shape:
            raise ValueError(f"expected shape {spec.shape}, got {values.shape}")
        values.flags.writeable = False
        self.spec = spec
        self.values = values

    def __repr__(self):
        return f"SpatialField(n={self.spec.n}, N={self.spec.points_per_axis})"

    def __add__(self, other: "SpatialField") -> "SpatialField":
        return SpatialField(self.spec, self.values + other.values)

    def __mul__(self, scalar) -> "SpatialField":
        return SpatialField(self.spec, self.values * scalar)

    __rmul__ = __mul__

    def inner(self, other: "SpatialField") -> complex:
        """Riemann-sum ``<f, g> = sum f conj(g) dx^n``."""
        return complex(np.vdot(other.values, self.values) * self.spec.cell_volume)


class SpaceTimeField:
    """Uniformly time-stamped stack of spatial slices, shape ``(nt, *spec.shape)``."""

    __slots__ = ("spec", "times", "values")

    def __init__(self, spec: GridSpec, times, values):
        times = np.array(times, dtype=float)
        values = np.array(values, dtype=complex)
        if values.shape != (len(times),) + spec.shape:
            raise ValueError(f"expected shape {(len(times),) + spec.shape}, got {values.shape}")
        if len(times) > 1:
            steps = np.diff(times)
            if np.any(steps <= 0) or not np.allclose(steps, spec.dt, rtol=1e-9, atol=1e-12):
                raise ValueError("time stamps must increase uniformly by dt")
        times.flags.writeable = False
        values.flags.writeable = False
        self.spec = spec
        self.times = times
        self.values = values

    @classmethod
    def zeros(cls, spec: GridSpec) -> "SpaceTimeField":
        t = spec.times()
        return cls(spec, t, np.zeros((len(t),) + spec.shape, dtype=complex))

    @classmethod
    def from_function(cls, spec: GridSpec, func) -> "SpaceTimeField":
        """Sample ``func(x_1, ..., x_n, t)`` on the grid and window."""
        t = spec.times()
        xs = spec.coordinates()
        values = np.stack([np.broadcast_to(func(*xs, s), spec.shape) for s in t]) if len(t) else \
            np.zeros((0,) + spec.shape)
        return cls(spec, t, values)

    def __len__(self):
        return len(self.times)

    def slice(self, i: int) -> SpatialField:
        return SpatialField(self.spec, self.values[i])

    @property
    def slices(self) -> list[tuple[float, SpatialField]]:
        return [(float(s), self.slice(i)) for i, s in enumerate(self.times)]

    def __add__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        return SpaceTimeField(self.spec, self.times, self.values + other.values)

    def __mul__(self, scalar) -> "SpaceTimeField":
        return SpaceTimeField(self.spec, self.times, self.values * scalar)

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# Transforms and norms
# ---------------------------------------------------------------------------

def _spatial_axes(arr: np.ndarray, n: int) -> tuple[int, ...]:
    return tuple(range(arr.ndim - n, arr.ndim))


def dft_forward(f: SpatialField) -> np.ndarray:
    """Unitary DFT; index ``m`` carries frequency ``2 pi m / L`` (numpy order)."""
    return np.fft.fftn(f.values, norm="ortho")


def dft_inverse(coeffs: np.ndarray, spec: GridSpec) -> SpatialField:
    return SpatialField(spec, np.fft.ifftn(coeffs, norm="ortho"))


def apply_multiplier(values: np.ndarray, multiplier: np.ndarray, n: int) -> np.ndarray:
    """Apply a Fourier multiplier to the last ``n`` axes of ``values``."""
    axes = _spatial_axes(values, n)
    return np.fft.ifftn(np.fft.fftn(values, axes=axes) * multiplier, axes=axes)


def scaled_power_sum(a: np.ndarray, inv_p: float, weights, axis) -> np.ndarray:
    """``(sum a^p w)^(1/p)`` with ``a >= 0``, computed as ``top * (sum (a/top)^p w)^(1/p)``.

    Dividing by the maximum first keeps large ``p`` from overflowing.
    """
    top = a.max(axis=axis, keepdims=True) if a.size else np.zeros((1,) * a.ndim)
    safe = np.where(top > 0, top, 1.0)
    s = np.sum((a / safe) ** (1.0 / inv_p) * weights, axis=axis) ** inv_p
    return np.squeeze(top, axis=axis) * s if axis is not None else top.ravel()[0] * s


def _norm_over_axes(values: np.ndarray, inv_r, cell: float, axes) -> np.ndarray:
    inv_r = float(inv_r)
    a = np.abs(values)
    if inv_r == 0:
        return a.max(axis=axes)
    return scaled_power_sum(a, inv_r, cell, axes)


def lebesgue_norm(f: SpatialField, inv_r) -> float:
    """Riemann-sum ``L^r`` norm; ``inv_r = 0`` gives the max modulus."""
    return float(_norm_over_axes(f.values, inv_r, f.spec.cell_volume, None))


def slice_norms(u: SpaceTimeField, inv_r) -> np.ndarray:
    """``||u(., t)||_r`` for every slice."""
    if len(u) == 0:
        return np.zeros(0)
    return _norm_over_axes(u.values, inv_r, u.spec.cell_volume, _spatial_axes(u.values, u.spec.n))


def time_norm(values: np.ndarray, inv_q, dt: float) -> float:
    """Left-endpoint ``L^q`` norm of a sequence sampled with spacing ``dt``."""
    inv_q = float(inv_q)
    values = np.abs(np.asarray(values, dtype=float))
    if values.size == 0:
        return 0.0
    if inv_q == 0:
        return float(values.max())
    return float(scaled_power_sum(values, inv_q, dt, None))


def mixed_norm(u: SpaceTimeField, inv_q, inv_r) -> float:
    """``L^q_t L^r_x`` norm: spatial norm per slice, then the time norm."""
    return time_norm(slice_norms(u, inv_r), inv_q, u.spec.dt)


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<qqddq")


def write_field(path, field_obj) -> Path:
    """Binary dump plus a ``.grid`` text sidecar recording the GridSpec.

    Header: n, points_per_axis (int64), L, dt (float64), slice count (int64);
    body: interleaved real/imaginary float64 in row-major order.
    """
    path = Path(path)
    spec = field_obj.spec
    if isinstance(field_obj, SpaceTimeField):
        values, times, kind = field_obj.values, field_obj.times, "spacetime"
    else:
        values, times, kind = field_obj.values[None], np.zeros(1), "spatial"
    header = _HEADER.pack(spec.n, spec.points_per_axis, spec.extent, spec.dt, values.shape[0])
    body = np.ascontiguousarray(values, dtype="<c16").tobytes()
    path.write_bytes(header + body)
    t0 = float(times[0]) if len(times) else spec.time_window[0]
    sidecar = (
        f"kind={kind}\nn={spec.n}\npoints_per_axis={spec.points_per_axis}\n"
        f"extent={spec.extent!r}\ndt={spec.dt!r}\n"
        f"time_window={spec.time_window[0]!r},{spec.time_window[1]!r}\nfirst_time={t0!r}\n"
    )
    path.with_suffix(path.suffix + ".grid").write_text(sidecar)
    return path


def read_field(path):
    path = Path(path)
    raw = path.read_bytes()
    n, N, L, dt, count = _HEADER.unpack_from(raw)
    meta = dict(
        line.split("=", 1)
        for line in path.with_suffix(path.suffix + ".grid").read_text().splitlines()
        if line
    )
    t0, t1 = (float(v) for v in meta["time_window"].split(","))
    spec = GridSpec(n, N, L, dt, (t0, t1))
    values = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).reshape((count,) + spec.shape)
    if meta["kind"] == "spatial":
        return SpatialField(spec, values[0])
    first = float(meta["first_time"])
    return SpaceTimeField(spec, first + dt * np.arange(count), values)


# ---------------------------------------------------------------------------
# Random inputs
# ---------------------------------------------------------------------------

def random_bandlimited(spec: GridSpec, rng: np.random.Generator, radius: float = 2.0,
                       normalize: bool = True) -> SpatialField:
    """Complex Gaussian mode coefficients on ``|xi| <= radius``, unit L^2 norm."""
    mask = spec.frequency_squared() <= radius ** 2
    coeffs = np.zeros(spec.shape, dtype=complex)
    count = int(mask.sum())
    coeffs[mask] = rng.standard_normal(count) + 1j * rng.standard_normal(count)
    f = np.fft.ifftn(coeffs, norm="ortho")
    if normalize:
        f = f / (np.linalg.norm(f) * math.sqrt(spec.cell_volume))
    return SpatialField(spec, f)
