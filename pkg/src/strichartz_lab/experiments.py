"""Numerical experiments: Strichartz ratios, dyadic bilinear decay, counterexample slopes.

Every sweep returns :class:`SweepRecord` rows.  Randomness flows from an
explicit integer seed through :func:`numpy.random.default_rng`, one child
stream per trial, so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .atoms import decompose
from .duhamel import ball_volume, kernel_duhamel, shell_nodes
from .exponents import ExponentTuple, beta, counterexample_exponents
from .grid import (
    GridSpec,
    SpaceTimeField,
    SpatialField,
    lebesgue_norm,
    random_bandlimited,
    time_norm,
)
from .propagator import cutoff_on_grid, dispersive_ratio, gaussian_bump, iter_localized_orbit
from .radial import RadialGrid, RadialSlab, duality_map, slab_offsets


@dataclass(frozen=True)
class SweepRecord:
    """One row of a sweep: the swept parameter plus named measurements."""

    parameter: str
    value: float
    measured: dict[str, float] = field(default_factory=dict)
    ratios: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name, v in {**self.measured, **self.ratios}.items():
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} = {v!r} is not a finite non-negative number")

    def columns(self) -> list[str]:
        return [self.parameter, *self.measured, *self.ratios]

    def row(self) -> list[float]:
        return [self.value, *self.measured.values(), *self.ratios.values()]


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float  # natural-log intercept
    max_residual: float
    count: int


def fit_loglog(points) -> SlopeFit:
    """Least-squares line through ``(log x, log y)``."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("log-log fit needs strictly positive values")
    lx = np.log([p[0] for p in pts])
    ly = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = np.abs(ly - (slope * lx + intercept))
    return SlopeFit(float(slope), float(intercept), float(resid.max()), len(pts))


def _run(func, items, threads: int | None):
    """Order-preserving map, optionally on a thread pool."""
    items = list(items)
    if threads and threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, items))
    return [func(x) for x in items]


def _child_rngs(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


# ---------------------------------------------------------------------------
# Abstract Strichartz ratio
# ---------------------------------------------------------------------------

def check_admissible_range(inv_q, inv_r, n: int) -> None:
    """Reject ``(q, r)`` outside ``r, q >= 2``, ``n/r + 2/q <= n/2``, naming the failure."""
    inv_q, inv_r = Fraction(inv_q), Fraction(inv_r)
    if inv_q > Fraction(1, 2):
        raise ValueError(f"1/q = {inv_q} violates 1/q <= 1/2")
    if inv_r > Fraction(1, 2):
        raise ValueError(f"1/r = {inv_r} violates 1/r <= 1/2")
    if n * inv_r + 2 * inv_q > Fraction(n, 2):
        raise ValueError(f"n/r + 2/q = {n * inv_r + 2 * inv_q} violates n/r + 2/q <= n/2 = {Fraction(n, 2)}")


def strichartz_ratio(f: SpatialField, inv_q, inv_r, times) -> float:
    """``||T_t f||_{L^q_t L^r_x} / ||f||_2`` over the sample ``times``."""
    times = np.asarray(times, dtype=float)
    dt = float(times[1] - times[0]) if len(times) > 1 else 1.0
    slices = np.array([lebesgue_norm(SpatialField(f.spec, u), inv_r)
                       for u in iter_localized_orbit(f, times)])
    return time_norm(slices, inv_q, dt) / lebesgue_norm(f, Fraction(1, 2))


def strichartz_ratio_records(inv_q, inv_r, n: int, trials: int, seed: int = 0,
                             spec: GridSpec | None = None, threads: int | None = None
                             ) -> list[SweepRecord]:
    check_admissible_range(inv_q, inv_r, n)
    spec = spec or GridSpec.default(n)
    T = spec.t_max
    count = int(math.floor(2 * T / spec.dt))
    times = -T + spec.dt * np.arange(count)

    def one(item):
        i, rng = item
        f = random_bandlimited(spec, rng)
        return SweepRecord("trial", i, {"ratio": strichartz_ratio(f, inv_q, inv_r, times)})

    return _run(one, enumerate(_child_rngs(seed, trials)), threads)


def strichartz_ratio_sweep(inv_q, inv_r, n: int, trials: int, seed: int = 0,
                           spec: GridSpec | None = None, threads: int | None = None) -> float:
    """Empirical sup over random band-limited unit-``L^2`` data of the Strichartz ratio.

    Time window ``[-T_max, T_max)`` of the grid, step ``spec.dt``.
    """
    recs = strichartz_ratio_records(inv_q, inv_r, n, trials, seed, spec, threads)
    return max(r.measured["ratio"] for r in recs)


# ---------------------------------------------------------------------------
# Dyadic bilinear form
# ---------------------------------------------------------------------------

def _slab_sum_rows(weighted: np.ndarray, m: int) -> np.ndarray:
    cs = np.concatenate([np.zeros((1,) + weighted.shape[1:], weighted.dtype),
                         np.cumsum(weighted, axis=0)])
    idx = np.arange(weighted.shape[0])
    return cs[np.maximum(idx - m, 0)] - cs[np.maximum(idx - 2 * m, 0)]


def bilinear_Bj(F: SpaceTimeField, G: SpaceTimeField, j: int) -> complex:
    """``B_j(F, G)`` on the periodic grid.

    Double left-endpoint sum of ``<T_s* F_s, T_t* G_t>`` over the slab
    ``t - 2^(j+1) <= s < t - 2^j``.  Only modes with ``phi > 0`` contribute, so
    the sum is carried out on that band with prefix sums over ``s``.
    """
    spec = F.spec
    if G.spec != spec or not np.array_equal(F.times, G.times):
        raise ValueError("F and G must share grid and time stamps")
    m = slab_offsets(j, spec.dt)
    if 2 * m > len(F):
        raise ValueError(f"slab 2^{j + 1} exceeds the window length {len(F) * spec.dt}")
    phi = cutoff_on_grid(spec)
    band = phi > 0
    k2 = spec.frequency_squared()[band]
    axes = tuple(range(1, spec.n + 1))
    phase = np.exp(1j * np.outer(F.times, k2)) * phi[band]
    Fs = np.fft.fftn(F.values, axes=axes)[:, band] * phase
    Gs = np.fft.fftn(G.values, axes=axes)[:, band] * phase
    S = _slab_sum_rows(Fs, m)
    scale = spec.cell_volume / np.prod(spec.shape) * spec.dt ** 2
    return complex(np.vdot(Gs, S) * scale)


def _bump(x: np.ndarray) -> np.ndarray:
    """Smooth bump supported on (0, 1), peak 1 at 1/2."""
    out = np.zeros_like(x, dtype=float)
    inside = (x > 0) & (x < 1)
    xi = x[inside]
    out[inside] = np.exp(4 - 1 / (xi * (1 - xi)))
    return out


FAMILIES = ("resonant", "parabolic")


@dataclass(frozen=True)
class BilinearSetup:
    """Discretisation of one dyadic scale ``j`` on the radial backend."""

    j: int
    dt: float
    grid: RadialGrid
    times: np.ndarray

    @classmethod
    def for_scale(cls, j: int, refine: int = 0, dt: float | None = None) -> "BilinearSetup":
        """Window ``[0, 4W)`` with ``W = 2^j``; ``refine`` halves ``dt`` and ``dr`` that often.

        By default ``dt = min(W / 16, 1/4)``; a fixed ``dt`` must resolve the
        slab.  The ball radius exceeds the distance ``4 * 4W`` a ``|xi| <= 2``
        packet travels in the window, so the Dirichlet wall is never reached.
        """
        W = 2.0 ** j
        dt = (min(W / 16, 0.25) if dt is None else dt) / 2 ** refine
        slab_offsets(j, dt)
        grid = RadialGrid.covering(16 * W + 32, dr=0.25 / 2 ** refine)
        times = dt * np.arange(int(round(4 * W / dt)))
        return cls(j, dt, grid, times)

    def slab(self) -> RadialSlab:
        return RadialSlab(self.grid, self.times, self.dt, self.j)


def _random_source(setup: BilinearSetup, family: str, rng: np.random.Generator) -> np.ndarray:
    """Reduced unknown ``v`` of a random radial band-limited source on ``[W, 4W)``.

    ``resonant``: unit-scale profile with on-shell frequencies ``omega in (1/4, 4)``.
    ``parabolic``: profile and frequencies dilated to the parabolic scale ``2^(j/2)``.
    """
    W = 2.0 ** setup.j
    sigma = max(1.0, 2.0 ** (setup.j / 2)) if family == "parabolic" else 1.0
    r, t = setup.grid.r, setup.times
    env = _bump((t - W) / (3 * W))
    out = np.zeros((len(t), len(r)), dtype=complex)
    for _ in range(3):
        kappa = rng.uniform(0.0, 2.0) / sigma
        omega = rng.uniform(0.25, 4.0) / sigma ** 2
        c = rng.standard_normal() + 1j * rng.standard_normal()
        profile = np.sinc(kappa * r / np.pi) * np.exp(-0.5 * (r / (2 * sigma)) ** 2)
        out += c * np.outer(env * np.exp(-1j * omega * t), profile)
    return setup.grid.from_profile(out)


@dataclass(frozen=True)
class BilinearTrial:
    family: str
    rho_start: float
    rho: float
    steps: int


def _ascend(slab: RadialSlab, t: ExponentTuple, G: np.ndarray, steps: int, tol: float):
    """Alternating Hölder-dual ascent of ``|B_j(F, G)| / (||F|| ||G||)``.

    ``F <- dual(A* G)``, ``G <- dual(A F)``: each half-step can only increase
    the value, which is recorded in ``history``.
    """
    grid, dt = slab.grid, slab.dt
    iq, ir = float(t.inv_q), float(t.inv_r)
    iqt, irt = float(t.inv_qt), float(t.inv_rt)
    G = duality_map(grid, slab.apply(duality_map(grid, slab.adjoint(G), iqt, irt, dt)), iq, ir, dt) \
        if steps else G
    history = []
    F = duality_map(grid, slab.adjoint(G), iqt, irt, dt)
    history.append(_rho(slab, t, F, G))
    for _ in range(max(steps - 1, 0)):
        G = duality_map(grid, slab.apply(F), iq, ir, dt)
        F = duality_map(grid, slab.adjoint(G), iqt, irt, dt)
        history.append(_rho(slab, t, F, G))
        if history[-1] <= history[-2] * (1 + tol):
            break
    return F, G, history


def rho_j(slab: RadialSlab, t: ExponentTuple, F: np.ndarray, G: np.ndarray) -> float:
    """``|B_j(F, G)| / (2^(j beta) ||F||_{L^{qt'} L^{rt'}} ||G||_{L^{q'} L^{r'}})``."""
    return _rho(slab, t, F, G) / 2.0 ** (slab.j * float(beta(t).value))


def _rho(slab: RadialSlab, t: ExponentTuple, F: np.ndarray, G: np.ndarray) -> float:
    """``|B_j(F, G)| / (||F||_{L^{qt'} L^{rt'}} ||G||_{L^{q'} L^{r'}})`` (no ``2^(j beta)``)."""
    grid, dt = slab.grid, slab.dt
    nf = grid.mixed_norm(F, t.inv_qt_prime, t.inv_rt_prime, dt)
    ng = grid.mixed_norm(G, t.inv_q_prime, t.inv_r_prime, dt)
    if nf == 0 or ng == 0:
        return 0.0
    return abs(slab.bilinear(F, G)) / (nf * ng)


def bilinear_trial(t: ExponentTuple, setup: BilinearSetup, family: str,
                   rng: np.random.Generator, steps: int = 6, tol: float = 1e-3,
                   slab: RadialSlab | None = None) -> BilinearTrial:
    slab = slab or setup.slab()
    G0 = _random_source(setup, family, rng)
    F0 = _random_source(setup, family, rng)
    start = _rho(slab, t, F0, G0)
    if steps == 0:
        return BilinearTrial(family, start, start, 0)
    _, _, hist = _ascend(slab, t, G0, steps, tol)
    return BilinearTrial(family, start, max(start, max(hist)), len(hist))


def bilinear_decay_sweep(t: ExponentTuple, j_range, trials: int, seed: int = 0,
                         steps: int = 6, refine: int = 0, families=FAMILIES,
                         threads: int | None = None, dt: float | None = None) -> list[SweepRecord]:
    """``rho_j`` per dyadic scale: max over random starts of the normalised ``|B_j|``.

    Three-dimensional radial inputs on the exact radial reduction.  Each
    random start (``trials`` per family) is improved by ``steps`` rounds of
    dual ascent.  Records carry ``rho`` (normalised by ``2^(j beta)``),
    ``sup_Bj`` (unit-norm inputs, no ``2^(j beta)``) and the best
    un-refined random value ``rho_random``.
    """
    b = beta(t)
    if not b.flag:
        raise ValueError(f"tuple outside the bilinear lemma: {b.violated}")
    if t.n != 3:
        raise ValueError("the radial backend is three-dimensional; need n = 3")
    js = sorted(int(j) for j in j_range)
    for j in js:
        slab_offsets(j, min(2.0 ** j / 16, 0.25) if dt is None else dt)
    records = []
    for j in js:
        # one scale at a time keeps a single slab's phase table in memory
        setup = BilinearSetup.for_scale(j, refine, dt)
        slab = setup.slab()
        rngs = _child_rngs(seed * 1000003 + (j + 64), trials * len(families))
        jobs = [(fam, rngs[k * trials + i]) for k, fam in enumerate(families) for i in range(trials)]
        rows = _run(lambda job: bilinear_trial(t, setup, job[0], job[1], steps, slab=slab),
                    jobs, threads)
        del slab
        sup = max(tr.rho for tr in rows)
        scale = 2.0 ** (j * float(b.value))
        measured = {"sup_Bj": sup, "rho_random": max(tr.rho_start for tr in rows) / scale}
        for fam in families:
            measured[f"rho_{fam}"] = max(tr.rho for tr in rows if tr.family == fam) / scale
        records.append(SweepRecord("j", j, measured, {"rho": sup / scale}))
    return records


# ---------------------------------------------------------------------------
# Counterexample family
# ---------------------------------------------------------------------------

def rhs_norm_analytic(eps: float, inv_qt_prime, inv_rt_prime, n: int) -> float:
    """``||1_{0<s<eps^2, |y|<eps}||_{L^{qt'}_s L^{rt'}_y} = (eps^2)^(1/qt') (V_n eps^n)^(1/rt')``."""
    if not 0 < eps < 0.5:
        raise ValueError("need 0 < eps < 1/2")
    return float((eps ** 2) ** float(inv_qt_prime) * (ball_volume(n) * eps ** n) ** float(inv_rt_prime))


@dataclass(frozen=True)
class CounterexampleResult:
    records: list[SweepRecord]
    lhs_fit: SlopeFit
    rhs_fit: SlopeFit
    ratio_fit: SlopeFit
    predicted: dict[str, Fraction]
    mirrored: dict[str, Fraction]


def restricted_lhs(t: ExponentTuple, eps: float, time_points: int = 8, shell_points: int = 64,
                   resolution=None) -> tuple[float, float]:
    """``||I(F_eps)||`` over ``10 < t < 11`` and the shell ``||x| - 1/eps| < eps``.

    Midpoint rule in time; radial midpoint rule on the shell, evaluating the
    kernel along the first axis (the output is radial).  Returns the norm and
    the largest kernel error estimate relative to the smallest value.
    """
    n = t.n
    rho, w = shell_nodes(eps, n, shell_points)
    ts = 10 + (np.arange(time_points) + 0.5) / time_points
    vals = np.empty((time_points, shell_points))
    errs = np.empty_like(vals)
    for a, tt in enumerate(ts):
        for b, r in enumerate(rho):
            x = np.zeros(n)
            x[0] = r
            kv = kernel_duhamel(x, float(tt), eps, n, resolution)
            vals[a, b], errs[a, b] = abs(kv.value), kv.error
    inv_r, inv_q = float(t.inv_r), float(t.inv_q)
    if inv_r == 0:
        shell = vals.max(axis=1)
    else:
        shell = np.sum(vals ** (1 / inv_r) * w, axis=1) ** inv_r
    norm = time_norm(shell, inv_q, 1 / time_points)
    return norm, float(errs.max() / vals.min())


def counterexample_sweep(t: ExponentTuple, eps_list=(1 / 4, 1 / 8, 1 / 16, 1 / 32),
                         threads: int | None = None, time_points: int = 8,
                         shell_points: int = 64, resolution=None) -> CounterexampleResult:
    eps_list = [float(e) for e in eps_list]
    if any(not 0 < e < 0.5 for e in eps_list):
        raise ValueError("every eps must lie in (0, 1/2)")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    lhs = _run(lambda e: restricted_lhs(t, e, time_points, shell_points, resolution), eps_list, threads)
    records = []
    for e, (value, rel_err) in zip(eps_list, lhs):
        rhs = rhs_norm_analytic(e, t.inv_qt_prime, t.inv_rt_prime, t.n)
        records.append(SweepRecord("eps", e, {"lhs": value, "rhs": rhs, "rel_error": rel_err},
                                   {"ratio": value / rhs}))
    return CounterexampleResult(
        records,
        fit_loglog([(r.value, r.measured["lhs"]) for r in records]),
        fit_loglog([(r.value, r.measured["rhs"]) for r in records]),
        fit_loglog([(r.value, r.ratios["ratio"]) for r in records]),
        counterexample_exponents(t),
        counterexample_exponents(t, dual=True),
    )


# ---------------------------------------------------------------------------
# Dispersive decay and atom audits
# ---------------------------------------------------------------------------

def dispersive_sweep(n: int, width: float = 0.25, samples: int = 65,
                     spec: GridSpec | None = None) -> list[SweepRecord]:
    """Dispersive ratio of a narrow centred bump at ``samples`` times in ``[0, T_max]``."""
    spec = spec or GridSpec.default(n)
    f = gaussian_bump(spec, width)
    out = []
    for t in np.linspace(0.0, spec.t_max, samples):
        out.append(SweepRecord("t", float(t), {}, {"ratio": dispersive_ratio(f, float(t))}))
    return out


def random_atom_field(spec: GridSpec, rng: np.random.Generator) -> SpatialField:
    """Heavy-tailed sparse field: many occupied dyadic bands."""
    z = rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape)
    z = z * np.exp(2 * rng.standard_normal(spec.shape))
    z = z * (rng.random(spec.shape) < rng.uniform(0.05, 1.0))
    return SpatialField(spec, z)


def atoms_audit(seeds: int, p_values=(1, 1.5, 2, 4), seed: int = 0, spec: GridSpec | None = None,
                threads: int | None = None) -> list[SweepRecord]:
    """Empirical ``(C_a, C_s, C_c)`` and reconstruction error per (field, p)."""
    spec = spec or GridSpec(2, 64)

    def one(item):
        i, rng = item
        f = random_atom_field(spec, rng)
        top = float(np.abs(f.values).max())
        rows = []
        for p in p_values:
            dec = decompose(f, float(p))
            a = dec.audit(f)
            err = float(np.abs(dec.reconstruct(f).values - f.values).max()) / top if top else 0.0
            rows.append(SweepRecord("field", i, {"p": float(p), "C_a": a["C_a"], "C_s": a["C_s"],
                                                 "C_c": a["C_c"], "reconstruction": err}))
        return rows

    return [r for rows in _run(one, enumerate(_child_rngs(seed, seeds)), threads) for r in rows]


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def config_hash(config: dict) -> str:
    text = "\n".join(f"{k}={config[k]}" for k in sorted(config))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def records_to_csv(experiment: str, config: dict, records: list[SweepRecord],
                   summary: dict[str, SlopeFit] | None = None, extra: dict | None = None) -> str:
    """'#' metadata lines, a header row, one row per record, '#' fit summaries."""
    buf = io.StringIO()
    buf.write(f"# strichartz_lab {__version__} experiment={experiment} "
              f"config_hash={config_hash(config)}\n")
    for k in sorted(config):
        buf.write(f"# {k}={config[k]}\n")
    for k, v in (extra or {}).items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    if records:
        w.writerow(records[0].columns())
        for r in records:
            w.writerow([repr(float(v)) for v in r.row()])
    for name, fit in (summary or {}).items():
        buf.write(f"# fit {name}: slope={fit.slope!r} intercept={fit.intercept!r} "
                  f"max_residual={fit.max_residual!r} points={fit.count}\n")
    return buf.getvalue()

