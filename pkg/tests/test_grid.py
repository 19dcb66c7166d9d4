import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strichartz_lab.grid import (
    GridSpec,
    SpaceTimeField,
    SpatialField,
    dft_forward,
    dft_inverse,
    lebesgue_norm,
    mixed_norm,
    random_bandlimited,
    read_field,
    time_norm,
    write_field,
)

SPEC1 = GridSpec(1, 256)
SPEC2 = GridSpec(2, 64)


def rand_field(spec, rng):
    shape = spec.shape
    return SpatialField(spec, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def rand_st(spec, rng, nt=6):
    shape = (nt,) + spec.shape
    return SpaceTimeField(spec, spec.dt * np.arange(nt), rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@pytest.mark.parametrize("kw, match", [
    (dict(n=4, points_per_axis=16), "dimension"),
    (dict(n=2, points_per_axis=100), "power of two"),
    (dict(n=1, points_per_axis=64, extent=10.0), "spacing"),
    (dict(n=1, points_per_axis=16), "Nyquist"),
    (dict(n=1, points_per_axis=64, time_window=(1.0, 1.0)), "window"),
])
def test_gridspec_invariants(kw, match):
    with pytest.raises(ValueError, match=match):
        GridSpec(**kw)


def test_times_half_open():
    spec = GridSpec(1, 64, dt=0.25, time_window=(0.0, 1.0))
    assert list(spec.times()) == [0.0, 0.25, 0.5, 0.75]


def test_constant_field_energy_in_zero_mode():
    c = dft_forward(SpatialField(SPEC2, np.ones(SPEC2.shape)))
    assert abs(c[0, 0]) == pytest.approx(64)
    c[0, 0] = 0
    assert np.abs(c).max() < 1e-12


def test_single_harmonic_single_coefficient():
    xi = SPEC2.lattice_frequency([3, -2])
    x, y = SPEC2.coordinates()
    c = dft_forward(SpatialField(SPEC2, np.exp(1j * (xi[0] * x + xi[1] * y))))
    idx = SPEC2.mode_index(xi)
    assert abs(c[idx]) == pytest.approx(64)
    c[idx] = 0
    assert np.abs(c).max() < 1e-10


def test_mode_index_rejects_off_lattice():
    with pytest.raises(ValueError):
        SPEC2.mode_index([0.1, 0.0])


@pytest.mark.parametrize("seed", range(5))
def test_dft_round_trip(seed):
    f = rand_field(SPEC2, np.random.default_rng(seed))
    back = dft_inverse(dft_forward(f), SPEC2)
    assert np.abs(back.values - f.values).max() <= 1e-12 * np.abs(f.values).max()


@pytest.mark.parametrize("seed", range(5))
def test_plancherel(seed):
    f = rand_field(SPEC2, np.random.default_rng(seed))
    l2 = lebesgue_norm(f, 0.5)
    spectral = np.linalg.norm(dft_forward(f)) * math.sqrt(SPEC2.cell_volume)
    assert abs(l2 - spectral) <= 1e-10 * l2


def test_lebesgue_examples():
    V = SPEC2.volume
    half = SpatialField(SPEC2, (np.arange(64)[:, None] < 32) * np.ones((1, 64)))
    assert lebesgue_norm(half, 0.5) == pytest.approx(math.sqrt(V / 2), rel=1e-12)
    c = SpatialField(SPEC2, np.full(SPEC2.shape, -2.5))
    for inv_r in (1, 0.5, 0.25):
        assert lebesgue_norm(c, inv_r) == pytest.approx(2.5 * V ** inv_r, rel=1e-12)
    peak = np.zeros(SPEC2.shape, dtype=complex)
    peak[3, 4] = 3j
    assert lebesgue_norm(SpatialField(SPEC2, peak), 0) == 3


def test_holder_monotone_on_probability_grid():
    rng = np.random.default_rng(7)
    V = SPEC1.volume
    for _ in range(50):
        f = rand_field(SPEC1, rng)
        norms = [lebesgue_norm(f, inv_r) * V ** (-inv_r) for inv_r in (1, 0.5, 0.25, 0)]
        assert all(a <= b * (1 + 1e-12) for a, b in zip(norms, norms[1:]))


def test_mixed_norm_separable():
    rng = np.random.default_rng(1)
    b = rand_field(SPEC1, rng)
    a = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    u = SpaceTimeField(SPEC1, SPEC1.dt * np.arange(8), a[:, None] * b.values[None])
    for iq, ir in [(0.5, 0.5), (0.25, 1 / 6), (0, 0.5), (1, 0)]:
        expected = time_norm(np.abs(a), iq, SPEC1.dt) * lebesgue_norm(b, ir)
        assert mixed_norm(u, iq, ir) == pytest.approx(expected, rel=1e-12)


def test_mixed_norm_single_slice():
    rng = np.random.default_rng(2)
    b = rand_field(SPEC1, rng)
    vals = np.zeros((5,) + SPEC1.shape, dtype=complex)
    vals[2] = b.values
    u = SpaceTimeField(SPEC1, SPEC1.dt * np.arange(5), vals)
    assert mixed_norm(u, 0.25, 0.5) == pytest.approx(SPEC1.dt ** 0.25 * lebesgue_norm(b, 0.5), rel=1e-12)


def test_mixed_l2_is_flat_l2():
    u = rand_st(SPEC2, np.random.default_rng(3))
    flat = math.sqrt(np.sum(np.abs(u.values) ** 2) * SPEC2.cell_volume * SPEC2.dt)
    assert abs(mixed_norm(u, 0.5, 0.5) - flat) <= 1e-12 * flat


exponents = st.sampled_from([0, 0.25, 0.5, 1, 1 / 3])


@settings(max_examples=30)
@given(st.integers(0, 2 ** 32 - 1), exponents, exponents, st.floats(-5, 5))
def test_mixed_norm_homogeneous_and_subadditive(seed, iq, ir, lam):
    rng = np.random.default_rng(seed)
    u, v = rand_st(SPEC1, rng), rand_st(SPEC1, rng)
    nu = mixed_norm(u, iq, ir)
    assert mixed_norm(u * lam, iq, ir) == pytest.approx(abs(lam) * nu, rel=1e-12, abs=1e-300)
    assert mixed_norm(u + v, iq, ir) <= (nu + mixed_norm(v, iq, ir)) * (1 + 1e-12)


def test_spacetime_requires_uniform_stamps():
    with pytest.raises(ValueError):
        SpaceTimeField(SPEC1, [0.0, 0.125, 0.3], np.zeros((3,) + SPEC1.shape))


def test_fields_are_immutable():
    f = rand_field(SPEC1, np.random.default_rng(0))
    with pytest.raises(ValueError):
        f.values[0] = 1


def test_random_bandlimited_unit_norm_and_band():
    f = random_bandlimited(SPEC2, np.random.default_rng(0))
    assert lebesgue_norm(f, 0.5) == pytest.approx(1, rel=1e-12)
    outside = SPEC2.frequency_squared() > 4
    assert np.abs(dft_forward(f)[outside]).max() < 1e-12


def test_serialisation_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    spec = GridSpec(2, 64, dt=0.25, time_window=(-1.0, 1.0))
    u = SpaceTimeField(spec, -1.0 + 0.25 * np.arange(8),
                       rng.standard_normal((8, 64, 64)) + 1j * rng.standard_normal((8, 64, 64)))
    back = read_field(write_field(tmp_path / "u.bin", u))
    assert back.spec == spec
    assert np.array_equal(back.times, u.times) and np.array_equal(back.values, u.values)
    f = rand_field(SPEC1, rng)
    g = read_field(write_field(tmp_path / "f.bin", f))
    assert isinstance(g, SpatialField) and np.array_equal(g.values, f.values)
    raw = (tmp_path / "f.bin").read_bytes()
    assert len(raw) == 40 + 16 * 256
    assert int.from_bytes(raw[:8], "little") == 1
