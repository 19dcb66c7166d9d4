import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strichartz_lab.atoms import (
    COEFFICIENT_CONSTANT,
    SUP_CONSTANT,
    SUPPORT_CONSTANT,
    decompose,
    rearrangement,
)
from strichartz_lab.experiments import random_atom_field
from strichartz_lab.grid import GridSpec, SpatialField, lebesgue_norm

SPEC = GridSpec(2, 64)
# cell volume 1/2, so grid-aligned sets can have measure exactly 2^m
LINE = GridSpec(1, 64, extent=32.0)


def test_constant_field_single_plateau():
    re = rearrangement(SpatialField(SPEC, np.full(SPEC.shape, 1.5)))
    assert re.plateaus() == [(1.5, pytest.approx(SPEC.volume))]
    assert re.measure[-1] == pytest.approx(SPEC.volume)


def test_two_level_field():
    vals = np.ones(SPEC.shape)
    vals[:32] = 2
    plateaus = rearrangement(SpatialField(SPEC, vals)).plateaus()
    assert [p[0] for p in plateaus] == [2.0, 1.0]
    assert [p[1] for p in plateaus] == [pytest.approx(SPEC.volume / 2)] * 2


@pytest.mark.parametrize("p", [1, 1.5, 2, 4])
def test_rearrangement_preserves_norms(p):
    f = random_atom_field(SPEC, np.random.default_rng(0))
    assert rearrangement(f).norm(p) == pytest.approx(lebesgue_norm(f, 1 / p), rel=1e-12)


def test_zero_field_is_empty():
    dec = decompose(SpatialField(SPEC, np.zeros(SPEC.shape)), 2)
    assert dec.entries == []
    assert dec.audit(SpatialField(SPEC, np.zeros(SPEC.shape))) == {"C_a": 0.0, "C_s": 0.0, "C_c": 0.0}


@pytest.mark.parametrize("p", [1, 2, 4])
def test_indicator_of_dyadic_set(p):
    m = 3
    vals = np.zeros(LINE.shape)
    vals[10:10 + int(2 ** m / LINE.cell_volume)] = 1
    f = SpatialField(LINE, vals)
    dec = decompose(f, p)
    # frozen: rank measures 1/2, 1, ..., 8 fill the bands -2 .. m-1 and the
    # top band m-1 carries half the set
    assert [e.k for e in dec.entries] == [-2, -1, 0, 1, 2]
    assert dec.entries[-1].support_measure == 2 ** (m - 1)
    assert np.allclose(dec.coefficients(), [2.0 ** (k / p) for k in range(-2, 3)])
    total = float(np.sum(dec.coefficients() ** p))
    assert total == pytest.approx(7.75)
    assert total <= 4 ** p * lebesgue_norm(f, 1 / p) ** p


def check_invariants(f, p):
    dec = decompose(f, p)
    top = np.abs(f.values).max()
    assert np.abs(dec.reconstruct(f).values - f.values).max() <= 1e-12 * top
    for e in dec.entries:
        assert np.abs(e.atom.values).max() <= SUP_CONSTANT * 2.0 ** (-e.k / p) * (1 + 1e-12)
        support = np.count_nonzero(e.atom.values) * f.spec.cell_volume
        assert support == pytest.approx(e.support_measure)
        assert support <= SUPPORT_CONSTANT * 2.0 ** e.k
    assert dec.coefficient_norm() <= COEFFICIENT_CONSTANT * lebesgue_norm(f, 1 / p)
    return dec


@settings(max_examples=40)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([1, 1.5, 2, 4]))
def test_invariants_on_random_fields(seed, p):
    check_invariants(random_atom_field(SPEC, np.random.default_rng(seed)), p)


@settings(max_examples=20)
@given(st.integers(0, 2 ** 32 - 1), st.floats(1e-3, 1e3))
def test_scaling_covariance(seed, lam):
    f = random_atom_field(SPEC, np.random.default_rng(seed))
    a, b = decompose(f, 2), decompose(f * lam, 2)
    assert [e.k for e in a.entries] == [e.k for e in b.entries]
    assert np.allclose(b.coefficients(), lam * a.coefficients(), rtol=1e-12)
    for ea, eb in zip(a.entries, b.entries):
        assert np.allclose(ea.atom.values, eb.atom.values, rtol=1e-12, atol=0)


def test_ties_broken_by_grid_index():
    re = rearrangement(SpatialField(SPEC, np.ones(SPEC.shape)))
    assert np.array_equal(re.order, np.arange(SPEC.points_per_axis ** 2))


def test_decompose_rejects_bad_p():
    f = random_atom_field(SPEC, np.random.default_rng(0))
    with pytest.raises(ValueError):
        decompose(f, 0.5)
    with pytest.raises(ValueError):
        decompose(f, float("inf"))


def test_csv_rows():
    f = random_atom_field(SPEC, np.random.default_rng(5))
    dec = decompose(f, 2)
    lines = dec.to_csv().splitlines()
    assert lines[0] == "k,c_k,sup,support_measure"
    assert len(lines) == len(dec.entries) + 1
