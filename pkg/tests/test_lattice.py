import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ghostsim.lattice import (
    ComplexField,
    ContractError,
    LatticeSpec,
    forward_transform,
    inverse_transform,
    negate_index,
    sample_vacuum,
    shot_rng,
)

pow2 = st.sampled_from([1, 2, 4, 8, 16])


def test_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        LatticeSpec(12)
    with pytest.raises(ValueError):
        LatticeSpec(8, dx=0)


def test_coordinates_are_fft_ordered():
    spec = LatticeSpec(8, 4, 2, dx=0.5, dy=1.0, dt=2.0)
    assert spec.shape == (2, 4, 8)
    np.testing.assert_allclose(spec.x(), [0, 0.5, 1, 1.5, -2, -1.5, -1, -0.5])
    assert spec.qx()[1] == pytest.approx(spec.dq_x)
    assert spec.omega_nyquist == pytest.approx(np.pi / 2.0)
    assert spec.cell_area == 0.5


def test_one_dimensional_cell_area_is_dx():
    assert LatticeSpec(8, dx=3.0, dy=7.0).cell_area == 3.0


def test_constant_field_transforms_to_dc_delta():
    spec = LatticeSpec(8, 4, 2)
    f = ComplexField(np.full(spec.shape, 2.0 + 0j), spec)
    F = forward_transform(f).values
    assert F[0, 0, 0] == pytest.approx(2.0 * np.sqrt(spec.size))
    F[0, 0, 0] = 0
    assert np.max(np.abs(F)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(nx=pow2, ny=pow2, nt=pow2, seed=st.integers(0, 2**32 - 1))
def test_round_trip(nx, ny, nt, seed):
    spec = LatticeSpec(nx, ny, nt)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=spec.shape) + 1j * rng.normal(size=spec.shape)
    back = inverse_transform(forward_transform(ComplexField(v, spec))).values
    assert np.max(np.abs(back - v)) < 1e-12


def test_transform_is_unitary():
    spec = LatticeSpec(16, 8, 4)
    v = sample_vacuum(spec, shot_rng(3, 0))
    assert forward_transform(v).power() == pytest.approx(v.power(), rel=1e-12)


def test_domain_contract():
    spec = LatticeSpec(4)
    f = ComplexField(np.zeros(spec.shape, complex), spec, "momentum")
    with pytest.raises(ContractError):
        forward_transform(f)
    with pytest.raises(ContractError):
        inverse_transform(ComplexField(f.values, spec, "position"))
    with pytest.raises(ContractError):
        ComplexField(np.zeros((3, 4)), spec)


def test_negate_index_matches_modular_negation():
    a = np.arange(2 * 4 * 8).reshape(2, 4, 8)
    b = negate_index(a)
    for t in range(2):
        for y in range(4):
            for x in range(8):
                assert b[t, y, x] == a[-t % 2, -y % 4, -x % 8]


def test_vacuum_moments():
    spec = LatticeSpec(64, 8, 8)
    a = sample_vacuum(spec, shot_rng(0, 0)).values
    assert np.mean(np.abs(a) ** 2) == pytest.approx(0.5, rel=0.03)
    assert abs(np.mean(a * a)) < 0.02
    assert abs(np.mean(a)) < 0.02


def test_shot_streams_are_reproducible_and_distinct():
    spec = LatticeSpec(16)
    a = sample_vacuum(spec, shot_rng(7, 3)).values
    b = sample_vacuum(spec, shot_rng(7, 3)).values
    c = sample_vacuum(spec, shot_rng(7, 4)).values
    d = sample_vacuum(spec, shot_rng(7, 3, stream=1)).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)
