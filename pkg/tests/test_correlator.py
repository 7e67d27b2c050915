import itertools

import numpy as np
import pytest

from ghostsim.correlator import CorrelationAccumulator, cyclic_convolve
from ghostsim.detection import IntensityFrame
from ghostsim.lattice import ContractError, LatticeSpec

SPEC = LatticeSpec(4, 2, dx=0.5, dy=1.0)


def _frames(rng, n, spec=SPEC):
    return rng.exponential(size=(n,) + spec.frame_shape)


def _acc(mode, I1, I2, spec=SPEC, x1=(1, 2)):
    acc = CorrelationAccumulator(mode, spec, x1)
    acc.accumulate(IntensityFrame(I1, spec), IntensityFrame(I2, spec))
    return acc


def test_cyclic_convolve_matches_loops():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(2, 2, 4))
    out = cyclic_convolve(a, b)
    for y, x in itertools.product(range(2), range(4)):
        ref = sum(a[v, u] * b[(y - v) % 2, (x - u) % 4] for v in range(2) for u in range(4))
        assert out[y, x] == pytest.approx(ref)


def test_fixed_pixel_brute_force():
    rng = np.random.default_rng(1)
    I1, I2 = _frames(rng, 50), _frames(rng, 50)
    G = _acc("ff_fixed_x1", I1, I2).finalize().values
    a = I1[:, 1, 2]
    expected = np.mean(a[:, None, None] * I2, axis=0) - a.mean() * I2.mean(axis=0)
    np.testing.assert_allclose(G, expected, atol=1e-12)


def test_spatial_average_brute_force():
    rng = np.random.default_rng(2)
    I1, I2 = _frames(rng, 40), _frames(rng, 40)
    G = _acc("ff_spatial_average", I1, I2).finalize().values
    expected = np.zeros(SPEC.frame_shape)
    for y, x, v, u in itertools.product(range(2), range(4), range(2), range(4)):
        a = I1[:, v, u]
        b = I2[:, (y - v) % 2, (x - u) % 4]
        expected[y, x] += (np.mean(a * b) - a.mean() * b.mean()) * SPEC.cell_area
    np.testing.assert_allclose(G, expected, atol=1e-12)


def test_bucket_brute_force():
    rng = np.random.default_rng(3)
    I1, I2 = _frames(rng, 30), _frames(rng, 30)
    G = _acc("telescope_bucket", I1, I2).finalize().values
    B = I1.sum(axis=(1, 2)) * SPEC.cell_area
    expected = np.mean(B[:, None, None] * I2, axis=0) - B.mean() * I2.mean(axis=0)
    np.testing.assert_allclose(G, expected, atol=1e-12)


def test_shared_impulse_gives_positive_peak():
    rng = np.random.default_rng(4)
    n = 2000
    I1 = np.full((n,) + SPEC.frame_shape, 1.0)
    I2 = np.full((n,) + SPEC.frame_shape, 1.0)
    s = rng.exponential(size=n)
    I1[:, 1, 2] += s
    I2[:, 0, 3] += s
    G = _acc("telescope_pixel_x1", I1, I2).finalize().values
    assert np.unravel_index(np.argmax(G), G.shape) == (0, 3)
    assert G[0, 3] == pytest.approx(np.var(s), rel=1e-10)


def test_independent_frames_correlate_to_noise():
    rng = np.random.default_rng(5)
    G = _acc("ff_fixed_x1", _frames(rng, 20000), _frames(rng, 20000)).finalize().values
    assert np.max(np.abs(G)) < 5 / np.sqrt(20000)


def test_identical_shots_give_zero():
    I = np.tile(np.arange(8.0).reshape(2, 4), (5, 1, 1))
    for mode in ("ff_fixed_x1", "ff_spatial_average", "telescope_bucket"):
        G = _acc(mode, I, I).finalize().values
        assert np.max(np.abs(G)) < 1e-12


def test_batch_and_single_agree_and_merge():
    rng = np.random.default_rng(6)
    I1, I2 = _frames(rng, 12), _frames(rng, 12)
    for mode in ("ff_fixed_x1", "ff_spatial_average", "telescope_bucket"):
        whole = _acc(mode, I1, I2).finalize().values
        single = CorrelationAccumulator(mode, SPEC, (1, 2))
        for i in range(12):
            single.accumulate(IntensityFrame(I1[i], SPEC), IntensityFrame(I2[i], SPEC))
        np.testing.assert_allclose(single.finalize().values, whole, atol=1e-13)
        merged = _acc(mode, I1[:5], I2[:5]).merge(_acc(mode, I1[5:], I2[5:]))
        assert merged.n == 12
        np.testing.assert_allclose(merged.finalize().values, whole, atol=1e-13)


def test_checkpoint_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    acc = _acc("ff_spatial_average", _frames(rng, 9), _frames(rng, 9))
    acc.save(tmp_path / "c.bin")
    back = CorrelationAccumulator.load(tmp_path / "c.bin")
    assert back.n == 9 and back.mode == acc.mode and back.spec == acc.spec
    assert np.array_equal(back.finalize().values, acc.finalize().values)
    (tmp_path / "bad.bin").write_bytes(b"NOPE" + bytes(200))
    with pytest.raises(ValueError):
        CorrelationAccumulator.load(tmp_path / "bad.bin")


def test_rescaled_is_scale_invariant():
    rng = np.random.default_rng(8)
    I1, I2 = _frames(rng, 30), _frames(rng, 30)
    a = _acc("ff_fixed_x1", I1, I2).finalize().rescaled
    b = _acc("ff_fixed_x1", 3 * I1, 7 * I2).finalize().rescaled
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_contracts():
    rng = np.random.default_rng(9)
    with pytest.raises(ValueError):
        _acc("ff_fixed_x1", _frames(rng, 1), _frames(rng, 1)).finalize()
    with pytest.raises(ValueError):
        CorrelationAccumulator("diagonal", SPEC)
    other = LatticeSpec(4, 2)
    acc = CorrelationAccumulator("ff_fixed_x1", SPEC)
    with pytest.raises(ContractError):
        acc.accumulate(IntensityFrame(np.ones((2, 4)), other), IntensityFrame(np.ones((2, 4)), other))
    with pytest.raises(ContractError):
        acc.merge(CorrelationAccumulator("ff_fixed_x1", SPEC, (0, 1)))
