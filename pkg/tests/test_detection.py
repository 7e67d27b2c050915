import numpy as np
import pytest

from ghostsim.detection import IntensityFrame, bucket, detect, vacuum_correction
from ghostsim.lattice import ComplexField, ContractError, LatticeSpec


def test_detect_averages_over_time():
    spec = LatticeSpec(4, 1, 2)
    v = np.zeros(spec.shape, complex)
    v[0, 0, 1] = 2.0
    v[1, 0, 1] = 1j
    I = detect(ComplexField(v, spec)).I
    np.testing.assert_allclose(I, [[0, 2.5, 0, 0]])


def test_detect_keeps_batch_axes():
    spec = LatticeSpec(4, 2, 2)
    v = np.ones((3,) + spec.shape, complex)
    frame = detect(ComplexField(v, spec))
    assert frame.batch_shape == (3,)
    assert frame.I.shape == (3, 2, 4)


def test_detect_requires_position_space():
    spec = LatticeSpec(4)
    with pytest.raises(ContractError):
        detect(ComplexField(np.zeros(spec.shape, complex), spec, "momentum"))


def test_frame_contracts():
    spec = LatticeSpec(4, 2)
    with pytest.raises(ContractError):
        IntensityFrame(np.zeros((2, 2)), spec)
    with pytest.raises(ContractError):
        IntensityFrame(-np.ones((2, 4)), spec)


def test_bucket_uses_cell_area():
    spec = LatticeSpec(4, 2, dx=0.5, dy=2.0)
    frame = IntensityFrame(np.ones((2, 4)), spec)
    assert bucket(frame) == pytest.approx(8.0)
    batch = IntensityFrame(np.ones((3, 2, 4)), spec)
    np.testing.assert_allclose(bucket(batch), [8.0] * 3)


def test_vacuum_correction_once_only():
    spec = LatticeSpec(4)
    frame = IntensityFrame(np.array([[0.2, 0.5, 1.0, 2.0]]), spec)
    out = vacuum_correction(frame)
    np.testing.assert_allclose(out.I, [[0, 0, 0.5, 1.5]])
    assert out.clamped_mass == pytest.approx(0.3)
    with pytest.raises(ContractError):
        vacuum_correction(out)
