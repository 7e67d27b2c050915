import math

import numpy as np
import pytest

from ghostsim import oracle
from ghostsim.correlator import CorrelationAccumulator
from ghostsim.detection import detect
from ghostsim.lattice import LatticeSpec
from ghostsim.metrics import epsilon
from ghostsim.optics import (
    ObjectMask,
    apply_interference_filter,
    compensating_delta_z,
    make_object,
    propagate_reference_ff,
    propagate_reference_telescope,
    propagate_test_ff,
    reference_transfer,
)
from ghostsim.source import GainTable, ShotGenerator, SourceParams, compute_gain

P = SourceParams()


def _flat_gain(spec, value=1.0, qx_halfwidth=None):
    g = np.full(spec.shape, value, complex)
    if qx_halfwidth is not None:
        g = g * (np.abs(spec.qx()) <= qx_halfwidth)
    return GainTable(g, g, g, spec, P)


def _random_object(spec, seed=0):
    rng = np.random.default_rng(seed)
    return ObjectMask(rng.uniform(0, 1, spec.frame_shape) * np.exp(2j * np.pi * rng.uniform(size=spec.frame_shape)))


def test_flat_gamma_near_field_is_delta():
    spec = LatticeSpec(16, 4, 2)
    nf = oracle.near_field_correlation(_flat_gain(spec, 2.0))
    expected = np.zeros(spec.shape, complex)
    expected[:, 0, 0] = 2.0
    np.testing.assert_allclose(nf.values, expected, atol=1e-14)


def test_flat_gamma_telescope_pixel_images_object():
    spec = LatticeSpec(16, 4, 2)
    gain = _flat_gain(spec, 1.5)
    obj = _random_object(spec)
    nf = oracle.near_field_correlation(gain)
    G = oracle.oracle_telescope_pixel((1, 3), obj, nf)
    np.testing.assert_allclose(G, oracle.telescope_pixel_approx((1, 3), obj, gain), rtol=1e-12)
    np.testing.assert_allclose(G, np.abs(obj.T) ** 2 * 2.25 * 2 / (64 * 4), rtol=1e-12)


def test_flat_gamma_bucket_images_object():
    spec = LatticeSpec(16, 4, 2, dx=0.5, dy=0.25, dt=1.0)
    obj = _random_object(spec, 1)
    G = oracle.oracle_telescope_bucket(obj, oracle.near_field_correlation(_flat_gain(spec)))
    np.testing.assert_allclose(G, spec.cell_area * np.abs(obj.T) ** 2 * 2 / 4, rtol=1e-12, atol=1e-15)


def test_ff_two_slit_closed_form():
    spec = LatticeSpec(64)
    T = np.zeros((1, 64))
    T[0, 5] = T[0, -5] = 1.0
    G = oracle.oracle_ff((0, 3), ObjectMask(T), _flat_gain(spec))
    k = np.fft.fftfreq(64, 1 / 64)
    expected = (2 / 64) * (1 + np.cos(2 * np.pi * 10 * (k + 3) / 64)) / 64
    np.testing.assert_allclose(G[0], expected, atol=1e-15)


def test_ff_unit_object_selects_one_mode():
    spec = LatticeSpec(16, 1, 2)
    gain = compute_gain(P, spec)
    G = oracle.oracle_ff((0, 3), ObjectMask(np.ones((1, 16))), gain)
    assert np.count_nonzero(G > 1e-15 * G.max()) == 1
    assert np.argmax(G[0]) == 13  # k2 = -k1


def test_sa_exact_is_proportional_to_object_spectrum():
    spec = LatticeSpec(64, 1, 4, dx=4e-6, dt=0.4e-12)
    gain = compute_gain(P, spec)
    obj = make_object("double_slit", {"width_px": 2, "spacing_px": 12}, spec)
    exact, approx = oracle.oracle_ff_sa(obj, gain)
    T2 = np.abs(obj.spectrum()) ** 2
    ratio = exact[T2 > 1e-12] / T2[T2 > 1e-12]
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-12)
    assert epsilon(approx, exact) < 1e-12
    # the exact form equals dA times the sum of fixed-pixel maps along the diagonal
    total = np.zeros_like(exact)
    for j in range(64):
        G = oracle.oracle_ff((0, j), obj, gain)
        total += np.roll(G, j, axis=1)
    np.testing.assert_allclose(exact, total * spec.cell_area, rtol=1e-10)


def test_cosine_sa_peaks_at_roll_frequencies():
    spec = LatticeSpec(32, 32, dx=8 * math.pi * P.x_coh / 32, dy=8 * math.pi * P.x_coh / 32)
    q0 = 4 * spec.dq_x
    obj = make_object("cosine2d", {"q0": q0}, spec)
    exact, _ = oracle.oracle_ff_sa(obj, compute_gain(P, spec))
    for site in [(0, 4), (0, -4), (12, 0), (-12, 0)]:
        assert exact[site] > 0.01 * exact[0, 0]
    assert exact[4, 0] < 1e-12 * exact[0, 0]


def test_smooth_object_local_approximation():
    spec = LatticeSpec(256, 1, 1, dx=2.9e-6)
    gain = compute_gain(P, spec)
    x = spec.x()
    obj = ObjectMask(np.exp(-(x[None, :] ** 2) / (150e-6) ** 2))
    H = reference_transfer(spec, compensating_delta_z(P), P.k_free)
    nf = oracle.near_field_correlation(gain, H)
    G = oracle.oracle_telescope_pixel((0, 0), obj, nf)
    approx = oracle.telescope_pixel_approx((0, 0), obj, gain, H)
    assert np.max(np.abs(G - approx)) < 0.05 * approx.max()


def test_phase_object_bucket_is_constant():
    spec = LatticeSpec(32, 32, 1)
    obj = make_object("phase_checker_gaussian", {"holes": 2, "hole_px": 4, "pitch_px": 8}, spec)
    nf = oracle.near_field_correlation(compute_gain(P, spec))
    G = oracle.oracle_telescope_bucket(obj, nf)
    np.testing.assert_allclose(G, G[0, 0], rtol=1e-10)


def test_bucket_kernel_sums_frequency_bins():
    spec = LatticeSpec(32, 1, 2, dx=4e-6, dt=0.5e-12)
    nf = oracle.near_field_correlation(compute_gain(P, spec))
    both = oracle.gamma_bucket_kernel(nf).values
    dc = oracle.gamma_bucket_kernel(nf, 0.0).values
    other = np.abs(nf.values[1]) ** 2 * spec.d_omega / (2 * np.pi)
    np.testing.assert_allclose(both, dc + other, rtol=1e-12)


def test_compensated_coherence_length():
    spec = LatticeSpec(256, 1, 1, dx=2.9e-6)
    H = reference_transfer(spec, compensating_delta_z(P), P.k_free)
    nf = oracle.near_field_correlation(compute_gain(P, spec), H)
    assert nf.x_coh == pytest.approx(1 / P.q0, rel=0.2)
    bare = oracle.near_field_correlation(compute_gain(P, spec))
    assert bare.x_coh > 1.5 * nf.x_coh


def test_ift_reconstruct():
    G = np.zeros((4, 8))
    G[0, 0] = 1.0
    np.testing.assert_allclose(oracle.ift_reconstruct(G), np.full((4, 8), 1 / math.sqrt(32)))
    G[0, 1] = G[0, -1] = 0.5
    x = np.arange(8)
    row = oracle.ift_reconstruct(G)[0]
    np.testing.assert_allclose(row, (1 + np.cos(2 * np.pi * x / 8)) / math.sqrt(32), atol=1e-15)


def test_bandwidth_of_rect_gain():
    spec = LatticeSpec(64, 1, 1, dx=1.0)
    bw = oracle.bandwidth_pdc(_flat_gain(spec, qx_halfwidth=3.5 * spec.dq_x))
    assert bw == pytest.approx(3.5 * spec.dq_x)


def test_bandwidth_shrinks_with_filter():
    spec = LatticeSpec(256, 1, 16, dx=2.9e-6, dt=0.375e-12)
    gain = compute_gain(P, spec)
    full = oracle.bandwidth_pdc(gain)
    dc = oracle.bandwidth_pdc(gain, 0.0)
    assert full > 3 * dc
    assert dc == pytest.approx(1.57 * P.q0, rel=0.1)


# --- Monte Carlo agreement on a tiny lattice --------------------------------

TINY = LatticeSpec(8, 1, 2, dx=10e-6, dt=0.4e-12)
SHOTS = 40000


@pytest.fixture(scope="module")
def tiny_run():
    gen = ShotGenerator(P, TINY, seed=21)
    obj = _random_object(TINY, 3)
    H = reference_transfer(TINY, 1e-3, P.k_free)
    accs = {
        "ff_fixed_x1": CorrelationAccumulator("ff_fixed_x1", TINY, (0, 2)),
        "ff_spatial_average": CorrelationAccumulator("ff_spatial_average", TINY),
        "telescope_pixel_x1": CorrelationAccumulator("telescope_pixel_x1", TINY, (0, 2)),
        "telescope_bucket": CorrelationAccumulator("telescope_bucket", TINY),
    }
    for lo in range(0, SHOTS, 5000):
        pair = gen.generate(range(lo, lo + 5000))
        b1 = apply_interference_filter(pair.b1, 0.0)
        b2 = apply_interference_filter(pair.b2, 0.0)
        I1 = detect(propagate_test_ff(b1, obj))
        ff = detect(propagate_reference_ff(b2))
        tel = detect(propagate_reference_telescope(b2, 1e-3, P.k_free))
        accs["ff_fixed_x1"].accumulate(I1, ff)
        accs["ff_spatial_average"].accumulate(I1, ff)
        accs["telescope_pixel_x1"].accumulate(I1, tel)
        accs["telescope_bucket"].accumulate(I1, tel)
    gain = compute_gain(P, TINY)
    nf = oracle.near_field_correlation(gain, H)
    refs = {
        "ff_fixed_x1": oracle.oracle_ff((0, 2), obj, gain, 0.0),
        "ff_spatial_average": oracle.oracle_ff_sa(obj, gain, 0.0)[0],
        "telescope_pixel_x1": oracle.oracle_telescope_pixel((0, 2), obj, nf, 0.0),
        "telescope_bucket": oracle.oracle_telescope_bucket(obj, nf, 0.0),
    }
    return {k: (accs[k].finalize().values, refs[k]) for k in accs}


@pytest.mark.parametrize("mode", ["ff_fixed_x1", "ff_spatial_average", "telescope_pixel_x1", "telescope_bucket"])
def test_oracle_matches_monte_carlo_absolutely(tiny_run, mode):
    G, ref = tiny_run[mode]
    assert np.linalg.norm(G - ref) < 0.05 * np.linalg.norm(ref)
