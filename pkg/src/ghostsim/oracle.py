"""Semi-analytic correlation references.

Every oracle returns the exact ensemble expectation of the matching Monte
Carlo estimator on the same periodic lattice, in the same absolute units,
so a Monte Carlo map can be compared without a fitted scale. (Comparisons
in :mod:`ghostsim.metrics` still max-rescale.) The derivation uses
Gaussian moment factorization: for the two arms the fluctuation
correlation is ``|<c1 c2>|^2``, and the symmetric-ordering noise adds no
cross-arm bias because the arms' operators commute.

Normalization recap (``N`` transverse sites, ``Nt`` time bins)::

    f-f:        G(k1, k2) = |T~(k1 + k2)|^2 sum_W |gamma(-k2, W)|^2 / (N Nt^2)
    telescope:  G(k1, x2) = sum_W |A(x2, W)|^2 / Nt^2
                A(x2, W)  = N^-1/2 sum_x' exp(-i q_k1 x') T(x') Gam(x' - x2, W)
                Gam(xi, W) = N^-1 sum_q exp(i q xi) gamma(q, W) H(-q)

``H`` is the reference-arm spatial transfer function (Fresnel refocus and
focal-plane mask). Sums over W run over the interference-filter band.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeSpec, negate_index
from .optics import ObjectMask, band_mask
from .source import GainTable


def _band_power(gain: GainTable, halfwidth: float | None) -> np.ndarray:
    """``sum_W |gamma(q, W)|^2`` over the band, shape (Ny, Nx)."""
    keep = band_mask(gain.spec, halfwidth)
    return np.sum(np.abs(gain.gamma[keep]) ** 2, axis=0)


def _halfwidth_from_profile(profile: np.ndarray, step: float, outermost: bool) -> float:
    """Half width at half maximum of a sampled one-sided profile.

    ``profile[0]`` is the origin. ``outermost`` picks the last crossing of
    half maximum instead of the first one, which is the natural choice for
    broad plateaus with ripples. Linear interpolation between samples.
    """
    p = np.asarray(profile, dtype=float)
    half = 0.5 * p.max()
    above = np.nonzero(p >= half)[0]
    if outermost:
        i = above[-1]
    else:
        below = np.nonzero(p < half)[0]
        i = (below[0] - 1) if below.size else len(p) - 1
    if i >= len(p) - 1:
        return i * step
    frac = (p[i] - half) / (p[i] - p[i + 1])
    return (i + frac) * step


@dataclass(frozen=True)
class NearFieldCorrelation:
    """``Gam(xi, W)``: position-space lag ``xi`` times temporal frequency ``W``.

    ``values`` has shape ``(Nt, Ny, Nx)`` in FFT order on every axis.
    """

    values: np.ndarray
    spec: LatticeSpec

    @property
    def x_coh(self) -> float:
        """HWHM of ``|Gam(xi, 0)|`` along x."""
        row = np.abs(self.values[0, 0, : self.spec.Nx // 2 + 1])
        return _halfwidth_from_profile(row, self.spec.dx, outermost=False)


def near_field_correlation(gain: GainTable, transfer: np.ndarray | None = None) -> NearFieldCorrelation:
    """Inverse spatial transform of ``gamma(q, W) H(-q)``.

    ``transfer`` is the reference-arm transfer function ``H(q)`` on the
    transverse frame (identity when omitted).
    """
    g = gain.gamma
    if transfer is not None:
        g = g * negate_index(transfer, axes=(-2, -1))
    return NearFieldCorrelation(np.fft.ifft2(g, axes=(-2, -1)), gain.spec)


def oracle_ff(
    x1: tuple[int, int], obj: ObjectMask, gain: GainTable, halfwidth: float | None = None
) -> np.ndarray:
    """Expected fixed-pixel f-f correlation over the reference detector.

    ``x1`` is the fixed test pixel ``(iy, ix)`` in FFT order.
    """
    spec = gain.spec
    Tk = obj.spectrum()
    shifted = np.roll(Tk, (-x1[0], -x1[1]), axis=(0, 1))  # T~(k1 + k2) over k2
    P = negate_index(_band_power(gain, halfwidth), axes=(0, 1))  # P(-k2)
    return np.abs(shifted) ** 2 * P / (spec.n_sites * spec.Nt**2)


def oracle_ff_sa(
    obj: ObjectMask, gain: GainTable, halfwidth: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Spatially averaged f-f correlation: exact sum and constant-gain form.

    Returns
    -------
    exact : ndarray
        ``dA sum_k1 G(k1, k - k1)``. On the periodic lattice every shifted
        copy of the gain is summed in full, so this is ``|T~(k)|^2`` times
        the total band gain power.
    approx : ndarray
        ``const |T~(k)|^2`` with the constant taken from the gain peak
        times the number of modes, i.e. a flat-gain estimate.
    """
    spec = gain.spec
    T2 = np.abs(obj.spectrum()) ** 2
    P = _band_power(gain, halfwidth)
    norm = spec.cell_area / (spec.n_sites * spec.Nt**2)
    # sum_k1 P(k1 - k) does not depend on k
    exact = T2 * P.sum() * norm
    approx = T2 * P.max() * np.count_nonzero(P >= 0.5 * P.max()) * norm
    return exact, approx


def _pixel_amplitude(x1, obj: ObjectMask, nf: NearFieldCorrelation, keep) -> np.ndarray:
    """``A(x2, W)`` for the band, shape (n_band, Ny, Nx)."""
    spec = nf.spec
    Y, X = spec.position_grid()
    q1y, q1x = spec.qy()[x1[0]], spec.qx()[x1[1]]
    f = obj.T * np.exp(-1j * (q1x * X + q1y * Y))
    gam_rev = negate_index(nf.values[keep], axes=(-2, -1))  # Gam(-xi)
    A = np.fft.ifft2(np.fft.fft2(f) * np.fft.fft2(gam_rev, axes=(-2, -1)), axes=(-2, -1))
    return A / np.sqrt(spec.n_sites)


def oracle_telescope_pixel(
    x1: tuple[int, int],
    obj: ObjectMask,
    nf: NearFieldCorrelation,
    halfwidth: float | None = None,
) -> np.ndarray:
    """Expected telescope correlation for a pixel test detector at ``x1``."""
    keep = band_mask(nf.spec, halfwidth)
    A = _pixel_amplitude(x1, obj, nf, keep)
    return np.sum(np.abs(A) ** 2, axis=0) / nf.spec.Nt**2


def telescope_pixel_approx(
    x1: tuple[int, int],
    obj: ObjectMask,
    gain: GainTable,
    transfer: np.ndarray | None = None,
    halfwidth: float | None = None,
) -> np.ndarray:
    """Local approximation ``|T(x2)|^2 sum_W |gamma(q1, W) H(-q1)|^2 / (N Nt^2)``.

    Valid when the object's smallest features exceed the coherence length.
    """
    spec = gain.spec
    keep = band_mask(spec, halfwidth)
    g = gain.gamma[keep][:, x1[0], x1[1]]
    h = 1.0 if transfer is None else negate_index(transfer, axes=(0, 1))[x1[0], x1[1]]
    weight = np.sum(np.abs(g * h) ** 2)
    return np.abs(obj.T) ** 2 * weight / (spec.n_sites * spec.Nt**2)


@dataclass(frozen=True)
class BucketKernel:
    """``Gam_B(xi) = sum_W |Gam(xi, W)|^2 dW / 2pi`` over the band."""

    values: np.ndarray  # (Ny, Nx), FFT order
    spec: LatticeSpec

    @property
    def fwhm(self) -> float:
        row = self.values[0, : self.spec.Nx // 2 + 1]
        return 2 * _halfwidth_from_profile(row, self.spec.dx, outermost=False)


def gamma_bucket_kernel(nf: NearFieldCorrelation, halfwidth: float | None = None) -> BucketKernel:
    spec = nf.spec
    keep = band_mask(spec, halfwidth)
    k = np.sum(np.abs(nf.values[keep]) ** 2, axis=0) * spec.d_omega / (2 * np.pi)
    return BucketKernel(k, spec)


def oracle_telescope_bucket(
    obj: ObjectMask, nf: NearFieldCorrelation, halfwidth: float | None = None
) -> np.ndarray:
    """Expected bucket-test telescope correlation.

    ``dA sum_x1 Gam_B(x1 - x2) |T(x1)|^2``, rescaled from the ``dW/2pi``
    measure of the kernel to the estimator's ``1/Nt^2`` measure.
    """
    spec = nf.spec
    kb = gamma_bucket_kernel(nf, halfwidth).values
    T2 = np.abs(obj.T) ** 2
    # sum_x1 T2(x1) K(x1 - x2) = (T2 conv K(-.))(x2)
    corr = np.real(np.fft.ifft2(np.fft.fft2(T2) * np.fft.fft2(negate_index(kb, (0, 1)))))
    measure = 2 * np.pi / (spec.d_omega * spec.Nt**2)
    return spec.cell_area * measure * corr


def ift_reconstruct(G: np.ndarray) -> np.ndarray:
    """Real part of the unitary inverse transform of a diffraction map."""
    return np.real(np.fft.ifft2(np.atleast_2d(G), norm="ortho"))


def bandwidth_pdc(gain: GainTable, halfwidth: float | None = None) -> float:
    """HWHM in ``|q|`` (along q_x) of the band-integrated ``|gamma|^2``."""
    spec = gain.spec
    row = _band_power(gain, halfwidth)[0, : spec.Nx // 2 + 1]
    return _halfwidth_from_profile(row, spec.dq_x, outermost=True)
