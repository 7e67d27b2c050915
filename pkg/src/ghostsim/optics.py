"""Object masks, arm propagators and the two filter types.

Both arms reuse the source lattice. After an f-f lens the detector
coordinate of FFT index ``j`` is ``x = q_j f / k_free``; that scale is
metadata (see :func:`ff_detector_coordinates`), nothing is resampled.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Literal

import numpy as np

from .io import read_pgm
from .lattice import SPACE_AXES, TIME_AXIS, ComplexField, ContractError, LatticeSpec
from .source import SourceParams


class ConfigurationError(ValueError):
    """An object or arm cannot be built on the requested lattice."""


@dataclass(frozen=True)
class ObjectMask:
    """Complex transmission ``T`` on the transverse frame, shape ``(Ny, Nx)``."""

    T: np.ndarray
    preset: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        T = np.asarray(self.T, dtype=complex)
        if T.ndim != 2:
            raise ConfigurationError("object transmission must be a (Ny, Nx) array")
        if np.max(np.abs(T)) > 1 + 1e-12:
            raise ConfigurationError("object transmission exceeds unity")
        object.__setattr__(self, "T", T)

    def spectrum(self) -> np.ndarray:
        """Unitary spatial transform of T (FFT order)."""
        return np.fft.fft2(self.T, norm="ortho")


def _centred_index(n: int) -> np.ndarray:
    """Signed site index in FFT order: 0, 1, ..., n/2-1, -n/2, ..., -1."""
    return (np.fft.fftfreq(n) * n).astype(int)


def _double_slit(spec: LatticeSpec, width_px=5, spacing_px=30, length_px=None):
    width_px, spacing_px = int(width_px), int(spacing_px)
    if width_px < 1 or spacing_px < width_px:
        raise ConfigurationError("double slit needs width >= 1 and spacing >= width")
    if spacing_px + width_px > spec.Nx:
        raise ConfigurationError("double slit wider than the lattice")
    ix = _centred_index(spec.Nx)
    left = -(spacing_px // 2)
    row = np.zeros(spec.Nx)
    for c in (left, left + spacing_px):
        lo = c - (width_px - 1) // 2
        row[(ix >= lo) & (ix < lo + width_px)] = 1.0
    T = np.tile(row, (spec.Ny, 1))
    if length_px is not None and spec.Ny > 1:
        length_px = int(length_px)
        if length_px > spec.Ny:
            raise ConfigurationError("slit length exceeds the lattice")
        iy = _centred_index(spec.Ny)
        lo = -(length_px // 2)
        T[~((iy >= lo) & (iy < lo + length_px))] = 0.0
    return T


def _cosine_rolls(spec: LatticeSpec, q0, mx, my):
    Y, X = spec.position_grid()
    return 0.25 * (1 + np.cos(mx * q0 * X)) * (1 + np.cos(my * q0 * Y))


def _phase_checker(spec: LatticeSpec, holes=4, hole_px=8, pitch_px=16, envelope_w=None):
    holes, hole_px, pitch_px = int(holes), int(hole_px), int(pitch_px)
    extent = (holes - 1) * pitch_px + hole_px
    if extent > spec.Nx or (spec.Ny > 1 and extent > spec.Ny):
        raise ConfigurationError("phase checker larger than the lattice")

    def axis_mask(n):
        if n == 1:
            return np.ones(1, bool)
        idx = _centred_index(n)
        start = -(extent // 2)
        rel = idx - start
        inside = (rel >= 0) & (rel < extent)
        return inside & (np.mod(rel, pitch_px) < hole_px)

    sel = axis_mask(spec.Ny)[:, None] & axis_mask(spec.Nx)[None, :]
    T = np.where(sel, -1.0, 1.0)
    if envelope_w is not None:
        Y, X = spec.position_grid()
        T = T * np.exp(-(X**2 + Y**2) / float(envelope_w) ** 2)
    return T


def _bitmap(spec: LatticeSpec, path=None, threshold=128, invert=False):
    if path is None:
        img = read_pgm(resources.files("ghostsim") / "data" / "infm.pgm")
    else:
        img = read_pgm(path)
    bw = (img >= threshold) ^ bool(invert)
    h, w = bw.shape
    if h > spec.Ny or w > spec.Nx:
        raise ConfigurationError(f"bitmap {w}x{h} exceeds lattice {spec.Nx}x{spec.Ny}")
    centred = np.zeros(spec.frame_shape)
    y0, x0 = (spec.Ny - h) // 2, (spec.Nx - w) // 2
    centred[y0 : y0 + h, x0 : x0 + w] = bw
    return np.fft.ifftshift(centred)


OBJECT_PRESETS = (
    "double_slit",
    "cosine2d",
    "phase_checker_gaussian",
    "bitmap_letters",
    "square_cosine",
)


def make_object(preset: str, params: dict | None, spec: LatticeSpec) -> ObjectMask:
    """Build a named object on ``spec``.

    Parameters
    ----------
    preset : str
        One of :data:`OBJECT_PRESETS`.
    params : dict
        Preset keywords. ``cosine2d`` and ``square_cosine`` need ``q0`` (1/m)
        and accept ``mx``/``my`` harmonic multipliers (defaults 1, 3 and
        1.5, 1.5). ``double_slit`` takes ``width_px``, ``spacing_px`` and an
        optional ``length_px``. ``phase_checker_gaussian`` takes ``holes``,
        ``hole_px``, ``pitch_px`` and ``envelope_w`` (m, None = no envelope).
        ``bitmap_letters`` takes ``path``, ``threshold`` and ``invert``.
    """
    params = dict(params or {})
    if preset == "double_slit":
        T = _double_slit(spec, **params)
    elif preset in ("cosine2d", "square_cosine"):
        m = (1.0, 3.0) if preset == "cosine2d" else (1.5, 1.5)
        if "q0" not in params:
            raise ConfigurationError(f"{preset} needs q0")
        T = _cosine_rolls(spec, params["q0"], params.get("mx", m[0]), params.get("my", m[1]))
    elif preset == "phase_checker_gaussian":
        T = _phase_checker(spec, **params)
    elif preset == "bitmap_letters":
        T = _bitmap(spec, **params)
    else:
        raise ConfigurationError(f"unknown object preset {preset!r}")
    return ObjectMask(T, preset, params)


# --- arm propagation --------------------------------------------------------


def _check_position(f: ComplexField):
    if f.domain != "position":
        raise ContractError("arm propagators expect position-space fields")


def _spatial_fft(values):
    return np.fft.fftn(values, axes=SPACE_AXES, norm="ortho")


def _spatial_ifft(values):
    return np.fft.ifftn(values, axes=SPACE_AXES, norm="ortho")


def propagate_test_ff(b1: ComplexField, obj: ObjectMask) -> ComplexField:
    """Object multiply then lens Fourier transform (f-f test arm).

    The focal length only rescales the output coordinate, see
    :func:`ff_detector_coordinates`.
    """
    _check_position(b1)
    if obj.T.shape != b1.spec.frame_shape:
        raise ContractError("object and field lattices differ")
    return b1.replace(_spatial_fft(b1.values * obj.T))


def propagate_reference_ff(b2: ComplexField) -> ComplexField:
    _check_position(b2)
    return b2.replace(_spatial_fft(b2.values))


def ff_detector_coordinates(spec: LatticeSpec, f: float, k_free: float):
    """Detector-plane ``(y, x)`` axes (FFT order) of an f-f arm."""
    return spec.qy() * f / k_free, spec.qx() * f / k_free


def fresnel_transfer(spec: LatticeSpec, delta_z: float, k_free: float) -> np.ndarray:
    """``exp(-i |q|^2 dz / 2k)`` on the transverse frame."""
    return np.exp(-0.5j * spec.q_squared() * delta_z / k_free)


def reference_transfer(
    spec: LatticeSpec,
    delta_z: float,
    k_free: float,
    focal_mask: np.ndarray | None = None,
) -> np.ndarray:
    """Total spatial transfer function of the telescope reference arm."""
    H = fresnel_transfer(spec, delta_z, k_free)
    if focal_mask is not None:
        H = H * focal_mask
    return H


def propagate_reference_telescope(
    b2: ComplexField,
    delta_z: float,
    k_free: float,
    focal_mask: np.ndarray | None = None,
) -> ComplexField:
    """Fresnel refocus by ``delta_z``, optional focal-plane mask, identity imaging."""
    _check_position(b2)
    H = reference_transfer(b2.spec, delta_z, k_free, focal_mask)
    return b2.replace(_spatial_ifft(_spatial_fft(b2.values) * H))


def apply_focal_plane_filter(b2: ComplexField, mask) -> ComplexField:
    """Multiply the spatial spectrum of ``b2`` by ``mask(q)``.

    ``mask`` is a ``(Ny, Nx)`` array in FFT order or a callable ``(qy, qx)``.
    """
    _check_position(b2)
    if callable(mask):
        QY, QX = np.meshgrid(b2.spec.qy(), b2.spec.qx(), indexing="ij")
        mask = mask(QY, QX)
    return b2.replace(_spatial_ifft(_spatial_fft(b2.values) * mask))


def stripe_mask(spec: LatticeSpec, halfwidth_q: float) -> np.ndarray:
    """Focal-plane slit passing ``|q_y| <= halfwidth_q`` (all ``q_x``)."""
    pass_y = np.abs(spec.qy()) <= halfwidth_q * (1 + 1e-12)
    return np.broadcast_to(pass_y[:, None], spec.frame_shape).astype(float)


def band_mask(spec: LatticeSpec, halfwidth: float | None) -> np.ndarray:
    """Boolean mask over the temporal-frequency axis for ``|W| <= halfwidth``."""
    w = spec.omega()
    if halfwidth is None:
        return np.ones(spec.Nt, bool)
    return np.abs(w) <= halfwidth * (1 + 1e-12) + 1e-300


def apply_interference_filter(field: ComplexField, halfwidth: float | None) -> ComplexField:
    """Zero temporal frequencies with ``|W| > halfwidth`` (position-space field)."""
    _check_position(field)
    spec = field.spec
    if halfwidth is None or halfwidth >= spec.omega_nyquist:
        if halfwidth is not None:
            warnings.warn("interference filter at or beyond Nyquist: no-op", stacklevel=2)
        return field
    if spec.Nt == 1:
        return field
    keep = band_mask(spec, halfwidth)[:, None, None]
    spectrum = np.fft.fft(field.values, axis=TIME_AXIS)
    return field.replace(np.fft.ifft(spectrum * keep, axis=TIME_AXIS))


def formula_delta_z(params: SourceParams) -> float:
    """Refocus distance from the closed formula ``-(1/n1 + 1/n2) tanh(g)/sigma_p``.

    With the gain-phase convention used here this distance does not cancel
    the quadratic phase of gamma; :func:`compensating_delta_z` does, and is
    the default. The formula is kept as the ``"formula"`` refocus rule.
    """
    if params.sigma_p == 0:
        return -(1 / params.n1 + 1 / params.n2) * params.l_c  # tanh(g)/sigma_p -> l_c
    return -(1 / params.n1 + 1 / params.n2) * math.tanh(params.gain) / params.sigma_p


def compensating_delta_z(params: SourceParams) -> float:
    """Refocus distance cancelling the quadratic phase of gamma near q = 0.

    For small mismatch the phase of ``gamma`` is ``d (1 - tanh(g)/(2g))``, a
    pure Fresnel phase in ``|q|^2``; the telescope object plane is moved by
    the free-space equivalent of that crystal length.
    """
    if params.sigma_p == 0:
        eff = params.l_c / 2
    else:
        eff = params.l_c - math.tanh(params.gain) / (2 * params.sigma_p)
    return -(1 / params.n1 + 1 / params.n2) * eff


RefKind = Literal["ff", "telescope"]


@dataclass(frozen=True)
class ArmConfig:
    """Both arms of the set-up.

    ``delta_z`` None means the refocus rule named by ``refocus``
    (``"compensating"`` for :func:`compensating_delta_z`, ``"formula"``
    for :func:`formula_delta_z`). ``focal_mask`` is a
    function ``spec -> (Ny, Nx) array`` so the config stays lattice-free.
    """

    obj: ObjectMask
    reference: RefKind = "ff"
    f_test: float = 0.1
    f_ref: float = 0.1
    delta_z: float | None = None
    refocus: str = "compensating"
    focal_mask: Callable[[LatticeSpec], np.ndarray] | None = None
    filter_halfwidth: float | None = None

    def resolved_delta_z(self, params: SourceParams) -> float:
        return resolve_delta_z(params, self.delta_z, self.refocus)


REFOCUS_RULES = {"compensating": compensating_delta_z, "formula": formula_delta_z}


def resolve_delta_z(params: SourceParams, delta_z: float | None, refocus: str = "compensating") -> float:
    if delta_z is not None:
        return delta_z
    try:
        return REFOCUS_RULES[refocus](params)
    except KeyError:
        raise ConfigurationError(f"unknown refocus rule {refocus!r}") from None
