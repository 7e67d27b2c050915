"""Parametric down-conversion source: gain functions and shot generators.

Two models produce one signal/idler pair per pump shot:

* ``plane_wave``: the stationary plane-wave pump transform, applied pointwise
  in ``(q, W)`` to two vacuum inputs,
  ``b1(q,W) = U(q,W) a1(q,W) + V(q,W) a2*(-q,-W)`` and symmetrically for b2.
* ``gaussian_pump``: symmetric split-step integration of the linear
  parametric equations through the crystal with a Gaussian pump profile.

Both models share one phase convention (see :func:`gain_functions`); in the
limit of an infinitely wide and long pump the split-step reproduces
``U`` and ``V`` exactly up to the O(dz^2) splitting error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Literal

import numpy as np

from .lattice import (
    ALL_AXES,
    ComplexField,
    LatticeSpec,
    inverse_transform,
    negate_index,
    sample_vacuum,
    shot_rng,
)

Model = Literal["plane_wave", "gaussian_pump"]

# desk defaults; k and gvd reproduce x_coh = 16 um and tau_coh = 0.96 ps
DEFAULT_LC = 4e-3
DEFAULT_XCOH = 16e-6
DEFAULT_TAUCOH = 0.96e-12


@dataclass(frozen=True)
class SourceParams:
    """Crystal and pump parameters.

    ``sigma_p`` is the peak gain per unit length (1/m); the dimensionless
    single-pass gain is ``sigma_p * l_c``. ``gvd`` is k'' in s^2/m.
    """

    l_c: float = DEFAULT_LC
    k: float = DEFAULT_LC / DEFAULT_XCOH**2
    gvd: float = DEFAULT_TAUCOH**2 / DEFAULT_LC
    sigma_p: float = 3.0 / DEFAULT_LC
    w0: float = 600e-6
    tau0: float = 1.5e-12
    model: Model = "plane_wave"
    Nz: int = 200
    n1: float = 1.66
    n2: float = 1.66

    def __post_init__(self):
        if self.model not in ("plane_wave", "gaussian_pump"):
            raise ValueError(f"unknown source model {self.model!r}")
        if self.l_c <= 0 or self.k <= 0 or self.gvd == 0:
            raise ValueError("l_c, k must be positive and gvd nonzero")
        if self.Nz < 1:
            raise ValueError("Nz must be >= 1")

    @property
    def gain(self) -> float:
        return self.sigma_p * self.l_c

    @property
    def q0(self) -> float:
        return math.sqrt(self.k / self.l_c)

    @property
    def x_coh(self) -> float:
        return 1.0 / self.q0

    @property
    def omega0(self) -> float:
        return 1.0 / math.sqrt(abs(self.gvd) * self.l_c)

    @property
    def tau_coh(self) -> float:
        return 1.0 / self.omega0

    @property
    def delta_q_pump(self) -> float:
        return 2.0 / self.w0

    @property
    def k_free(self) -> float:
        """Free-space wavenumber of the degenerate down-converted light."""
        return 0.5 * self.k * (1.0 / self.n1 + 1.0 / self.n2)

    def with_gain(self, g: float) -> "SourceParams":
        return replace(self, sigma_p=g / self.l_c)


def _cosh_sinhc(G2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``cosh(s)`` and ``sinh(s)/s`` for ``s = sqrt(G2)``, G2 real of any sign."""
    G2 = np.asarray(G2, dtype=float)
    s = np.sqrt(np.abs(G2))
    pos = G2 >= 0
    # both branches are evaluated by np.where; the unused one may overflow
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        C = np.where(pos, np.cosh(s), np.cos(s))
        S = np.where(pos, np.sinh(s), np.sin(s)) / s
    small = np.abs(G2) < 1e-6
    # series through G2^2 is exact to double precision on this branch
    S = np.where(small, 1.0 + G2 / 6.0 + G2**2 / 120.0, S)
    C = np.where(small, 1.0 + G2 / 2.0 + G2**2 / 24.0, C)
    return C, S


def mismatch(params: SourceParams, q2, omega) -> np.ndarray:
    """Dimensionless phase mismatch ``l_c (k'' W^2 - |q|^2 / k)``."""
    return params.l_c * (params.gvd * np.asarray(omega) ** 2 - np.asarray(q2) / params.k)


def gain_functions(params: SourceParams, q2, omega) -> tuple[np.ndarray, np.ndarray]:
    """U and V at squared transverse wavenumber ``q2`` and frequency ``omega``.

    With ``d`` the mismatch and ``g = sigma_p l_c``::

        G = sqrt(g^2 - d^2/4)
        U = exp(i d/2) [cosh G - i (d/2) sinh(G)/G]
        V = exp(i d/2) g sinh(G)/G

    ``G`` turns imaginary when ``|d|/2 > g``; cosh/sinhc then become cos/sinc,
    so everything stays real apart from the phase prefactor.
    """
    d = mismatch(params, q2, omega)
    g = params.gain
    C, S = _cosh_sinhc(g * g - 0.25 * d * d)
    ph = np.exp(0.5j * d)
    U = ph * (C - 0.5j * d * S)
    V = ph * (g * S)
    return U, V


@dataclass(frozen=True)
class GainTable:
    """U, V and gamma(q, W) = U(q, W) V(-q, -W) sampled on a lattice."""

    U: np.ndarray
    V: np.ndarray
    gamma: np.ndarray
    spec: LatticeSpec
    params: SourceParams

    def unitarity_error(self) -> float:
        return float(np.max(np.abs(np.abs(self.U) ** 2 - np.abs(self.V) ** 2 - 1.0)))


def compute_gain(params: SourceParams, spec: LatticeSpec) -> GainTable:
    W, QY, QX = spec.momentum_grid()
    U, V = gain_functions(params, QX**2 + QY**2, W)
    gamma = U * negate_index(V)
    return GainTable(U, V, gamma, spec, params)


@dataclass(frozen=True)
class FieldPair:
    """Signal (b1) and idler (b2) at the crystal exit, position space."""

    b1: ComplexField
    b2: ComplexField

    def __post_init__(self):
        if self.b1.spec != self.b2.spec:
            raise ValueError("signal and idler must share a lattice")

    @property
    def spec(self) -> LatticeSpec:
        return self.b1.spec


def _apply_plane_wave(gain: GainTable, a1: np.ndarray, a2: np.ndarray):
    """Bogoliubov transform of momentum-space inputs (any leading batch)."""
    b1 = gain.U * a1 + gain.V * np.conj(negate_index(a2))
    b2 = gain.U * a2 + gain.V * np.conj(negate_index(a1))
    return b1, b2


def generate_shot_plane_wave(gain: GainTable, rng: np.random.Generator) -> FieldPair:
    spec = gain.spec
    a1 = sample_vacuum(spec, rng, "momentum").values
    a2 = sample_vacuum(spec, rng, "momentum").values
    b1, b2 = _apply_plane_wave(gain, a1, a2)
    return FieldPair(
        inverse_transform(ComplexField(b1, spec, "momentum")),
        inverse_transform(ComplexField(b2, spec, "momentum")),
    )


def pump_profile(params: SourceParams, spec: LatticeSpec) -> np.ndarray:
    """Undepleted pump envelope ``exp(-|x|^2/w0^2 - t^2/tau0^2)``, shape (Nt,Ny,Nx)."""
    Y, X = spec.position_grid()
    r2 = X**2 + Y**2
    t = spec.t()
    sp = np.exp(-r2 / params.w0**2) if math.isfinite(params.w0) else np.ones_like(r2)
    if spec.Nt > 1 and math.isfinite(params.tau0):
        tp = np.exp(-(t**2) / params.tau0**2)
    else:
        tp = np.ones_like(t)
    return tp[:, None, None] * sp[None, :, :]


class SplitStepPropagator:
    """Symmetric split-step integrator for the Gaussian-pump crystal.

    Each step is a half linear step (diffraction and dispersion, applied in
    Fourier space), a local two-mode squeeze
    ``a1 <- a1 cosh(s) + a2* sinh(s)`` with ``s = sigma_p alpha(x, t) dz``,
    and another half linear step. Adjacent half steps are fused.

    The linear operator is ``exp(-i kappa dz)`` with
    ``kappa = (k'' W^2 - |q|^2/k) / 2`` and the output is returned with the
    accumulated free-propagation phase ``exp(i kappa l_c)`` put back, which is
    the convention under which a uniform pump reproduces :func:`gain_functions`.
    """

    def __init__(self, params: SourceParams, spec: LatticeSpec):
        dz = params.l_c / params.Nz
        if params.sigma_p * dz >= 0.5:
            raise ValueError(
                f"split-step unstable: sigma_p*dz = {params.sigma_p * dz:.3f} >= 0.5"
            )
        self.params = params
        self.spec = spec
        W, QY, QX = spec.momentum_grid()
        kappa = 0.5 * (params.gvd * W**2 - (QX**2 + QY**2) / params.k)
        self._half = np.exp(-0.5j * kappa * dz)
        self._full = self._half * self._half
        self._last = self._half * np.exp(1j * kappa * params.l_c)
        s = params.sigma_p * pump_profile(params, spec) * dz
        self._ch = np.cosh(s)
        self._sh = np.sinh(s)

    def _linear(self, a, phase):
        return np.fft.ifftn(np.fft.fftn(a, axes=ALL_AXES) * phase, axes=ALL_AXES)

    def propagate(self, a1: np.ndarray, a2: np.ndarray):
        """Propagate position-space inputs (any leading batch) to the exit face."""
        ch, sh = self._ch, self._sh
        a1 = self._linear(a1, self._half)
        a2 = self._linear(a2, self._half)
        for step in range(self.params.Nz):
            a1, a2 = a1 * ch + np.conj(a2) * sh, a2 * ch + np.conj(a1) * sh
            phase = self._full if step < self.params.Nz - 1 else self._last
            a1 = self._linear(a1, phase)
            a2 = self._linear(a2, phase)
        return a1, a2


def generate_shot_gaussian_pump(
    params: SourceParams, spec: LatticeSpec, rng: np.random.Generator
) -> FieldPair:
    prop = SplitStepPropagator(params, spec)
    a1 = sample_vacuum(spec, rng).values
    a2 = sample_vacuum(spec, rng).values
    b1, b2 = prop.propagate(a1, a2)
    return FieldPair(ComplexField(b1, spec), ComplexField(b2, spec))


class ShotGenerator:
    """Batched shot production with per-shot reproducible noise.

    Shot ``i`` always draws its two vacuum inputs from ``shot_rng(seed, i)``,
    whatever batch it is generated in.
    """

    def __init__(self, params: SourceParams, spec: LatticeSpec, seed: int):
        self.params = params
        self.spec = spec
        self.seed = int(seed)
        if params.model == "plane_wave":
            self.gain = compute_gain(params, spec)
            self._prop = None
        else:
            self.gain = None
            self._prop = SplitStepPropagator(params, spec)

    def _vacuum(self, shots: Iterable[int]):
        shots = list(shots)
        a1 = np.empty((len(shots),) + self.spec.shape, complex)
        a2 = np.empty_like(a1)
        for i, shot in enumerate(shots):
            rng = shot_rng(self.seed, shot)
            a1[i] = sample_vacuum(self.spec, rng).values
            a2[i] = sample_vacuum(self.spec, rng).values
        return a1, a2

    def generate(self, shots: Iterable[int]) -> FieldPair:
        """Fields for the given shot indices, stacked along a leading axis."""
        a1, a2 = self._vacuum(shots)
        if self._prop is None:
            b1, b2 = _apply_plane_wave(self.gain, a1, a2)
            b1 = np.fft.ifftn(b1, axes=ALL_AXES, norm="ortho")
            b2 = np.fft.ifftn(b2, axes=ALL_AXES, norm="ortho")
        else:
            b1, b2 = self._prop.propagate(a1, a2)
        return FieldPair(ComplexField(b1, self.spec), ComplexField(b2, self.spec))
