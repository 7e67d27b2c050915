"""Periodic space-time lattice, unitary transforms and vacuum sampling.

Arrays live in FFT order on every axis: index 0 is the origin, positive
coordinates come first and negative ones wrap to the end of the axis. Field
values have shape ``(..., Nt, Ny, Nx)``; any leading axes are shot batches.

The transform convention is fixed for the whole package::

    F(q, W) = N**-0.5 * sum_{x,t} f(x, t) * exp(-i (q.x + W t))

and the inverse uses the conjugate kernel with the same ``N**-0.5`` factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

Domain = Literal["position", "momentum"]

SPACE_AXES = (-2, -1)
TIME_AXIS = -3
ALL_AXES = (-3, -2, -1)


class ContractError(ValueError):
    """A field or frame was used against its declared domain or lattice."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class LatticeSpec:
    """Transverse/temporal grid with physical steps.

    ``Ny == 1`` gives a 1D transverse run and ``Nt == 1`` drops the time
    axis (equivalent to a very narrow interference filter).
    """

    Nx: int
    Ny: int = 1
    Nt: int = 1
    dx: float = 1.0
    dy: float = 1.0
    dt: float = 1.0

    def __post_init__(self):
        for name in ("Nx", "Ny", "Nt"):
            n = getattr(self, name)
            if int(n) != n or not _is_pow2(int(n)):
                raise ValueError(f"{name}={n} is not a power of two")
            object.__setattr__(self, name, int(n))
        for name in ("dx", "dy", "dt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.Nt, self.Ny, self.Nx)

    @property
    def frame_shape(self) -> tuple[int, int]:
        return (self.Ny, self.Nx)

    @property
    def size(self) -> int:
        return self.Nt * self.Ny * self.Nx

    @property
    def n_sites(self) -> int:
        """Number of transverse sites (pixels)."""
        return self.Ny * self.Nx

    @property
    def dim(self) -> int:
        return 1 if self.Ny == 1 else 2

    @property
    def cell_area(self) -> float:
        """Transverse pixel measure: dx in 1D, dx*dy in 2D."""
        return self.dx if self.Ny == 1 else self.dx * self.dy

    @property
    def dq_x(self) -> float:
        return 2 * np.pi / (self.Nx * self.dx)

    @property
    def dq_y(self) -> float:
        return 2 * np.pi / (self.Ny * self.dy)

    @property
    def d_omega(self) -> float:
        return 2 * np.pi / (self.Nt * self.dt)

    @property
    def omega_nyquist(self) -> float:
        return np.pi / self.dt

    def x(self) -> np.ndarray:
        return np.fft.fftfreq(self.Nx) * self.Nx * self.dx

    def y(self) -> np.ndarray:
        return np.fft.fftfreq(self.Ny) * self.Ny * self.dy

    def t(self) -> np.ndarray:
        return np.fft.fftfreq(self.Nt) * self.Nt * self.dt

    def qx(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.Nx, self.dx)

    def qy(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.Ny, self.dy)

    def omega(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.Nt, self.dt)

    def position_grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Broadcastable ``(Y, X)`` with shape ``(Ny, Nx)``."""
        return np.meshgrid(self.y(), self.x(), indexing="ij")

    def momentum_grid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable ``(W, QY, QX)`` with shape ``(Nt, Ny, Nx)``."""
        return np.meshgrid(self.omega(), self.qy(), self.qx(), indexing="ij")

    def q_squared(self) -> np.ndarray:
        """``|q|^2`` on the transverse frame, shape ``(Ny, Nx)``."""
        QY, QX = np.meshgrid(self.qy(), self.qx(), indexing="ij")
        return QX**2 + QY**2


def negate_index(a: np.ndarray, axes=ALL_AXES) -> np.ndarray:
    """Return ``a`` evaluated at the index-negated site along ``axes``.

    On a periodic FFT-ordered axis, site ``-j`` is ``(N - j) mod N``.
    """
    for ax in axes:
        a = np.roll(np.flip(a, axis=ax), 1, axis=ax)
    return a


@dataclass(frozen=True)
class ComplexField:
    """Complex mode amplitudes on a lattice, tagged with their domain."""

    values: np.ndarray
    spec: LatticeSpec
    domain: Domain = "position"

    def __post_init__(self):
        if self.domain not in ("position", "momentum"):
            raise ContractError(f"unknown domain {self.domain!r}")
        if tuple(self.values.shape[-3:]) != self.spec.shape:
            raise ContractError(
                f"field shape {self.values.shape} does not end in {self.spec.shape}"
            )

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return tuple(self.values.shape[:-3])

    def power(self) -> np.ndarray:
        """Sum of |values|^2 over the lattice (per batch entry)."""
        return np.sum(np.abs(self.values) ** 2, axis=ALL_AXES)

    def replace(self, values: np.ndarray) -> "ComplexField":
        return ComplexField(values, self.spec, self.domain)


def forward_transform(f: ComplexField) -> ComplexField:
    if f.domain != "position":
        raise ContractError("forward_transform expects a position-space field")
    vals = np.fft.fftn(f.values, axes=ALL_AXES, norm="ortho")
    return ComplexField(vals, f.spec, "momentum")


def inverse_transform(f: ComplexField) -> ComplexField:
    if f.domain != "momentum":
        raise ContractError("inverse_transform expects a momentum-space field")
    vals = np.fft.ifftn(f.values, axes=ALL_AXES, norm="ortho")
    return ComplexField(vals, f.spec, "position")


def shot_rng(seed: int, shot: int, stream: int = 0) -> np.random.Generator:
    """Independent Philox stream for one shot.

    The key is derived from ``(seed, stream, shot)`` through ``SeedSequence``,
    so a shot's noise never depends on which worker or batch draws it.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(shot)))
    return np.random.Generator(np.random.Philox(ss))


def sample_vacuum(
    spec: LatticeSpec, rng: np.random.Generator, domain: Domain = "position"
) -> ComplexField:
    """Circular complex Gaussian noise with <|a|^2> = 1/2 per site.

    This is the symmetric-ordering (Wigner) vacuum; under the unitary
    transform it has the same statistics in either domain, so ``domain``
    only sets the tag.
    """
    re = rng.standard_normal(spec.shape)
    im = rng.standard_normal(spec.shape)
    return ComplexField(0.5 * (re + 1j * im), spec, domain)
