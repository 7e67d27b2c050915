"""Streaming intensity-fluctuation correlators.

Four estimators share one accumulator type:

``ff_fixed_x1`` / ``telescope_pixel_x1``
    ``G(x2) = <I1(x1) I2(x2)> - <I1(x1)><I2(x2)>`` at a fixed test pixel.
``ff_spatial_average``
    ``G(x) = sum_x1 G(x1, x - x1) dA``, a cyclic convolution evaluated with
    FFTs. The background is the convolution of the two mean frames.
``telescope_bucket``
    The test arm is summed into a bucket value before correlating.

Running sums use Neumaier compensation, so merging shards is exact to
rounding of the final addition and a fixed shard layout is bit-reproducible.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .detection import IntensityFrame, bucket
from .lattice import SPACE_AXES, ContractError, LatticeSpec

Mode = Literal["ff_fixed_x1", "ff_spatial_average", "telescope_pixel_x1", "telescope_bucket"]
MODES: tuple[str, ...] = (
    "ff_fixed_x1",
    "ff_spatial_average",
    "telescope_pixel_x1",
    "telescope_bucket",
)

CHECKPOINT_MAGIC = b"GACC"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<4sIIIIIdddiiQ")


class _KahanSum:
    """Element-wise Neumaier-compensated running sum."""

    __slots__ = ("s", "c")

    def __init__(self, shape):
        self.s = np.zeros(shape)
        self.c = np.zeros(shape)

    def add(self, x):
        s = self.s
        t = s + x
        self.c += np.where(np.abs(s) >= np.abs(x), (s - t) + x, (x - t) + s)
        self.s = t

    def merge(self, other: "_KahanSum") -> "_KahanSum":
        out = _KahanSum(np.shape(self.s))
        out.s = self.s.copy()
        out.c = self.c + other.c
        out.add(other.s)
        return out

    @property
    def value(self):
        return self.s + self.c


def cyclic_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``(a * b)(x) = sum_y a(y) b(x - y)`` over the last two axes, summed over batch."""
    shape = a.shape[-2:]
    fa = np.fft.rfft2(a, axes=SPACE_AXES)
    fb = np.fft.rfft2(b, axes=SPACE_AXES)
    prod = fa * fb
    if prod.ndim > 2:
        prod = prod.reshape((-1,) + prod.shape[-2:]).sum(axis=0)
    return np.fft.irfft2(prod, s=shape, axes=SPACE_AXES)


@dataclass
class CorrelationMap:
    """Finalized correlation over the mode's coordinate (FFT order)."""

    values: np.ndarray
    mode: str
    n: int
    spec: LatticeSpec

    @property
    def rescaled(self) -> np.ndarray:
        peak = np.max(self.values)
        return self.values / peak if peak > 0 else self.values.copy()


class CorrelationAccumulator:
    """Single-writer running sums for one correlation mode.

    Parameters
    ----------
    mode : str
        One of :data:`MODES`.
    spec : LatticeSpec
        Lattice both frames live on.
    x1 : (int, int)
        Fixed test pixel ``(iy, ix)`` in FFT order for the fixed modes.
    """

    def __init__(self, mode: Mode, spec: LatticeSpec, x1: tuple[int, int] = (0, 0)):
        if mode not in MODES:
            raise ValueError(f"unknown correlation mode {mode!r}")
        self.mode = mode
        self.spec = spec
        self.x1 = (int(x1[0]) % spec.Ny, int(x1[1]) % spec.Nx)
        self.n = 0
        frame = spec.frame_shape
        self._s12 = _KahanSum(frame)
        self._s2 = _KahanSum(frame)
        self._s1 = _KahanSum(frame if mode == "ff_spatial_average" else ())

    def _test_marginal(self, I1: IntensityFrame) -> np.ndarray:
        if self.mode == "telescope_bucket":
            return np.asarray(bucket(I1))
        iy, ix = self.x1
        return I1.I[..., iy, ix]

    def accumulate(self, I1: IntensityFrame, I2: IntensityFrame) -> None:
        """Add one shot, or a batch of shots stacked on leading axes."""
        if I1.spec != self.spec or I2.spec != self.spec:
            raise ContractError("frame lattice does not match the accumulator")
        if I1.I.shape != I2.I.shape:
            raise ContractError("test and reference frames differ in shape")
        a, b = I1.I, I2.I
        batch = a.shape[:-2]
        count = int(np.prod(batch)) if batch else 1
        frame = self.spec.frame_shape
        b_flat = b.reshape((count,) + frame)
        if self.mode == "ff_spatial_average":
            a_flat = a.reshape((count,) + frame)
            self._s12.add(cyclic_convolve(a_flat, b_flat) * self.spec.cell_area)
            self._s1.add(a_flat.sum(axis=0))
        else:
            m = self._test_marginal(I1).reshape(count)
            self._s12.add(np.tensordot(m, b_flat, axes=1))
            self._s1.add(m.sum())
        self._s2.add(b_flat.sum(axis=0))
        self.n += count

    def merge(self, other: "CorrelationAccumulator") -> "CorrelationAccumulator":
        if (self.mode, self.spec, self.x1) != (other.mode, other.spec, other.x1):
            raise ContractError("cannot merge accumulators with different set-ups")
        out = CorrelationAccumulator(self.mode, self.spec, self.x1)
        out._s12 = self._s12.merge(other._s12)
        out._s1 = self._s1.merge(other._s1)
        out._s2 = self._s2.merge(other._s2)
        out.n = self.n + other.n
        return out

    def finalize(self) -> CorrelationMap:
        if self.n < 2:
            raise ValueError(f"finalize needs at least 2 shots, have {self.n}")
        n = self.n
        m12 = self._s12.value / n
        m1 = self._s1.value / n
        m2 = self._s2.value / n
        if self.mode == "ff_spatial_average":
            background = cyclic_convolve(m1, m2) * self.spec.cell_area
        else:
            background = m1 * m2
        return CorrelationMap(m12 - background, self.mode, n, self.spec)

    # --- checkpoints ------------------------------------------------------

    def save(self, path) -> None:
        """Write a self-describing little-endian checkpoint."""
        s = self.spec
        header = _HEADER.pack(
            CHECKPOINT_MAGIC,
            CHECKPOINT_VERSION,
            MODES.index(self.mode),
            s.Nx,
            s.Ny,
            s.Nt,
            s.dx,
            s.dy,
            s.dt,
            self.x1[0],
            self.x1[1],
            self.n,
        )
        with open(path, "wb") as fh:
            fh.write(header)
            for acc in (self._s12, self._s1, self._s2):
                for arr in (acc.s, acc.c):
                    fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "CorrelationAccumulator":
        raw = Path(path).read_bytes()
        magic, version, mode, nx, ny, nt, dx, dy, dt, iy, ix, n = _HEADER.unpack_from(raw)
        if magic != CHECKPOINT_MAGIC or version != CHECKPOINT_VERSION:
            raise ValueError(f"{path}: not a correlator checkpoint")
        spec = LatticeSpec(nx, ny, nt, dx, dy, dt)
        acc = cls(MODES[mode], spec, (iy, ix))
        acc.n = n
        offset = _HEADER.size
        for part in (acc._s12, acc._s1, acc._s2):
            size = int(np.prod(np.shape(part.s)))
            for name in ("s", "c"):
                arr = np.frombuffer(raw, "<f8", size, offset).astype(float)
                setattr(part, name, arr.reshape(np.shape(part.s)))
                offset += 8 * size
        return acc


def accumulate(acc: CorrelationAccumulator, I1: IntensityFrame, I2: IntensityFrame) -> None:
    acc.accumulate(I1, I2)


def finalize(acc: CorrelationAccumulator) -> CorrelationMap:
    return acc.finalize()


def merge(a: CorrelationAccumulator, b: CorrelationAccumulator) -> CorrelationAccumulator:
    return a.merge(b)
