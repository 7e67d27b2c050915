"""Detector readout: time-averaged intensities and bucket sums."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import SPACE_AXES, TIME_AXIS, ComplexField, ContractError, LatticeSpec

VACUUM_LEVEL = 0.5


@dataclass(frozen=True)
class IntensityFrame:
    """Time-averaged intensity per transverse site.

    ``I`` has shape ``(..., Ny, Nx)``; leading axes are shot batches.
    ``clamped_mass`` records how much negative intensity the vacuum
    correction clipped to zero.
    """

    I: np.ndarray
    spec: LatticeSpec
    shot: int | None = None
    vacuum_corrected: bool = False
    clamped_mass: float = 0.0

    def __post_init__(self):
        if tuple(self.I.shape[-2:]) != self.spec.frame_shape:
            raise ContractError(f"frame shape {self.I.shape} does not match lattice")
        if np.any(self.I < 0):
            raise ContractError("intensity frames must be non-negative")

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return tuple(self.I.shape[:-2])


def detect(c: ComplexField, shot: int | None = None) -> IntensityFrame:
    """``I(x) = (1/Nt) sum_t |c(x, t)|^2`` over the whole temporal window."""
    if c.domain != "position":
        raise ContractError("detect expects a position-space field")
    v = c.values
    I = np.mean(v.real**2 + v.imag**2, axis=TIME_AXIS)
    return IntensityFrame(I, c.spec, shot)


def bucket(frame: IntensityFrame) -> np.ndarray | float:
    """Integrated intensity ``sum_x I(x) dA`` (one value per batch entry)."""
    b = np.sum(frame.I, axis=SPACE_AXES) * frame.spec.cell_area
    return float(b) if np.ndim(b) == 0 else b


def vacuum_correction(frame: IntensityFrame, level: float = VACUUM_LEVEL) -> IntensityFrame:
    """Subtract the symmetric-ordering vacuum level and clamp at zero.

    Raises
    ------
    ContractError
        If the frame has already been corrected.
    """
    if frame.vacuum_corrected:
        raise ContractError("vacuum correction already applied to this frame")
    shifted = frame.I - level
    clamped = float(-np.sum(shifted[shifted < 0]))
    return IntensityFrame(
        np.maximum(shifted, 0.0),
        frame.spec,
        frame.shot,
        vacuum_corrected=True,
        clamped_mass=frame.clamped_mass + clamped,
    )
