"""File formats: GIMG grids, PGM bitmaps/previews and CSV error series.

GIMG layout (all little-endian)::

    b"GIMG"  u32 version  u32 ny  u32 nx  u32 flags  f64 dx  f64 dy
    ny*nx f64 values, row-major

``flags`` bit 0 marks a centred (fftshift-ed) file; :func:`read_grid`
undoes the shift so values come back in FFT order bit for bit.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

GIMG_MAGIC = b"GIMG"
GIMG_VERSION = 1
_GIMG_HEADER = struct.Struct("<4sIIIIdd")


@dataclass
class Grid:
    values: np.ndarray  # (ny, nx), FFT order
    dx: float = 1.0
    dy: float = 1.0


def write_grid(path, values, dx: float = 1.0, dy: float = 1.0, centered: bool = True):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[None, :]
    if values.ndim != 2:
        raise ValueError("grid values must be 1D or 2D")
    ny, nx = values.shape
    data = np.fft.fftshift(values) if centered else values
    with open(path, "wb") as fh:
        fh.write(_GIMG_HEADER.pack(GIMG_MAGIC, GIMG_VERSION, ny, nx, int(centered), dx, dy))
        fh.write(np.ascontiguousarray(data, dtype="<f8").tobytes())


def read_grid(path) -> Grid:
    raw = Path(path).read_bytes()
    magic, version, ny, nx, flags, dx, dy = _GIMG_HEADER.unpack_from(raw)
    if magic != GIMG_MAGIC:
        raise ValueError(f"{path}: not a GIMG file")
    if version != GIMG_VERSION:
        raise ValueError(f"{path}: unsupported GIMG version {version}")
    data = np.frombuffer(raw, dtype="<f8", offset=_GIMG_HEADER.size, count=ny * nx)
    values = data.reshape(ny, nx).astype(float)
    if flags & 1:
        values = np.fft.ifftshift(values)
    return Grid(values, dx, dy)


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) greymap as a uint8/uint16 array."""
    raw = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            while raw[pos : pos + 1] not in (b"\n", b""):
                pos += 1
            continue
        start = pos
        while not raw[pos : pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    pos += 1  # single whitespace after maxval
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: only binary PGM (P5) is supported")
    width, height, maxval = (int(t) for t in tokens[1:])
    dtype = np.uint8 if maxval < 256 else ">u2"
    img = np.frombuffer(raw, dtype=dtype, count=width * height, offset=pos)
    return img.reshape(height, width).astype(np.uint8 if maxval < 256 else np.uint16)


def write_pgm(path, image: np.ndarray, maxval: int = 255):
    image = np.asarray(image)
    h, w = image.shape
    dtype = np.uint8 if maxval < 256 else ">u2"
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{maxval}\n".encode())
        fh.write(np.ascontiguousarray(image, dtype=dtype).tobytes())


def write_preview(path, values: np.ndarray):
    """16-bit PGM of a map, centred and normalised to its maximum (negatives -> 0)."""
    v = np.fft.fftshift(np.atleast_2d(np.asarray(values, dtype=float)))
    peak = v.max()
    scaled = np.clip(v / peak, 0, 1) if peak > 0 else np.zeros_like(v)
    write_pgm(path, np.round(scaled * 65535).astype(np.uint16), maxval=65535)


def write_series_csv(path, n, eps):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "epsilon"])
        for a, b in zip(n, eps):
            w.writerow([int(a), repr(float(b))])


def read_series_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [int(r["n"]) for r in rows], [float(r["epsilon"]) for r in rows]
