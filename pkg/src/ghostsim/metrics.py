"""Convergence error, power-law-plus-offset fits and the speedup estimate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import golden

from .oracle import bandwidth_pdc
from .source import GainTable, SourceParams


class FitError(ValueError):
    """The convergence model cannot be fitted to the series."""


def epsilon(G_n: np.ndarray, G_ref: np.ndarray) -> float:
    """Relative RMS distance after rescaling ``G_n`` to the reference maximum.

    ``eps = || G_n max(G_ref)/max(G_n) - G_ref || / || G_ref ||``.
    """
    G_n = np.asarray(G_n, dtype=float)
    G_ref = np.asarray(G_ref, dtype=float)
    if G_n.shape != G_ref.shape:
        raise ValueError(f"map shapes differ: {G_n.shape} vs {G_ref.shape}")
    peak = G_n.max()
    if not peak > 0:
        raise ValueError("cannot rescale a map whose maximum is not positive")
    scaled = G_n * (G_ref.max() / peak)
    return float(np.linalg.norm(scaled - G_ref) / np.linalg.norm(G_ref))


def epsilon_schedule(n_max: int, start: int = 10, factor: float = math.sqrt(2)) -> list[int]:
    """Geometric shot counts ``start, start*factor, ...`` up to ``n_max`` (inclusive)."""
    out = []
    x = float(start)
    while round(x) < n_max:
        n = int(round(x))
        if not out or n > out[-1]:
            out.append(n)
        x *= factor
    if n_max >= 2 and (not out or out[-1] != n_max):
        out.append(int(n_max))
    return [n for n in out if n >= 2]


@dataclass
class ErrorSeries:
    n: list[int] = field(default_factory=list)
    eps: list[float] = field(default_factory=list)
    reference: str = ""

    def append(self, n: int, eps: float) -> None:
        if self.n and n <= self.n[-1]:
            raise ValueError("shot counts must increase strictly")
        if eps < 0:
            raise ValueError("epsilon must be non-negative")
        self.n.append(int(n))
        self.eps.append(float(eps))

    def __len__(self):
        return len(self.n)


@dataclass(frozen=True)
class ConvergenceFit:
    """``eps(n) ~ (d0 n)^-1/2 + d1``."""

    d0: float
    d1: float
    residual: float

    def __call__(self, n):
        return (self.d0 * np.asarray(n, float)) ** -0.5 + self.d1


def _solve_d0(u, y, d1):
    """Best amplitude ``a`` for ``y - d1 ~ a u`` and its residual norm."""
    r = y - d1
    a = float(np.dot(r, u) / np.dot(u, u))
    return a, float(np.linalg.norm(r - a * u))


def fit_convergence(series: ErrorSeries, grid: int = 64) -> ConvergenceFit:
    """Least-squares fit of ``(d0 n)^-1/2 + d1``.

    The offset ``d1`` is searched over ``[0, min eps]``: a coarse scan picks
    the best bracket and a golden-section search refines it, with ``d0`` in
    closed form at each candidate.

    Raises
    ------
    FitError
        Fewer than 8 points, less than one decade in n, or a series with no
        decrease.
    """
    n = np.asarray(series.n, dtype=float)
    y = np.asarray(series.eps, dtype=float)
    if len(n) < 8:
        raise FitError(f"need at least 8 points, have {len(n)}")
    if n[-1] / n[0] < 10:
        raise FitError("series must span at least one decade in n")
    if not y[-1] < y[0] or np.all(np.diff(y) >= 0):
        raise FitError("error series does not decrease")
    u = n**-0.5
    hi = float(y.min())

    def cost(d1):
        return _solve_d0(u, y, d1)[1]

    cands = np.linspace(0.0, hi, grid + 1)
    costs = [cost(c) for c in cands]
    i = int(np.argmin(costs))
    d1 = float(cands[i])
    if 0 < i < grid and costs[i] < min(costs[i - 1], costs[i + 1]):
        d1 = float(golden(cost, brack=(cands[i - 1], cands[i], cands[i + 1]), tol=1e-12))
    a, res = _solve_d0(u, y, d1)
    if a <= 0:
        raise FitError("fitted amplitude is not positive")
    return ConvergenceFit(d0=1.0 / a**2, d1=d1, residual=res)


def speedup_from_widths(delta_q_pdc: float, w0: float) -> float:
    """``rho = dq_PDC / (2/w0)``."""
    return delta_q_pdc / (2.0 / w0)


def speedup_estimate(params: SourceParams, gain: GainTable, halfwidth: float | None = None) -> float:
    """Predicted SA convergence speedup per transverse dimension."""
    return speedup_from_widths(bandwidth_pdc(gain, halfwidth), params.w0)
