"""Experiment configuration, its INI file form, and the figure presets.

Quantities are held in SI units in memory. On disk every physical key
carries its unit in the name (``w0_um``, ``dt_ps``, ...). Values are written
so that reading them back reproduces the in-memory floats bit for bit.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, fields, replace

from .correlator import MODES
from .lattice import LatticeSpec
from .source import SourceParams

# (section, ini key, attribute, scale from SI to file unit)
_SOURCE_KEYS = [
    ("model", "model", None),
    ("l_c_mm", "l_c", 1e3),
    ("k_per_m", "k", 1.0),
    ("gvd_s2_per_m", "gvd", 1.0),
    ("sigma_p_per_m", "sigma_p", 1.0),
    ("w0_um", "w0", 1e6),
    ("tau0_ps", "tau0", 1e12),
    ("nz", "Nz", None),
    ("n1", "n1", 1.0),
    ("n2", "n2", 1.0),
]
_LATTICE_KEYS = [
    ("nx", "Nx", None),
    ("ny", "Ny", None),
    ("nt", "Nt", None),
    ("dx_um", "dx", 1e6),
    ("dy_um", "dy", 1e6),
    ("dt_ps", "dt", 1e12),
]
# object parameters whose make_object keyword is in metres
_OBJECT_UNIT_KEYS = {"envelope_w": ("envelope_w_um", 1e6)}


def _encode(value: float, scale: float) -> str:
    """Text for ``value`` in file units that decodes back exactly."""
    if value is None:
        return "none"
    if math.isinf(value):
        return "inf"
    x = value * scale
    for _ in range(8):
        if float(repr(x)) / scale == value:
            return repr(x)
        x = math.nextafter(x, math.inf if float(repr(x)) / scale < value else -math.inf)
    return value.hex() + " si"


def _decode(text: str, scale: float) -> float | None:
    text = text.strip()
    if text.lower() == "none":
        return None
    if text.endswith(" si"):
        return float.fromhex(text[:-3])
    return float(text) / scale


def _parse_scalar(text: str):
    """Object-parameter literal: int, float, bool, none or string."""
    t = text.strip()
    low = t.lower()
    if low == "none":
        return None
    if low in ("true", "false"):
        return low == "true"
    for conv in (int, float):
        try:
            return conv(t)
        except ValueError:
            pass
    return t


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    """Everything one run needs.

    ``delta_z`` None means the refocus rule ``refocus`` (``"compensating"``
    or ``"formula"``, see :mod:`ghostsim.optics`).
    ``focal_filter`` is ``"none"`` or ``"stripe_y"`` (half width in units of
    q0). ``focal_compare`` also runs the reference arm without the focal
    mask, from the same shots. ``filter_halfwidth`` is the interference
    filter half width in rad/s (None = no filter). ``kernel_study`` lists
    filter half widths in units of Omega0 for which the bucket kernel is
    exported.
    """

    source: SourceParams = field(default_factory=SourceParams)
    lattice: LatticeSpec = field(default_factory=lambda: LatticeSpec(256, 1, 16, 2.9e-6, 2.9e-6, 0.375e-12))
    object_preset: str = "double_slit"
    object_params: dict = field(default_factory=dict)
    reference: str = "ff"
    f_test: float = 0.1
    f_ref: float = 0.1
    delta_z: float | None = None
    refocus: str = "compensating"
    focal_filter: str = "none"
    focal_halfwidth_q0: float = 0.5
    focal_compare: bool = False
    filter_halfwidth: float | None = None
    modes: tuple[str, ...] = ("ff_fixed_x1", "ff_spatial_average")
    x1: tuple[int, int] = (0, 0)
    shots: int = 10000
    seed: int = 1
    threads: int = 1
    eps_start: int = 10
    eps_factor: float = math.sqrt(2)
    kernel_study: tuple[float, ...] = ()
    out: str = "ghostsim_out"
    name: str = "custom"
    notes: str = ""

    def validate(self) -> "ExperimentConfig":
        if self.reference not in ("ff", "telescope"):
            raise ConfigError(f"unknown reference arm {self.reference!r}")
        for m in self.modes:
            if m not in MODES:
                raise ConfigError(f"unknown correlation mode {m!r}")
            if m.startswith("ff_") != (self.reference == "ff"):
                raise ConfigError(f"mode {m} does not match a {self.reference} reference arm")
        if self.refocus not in ("compensating", "formula"):
            raise ConfigError(f"unknown refocus rule {self.refocus!r}")
        if self.focal_filter not in ("none", "stripe_y"):
            raise ConfigError(f"unknown focal filter {self.focal_filter!r}")
        if self.focal_filter != "none" and self.reference != "telescope":
            raise ConfigError("focal-plane filters need the telescope reference arm")
        if self.shots < 0:
            raise ConfigError("shots must be >= 0")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        if self.eps_factor <= 1:
            raise ConfigError("eps_factor must exceed 1")
        return self

    # --- file form ----------------------------------------------------------

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp["experiment"] = {
            "name": self.name,
            "modes": ", ".join(self.modes),
            "shots": str(self.shots),
            "seed": str(self.seed),
            "threads": str(self.threads),
            "eps_start": str(self.eps_start),
            "eps_factor": _encode(self.eps_factor, 1.0),
            "x1_iy": str(self.x1[0]),
            "x1_ix": str(self.x1[1]),
            "out": self.out,
            "notes": self.notes.replace("\n", " "),
        }
        cp["source"] = {
            key: (str(getattr(self.source, attr)) if scale is None else _encode(getattr(self.source, attr), scale))
            for key, attr, scale in _SOURCE_KEYS
        }
        cp["lattice"] = {
            key: (str(getattr(self.lattice, attr)) if scale is None else _encode(getattr(self.lattice, attr), scale))
            for key, attr, scale in _LATTICE_KEYS
        }
        fh = self.filter_halfwidth
        cp["arms"] = {
            "reference": self.reference,
            "f_test_mm": _encode(self.f_test, 1e3),
            "f_ref_mm": _encode(self.f_ref, 1e3),
            "delta_z_mm": "auto" if self.delta_z is None else _encode(self.delta_z, 1e3),
            "refocus": self.refocus,
            "focal_filter": self.focal_filter,
            "focal_halfwidth_q0": _encode(self.focal_halfwidth_q0, 1.0),
            "focal_compare": str(self.focal_compare).lower(),
            "filter_halfwidth_rad_per_ps": "none" if fh is None else _encode(fh, 1e-12),
            "kernel_study_omega0": ", ".join(_encode(v, 1.0) for v in self.kernel_study),
        }
        obj = {"preset": self.object_preset}
        for k, v in self.object_params.items():
            if k in _OBJECT_UNIT_KEYS:
                key, scale = _OBJECT_UNIT_KEYS[k]
                obj[key] = "none" if v is None else _encode(v, scale)
            elif isinstance(v, float):
                obj[k] = _encode(v, 1.0)
            else:
                obj[k] = "none" if v is None else str(v).lower() if isinstance(v, bool) else str(v)
        cp["object"] = obj
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
            ex, src, lat, arms, obj = (cp[s] for s in ("experiment", "source", "lattice", "arms", "object"))
            source_kw = {}
            for key, attr, scale in _SOURCE_KEYS:
                raw = src[key]
                if attr == "model":
                    source_kw[attr] = raw.strip()
                elif attr == "Nz":
                    source_kw[attr] = int(raw)
                else:
                    source_kw[attr] = _decode(raw, scale)
            lat_kw = {
                attr: int(lat[key]) if scale is None else _decode(lat[key], scale)
                for key, attr, scale in _LATTICE_KEYS
            }
            params = {}
            unit_lookup = {v[0]: (k, v[1]) for k, v in _OBJECT_UNIT_KEYS.items()}
            for k, v in obj.items():
                if k == "preset":
                    continue
                if k in unit_lookup:
                    name, scale = unit_lookup[k]
                    params[name] = _decode(v, scale)
                else:
                    params[k] = _parse_scalar(v)
            dz = arms["delta_z_mm"].strip()
            fh = arms["filter_halfwidth_rad_per_ps"]
            ks = arms.get("kernel_study_omega0", "").strip()
            cfg = cls(
                source=SourceParams(**source_kw),
                lattice=LatticeSpec(**lat_kw),
                object_preset=obj["preset"].strip(),
                object_params=params,
                reference=arms["reference"].strip(),
                f_test=_decode(arms["f_test_mm"], 1e3),
                f_ref=_decode(arms["f_ref_mm"], 1e3),
                delta_z=None if dz == "auto" else _decode(dz, 1e3),
                refocus=arms.get("refocus", "compensating").strip(),
                focal_filter=arms["focal_filter"].strip(),
                focal_halfwidth_q0=_decode(arms["focal_halfwidth_q0"], 1.0),
                focal_compare=arms.getboolean("focal_compare"),
                filter_halfwidth=_decode(fh, 1e-12),
                modes=tuple(m.strip() for m in ex["modes"].split(",") if m.strip()),
                x1=(int(ex["x1_iy"]), int(ex["x1_ix"])),
                shots=int(ex["shots"]),
                seed=int(ex["seed"]),
                threads=int(ex["threads"]),
                eps_start=int(ex["eps_start"]),
                eps_factor=_decode(ex["eps_factor"], 1.0),
                kernel_study=tuple(_decode(v, 1.0) for v in ks.split(",")) if ks else (),
                out=ex["out"],
                name=ex["name"],
                notes=ex.get("notes", ""),
            )
        except (KeyError, configparser.Error) as err:
            raise ConfigError(f"malformed config: {err}") from err
        except (TypeError, ValueError) as err:
            raise ConfigError(str(err)) from err
        return cfg.validate()

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_ini())

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_ini(fh.read())

    def with_overrides(self, **kw) -> "ExperimentConfig":
        unknown = set(kw) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        return replace(self, **kw).validate()


# --- presets ----------------------------------------------------------------

_SRC = SourceParams()
_DX_1D = 2.9e-6  # 30 px slit spacing ~ 87 um
_DT_1D = 0.375e-12  # temporal Nyquist ~ 8 Omega0
_DX_2D = 8 * math.pi * _SRC.x_coh / 128  # q0 = 4 lattice steps in q
_LAT_1D = LatticeSpec(256, 1, 16, _DX_1D, _DX_1D, _DT_1D)
_LAT_2D = LatticeSpec(128, 128, 1, _DX_2D, _DX_2D, 1.0)


def _fig3():
    return ExperimentConfig(
        lattice=_LAT_1D,
        object_preset="double_slit",
        object_params={"width_px": 5, "spacing_px": 30},
        modes=("ff_fixed_x1", "ff_spatial_average"),
        shots=10000,
        name="fig3",
        notes=(
            "1D double slit in f-f, fixed pixel versus spatial average. Desk scale: "
            "Nx=256 Nt=16 and 1e4 shots instead of Nx=512 Nt=64; plane-wave pump "
            "so the fixed-pixel run has an exact reference."
        ),
    )


def _fig4():
    return ExperimentConfig(
        lattice=_LAT_2D,
        object_preset="cosine2d",
        object_params={"q0": _SRC.q0},
        modes=("ff_fixed_x1", "ff_spatial_average"),
        shots=4000,
        name="fig4",
        notes=(
            "2D cosine rolls at q0 (x) and 3q0 (y) in f-f. Desk scale: 128x128, "
            "no time axis (narrow filter limit), 4e3 shots; lattice step chosen "
            "so both roll frequencies are lattice-periodic."
        ),
    )


def _fig5():
    return ExperimentConfig(
        lattice=_LAT_2D,
        object_preset="phase_checker_gaussian",
        object_params={"holes": 4, "hole_px": 8, "pitch_px": 16, "envelope_w": 60 * _DX_2D},
        modes=("ff_fixed_x1", "ff_spatial_average"),
        shots=4000,
        name="fig5",
        notes=(
            "Pure phase checker (4x4 holes, -1 inside) under a Gaussian envelope, "
            "f-f with spatial averaging. Desk scale: 128x128, no time axis."
        ),
    )


def _fig6():
    return ExperimentConfig(
        lattice=replace(_LAT_1D, Nt=1, dt=1.0),
        object_preset="double_slit",
        object_params={"width_px": 5, "spacing_px": 30},
        reference="telescope",
        modes=("telescope_pixel_x1", "telescope_bucket"),
        shots=10000,
        name="fig6",
        notes=(
            "Double slit imaged through the telescope reference arm, pixel and "
            "bucket test detectors, compensating refocus. Desk scale: 1D Nx=256, "
            "no time axis, 1e4 shots."
        ),
    )


def _fig7():
    dt = math.pi / (40 * _SRC.omega0)
    return ExperimentConfig(
        lattice=LatticeSpec(1024, 1, 128, 1e-6, 1e-6, dt),
        object_preset="double_slit",
        object_params={"width_px": 14, "spacing_px": 87},
        reference="telescope",
        modes=("telescope_bucket",),
        shots=0,
        kernel_study=(0.0, 10.0, 20.0, 40.0),
        name="fig7",
        notes=(
            "Oracle-only kernel study: bucket kernel for filter half widths of "
            "0, 10, 20 and 40 Omega0. Lattice has temporal Nyquist at 40 Omega0 "
            "and 1 um steps so phase-matched q up to 40 q0 is resolved."
        ),
    )


def _fig8():
    return ExperimentConfig(
        lattice=_LAT_2D,
        object_preset="bitmap_letters",
        object_params={},
        reference="telescope",
        modes=("telescope_pixel_x1", "telescope_bucket"),
        shots=3000,
        name="fig8",
        notes=(
            "INFM letter mask, telescope arm, pixel versus bucket test detector at "
            "equal shots. Desk scale: 128x128, no time axis, 3e3 shots; bundled "
            "6x-scaled 5-row bitmap font."
        ),
    )


def _fig9():
    return ExperimentConfig(
        lattice=_LAT_2D,
        object_preset="square_cosine",
        object_params={"q0": _SRC.q0},
        reference="telescope",
        modes=("telescope_bucket",),
        focal_filter="stripe_y",
        focal_halfwidth_q0=0.5,
        focal_compare=True,
        shots=3000,
        name="fig9",
        notes=(
            "Square cosine rolls at 1.5q0, bucket test detector, focal-plane "
            "stripe passing |q_y| <= 0.5 q0 in the reference arm, with and without "
            "the stripe from the same shots. Desk scale: 128x128, no time axis."
        ),
    )


PRESETS = {
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
    "fig8": _fig8,
    "fig9": _fig9,
}


def preset(name: str) -> ExperimentConfig:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    return factory().validate()
