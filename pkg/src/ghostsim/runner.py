"""Run orchestration: shots -> arms -> detectors -> correlators -> exports.

Shots between two error snapshots are split into ``threads`` contiguous
shards; each shard is processed in fixed-size batches into its own
accumulator and the shards are merged in index order. With a fixed thread
count every sum is formed in the same order, so bundles are bit-identical.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io, optics, oracle
from .config import ExperimentConfig
from .correlator import CorrelationAccumulator, CorrelationMap
from .detection import detect
from .metrics import ConvergenceFit, ErrorSeries, FitError, epsilon, epsilon_schedule, fit_convergence
from .source import ShotGenerator, compute_gain

log = logging.getLogger(__name__)

BATCH_ELEMENTS = 1 << 19  # complex samples per generated batch and field


@dataclass
class Experiment:
    """Lattice-resolved objects shared by the oracle and Monte Carlo paths."""

    config: ExperimentConfig

    def __post_init__(self):
        cfg = self.config
        self.spec = cfg.lattice
        self.params = cfg.source
        obj_params = dict(cfg.object_params)
        if cfg.object_preset in ("cosine2d", "square_cosine") and obj_params.get("q0") in (None, "auto"):
            obj_params["q0"] = self.params.q0
        self.obj = optics.make_object(cfg.object_preset, obj_params, self.spec)
        self.gain = compute_gain(self.params, self.spec)
        self.delta_z = optics.resolve_delta_z(self.params, cfg.delta_z, cfg.refocus)
        self.k_free = self.params.k_free
        self.focal_mask = None
        if cfg.focal_filter == "stripe_y":
            self.focal_mask = optics.stripe_mask(self.spec, cfg.focal_halfwidth_q0 * self.params.q0)

    def variants(self) -> dict[str, np.ndarray | None]:
        """Reference-arm focal masks keyed by output suffix."""
        out = {"": self.focal_mask}
        if self.config.focal_compare and self.focal_mask is not None:
            out["_unfiltered"] = None
        return out

    def transfer(self, mask) -> np.ndarray:
        return optics.reference_transfer(self.spec, self.delta_z, self.k_free, mask)

    def oracle_maps(self) -> dict[str, np.ndarray]:
        cfg = self.config
        fh = cfg.filter_halfwidth
        maps = {}
        for suffix, mask in self.variants().items():
            nf = oracle.near_field_correlation(self.gain, self.transfer(mask))
            for mode in cfg.modes:
                if mode == "ff_fixed_x1":
                    ref = oracle.oracle_ff(cfg.x1, self.obj, self.gain, fh)
                elif mode == "ff_spatial_average":
                    ref = oracle.oracle_ff_sa(self.obj, self.gain, fh)[0]
                elif mode == "telescope_pixel_x1":
                    ref = oracle.oracle_telescope_pixel(cfg.x1, self.obj, nf, fh)
                else:
                    ref = oracle.oracle_telescope_bucket(self.obj, nf, fh)
                maps[mode + suffix] = ref
            if cfg.reference == "ff":
                break
        return maps

    def map_steps(self, mode: str) -> tuple[float, float]:
        """Physical ``(dy, dx)`` of a map's coordinate."""
        if mode.startswith("ff_"):
            return (
                self.spec.dq_y * self.config.f_ref / self.k_free,
                self.spec.dq_x * self.config.f_ref / self.k_free,
            )
        return self.spec.dy, self.spec.dx


class _Pipeline:
    """Per-batch physics; stateless apart from the shared shot generator."""

    def __init__(self, exp: Experiment):
        self.exp = exp
        self.gen = ShotGenerator(exp.params, exp.spec, exp.config.seed)
        spec = exp.spec
        self.batch = max(1, BATCH_ELEMENTS // spec.size)

    def new_accumulators(self):
        cfg = self.exp.config
        accs = {}
        for suffix in self.exp.variants():
            for mode in cfg.modes:
                accs[mode + suffix] = CorrelationAccumulator(mode, self.exp.spec, cfg.x1)
            if cfg.reference == "ff":
                break
        return accs

    def process(self, start: int, stop: int, accs) -> None:
        exp, cfg = self.exp, self.exp.config
        for lo in range(start, stop, self.batch):
            pair = self.gen.generate(range(lo, min(lo + self.batch, stop)))
            b1, b2 = pair.b1, pair.b2
            if cfg.filter_halfwidth is not None:
                b1 = optics.apply_interference_filter(b1, cfg.filter_halfwidth)
                b2 = optics.apply_interference_filter(b2, cfg.filter_halfwidth)
            I1 = detect(optics.propagate_test_ff(b1, exp.obj))
            if cfg.reference == "ff":
                I2 = detect(optics.propagate_reference_ff(b2))
                for acc in accs.values():
                    acc.accumulate(I1, I2)
                continue
            for suffix, mask in exp.variants().items():
                c2 = optics.propagate_reference_telescope(b2, exp.delta_z, exp.k_free, mask)
                I2 = detect(c2)
                for mode in cfg.modes:
                    accs[mode + suffix].accumulate(I1, I2)


def _shards(start: int, stop: int, threads: int):
    edges = np.linspace(start, stop, threads + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


@dataclass
class ResultBundle:
    config: ExperimentConfig
    oracles: dict[str, np.ndarray]
    maps: dict[str, CorrelationMap] = field(default_factory=dict)
    series: dict[str, ErrorSeries] = field(default_factory=dict)
    fits: dict[str, ConvergenceFit | None] = field(default_factory=dict)
    kernel_study: list[dict] = field(default_factory=list)
    out_dir: Path | None = None


def _kernel_study(exp: Experiment) -> list[dict]:
    rows = []
    nf = oracle.near_field_correlation(exp.gain, exp.transfer(exp.focal_mask))
    for mult in exp.config.kernel_study:
        hw = mult * exp.params.omega0
        if hw >= exp.spec.omega_nyquist * (1 + 1e-9):
            log.warning("kernel study: %.1f Omega0 exceeds the temporal Nyquist", mult)
        kern = oracle.gamma_bucket_kernel(nf, hw)
        rows.append({"halfwidth_omega0": mult, "fwhm_m": kern.fwhm, "kernel": kern.values})
    return rows


def run(config: ExperimentConfig, out_dir: str | os.PathLike | None = None, write: bool = True) -> ResultBundle:
    """Execute a configured experiment and (optionally) export the bundle."""
    config.validate()
    exp = Experiment(config)
    bundle = ResultBundle(config, exp.oracle_maps())
    bundle.kernel_study = _kernel_study(exp)
    if config.shots >= 2:
        pipe = _Pipeline(exp)
        total = pipe.new_accumulators()
        for key in total:
            bundle.series[key] = ErrorSeries(reference=f"oracle:{key}")
        done = 0
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            for n in epsilon_schedule(config.shots, config.eps_start, config.eps_factor):
                shards = _shards(done, n, config.threads)
                parts = [pipe.new_accumulators() for _ in shards]
                list(pool.map(lambda sa: pipe.process(sa[0][0], sa[0][1], sa[1]), zip(shards, parts)))
                for part in parts:
                    total = {k: total[k].merge(part[k]) for k in total}
                done = n
                for key, acc in total.items():
                    G = acc.finalize().values
                    if G.max() > 0:
                        bundle.series[key].append(n, epsilon(G, bundle.oracles[key]))
                log.info("%d/%d shots", n, config.shots)
        bundle.maps = {k: acc.finalize() for k, acc in total.items()}
        for key, series in bundle.series.items():
            try:
                bundle.fits[key] = fit_convergence(series)
            except FitError as err:
                log.warning("fit for %s failed: %s", key, err)
                bundle.fits[key] = None
    if write:
        bundle.out_dir = Path(out_dir or os.environ.get("GHOSTSIM_OUT") or config.out)
        export(bundle, exp)
    return bundle


def export(bundle: ResultBundle, exp: Experiment) -> None:
    out = bundle.out_dir
    out.mkdir(parents=True, exist_ok=True)
    bundle.config.save(out / "config.ini")
    summary = {"name": bundle.config.name, "maps": {}, "kernel_study": []}
    for key, ref in bundle.oracles.items():
        dy, dx = exp.map_steps(key)
        io.write_grid(out / f"{key}.oracle.gimg", ref, dx, dy)
        io.write_preview(out / f"{key}.oracle.pgm", ref)
        entry = {"oracle": f"{key}.oracle.gimg"}
        if key in bundle.maps:
            G = bundle.maps[key]
            io.write_grid(out / f"{key}.gimg", G.values, dx, dy)
            io.write_grid(out / f"{key}.rescaled.gimg", G.rescaled, dx, dy)
            io.write_preview(out / f"{key}.pgm", G.values)
            s = bundle.series[key]
            io.write_series_csv(out / f"{key}.epsilon.csv", s.n, s.eps)
            fit = bundle.fits.get(key)
            entry.update(
                shots=G.n,
                map=f"{key}.gimg",
                epsilon_final=s.eps[-1] if s.eps else None,
                fit=None if fit is None else {"d0": fit.d0, "d1": fit.d1, "residual": fit.residual},
            )
        summary["maps"][key] = entry
    for row in bundle.kernel_study:
        name = f"kernel_{row['halfwidth_omega0']:g}omega0.gimg"
        io.write_grid(out / name, row["kernel"], exp.spec.dx, exp.spec.dy)
        summary["kernel_study"].append(
            {"halfwidth_omega0": row["halfwidth_omega0"], "fwhm_m": row["fwhm_m"], "kernel": name}
        )
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)


def _peaks(values: np.ndarray, count: int = 5):
    flat = np.argsort(values, axis=None)[::-1][:count]
    return [tuple(int(i) for i in np.unravel_index(j, values.shape)) for j in flat]


def diff(path_a, path_b, probes=()) -> dict:
    """Compare two exported maps.

    ``epsilon`` rescales map A onto map B. ``probes`` are ``(iy, ix)`` sites
    (FFT order) at which the ratio of the max-rescaled maps is reported.
    """
    a = io.read_grid(path_a).values
    b = io.read_grid(path_b).values
    ra = a / a.max()
    rb = b / b.max()
    report = {
        "epsilon": epsilon(a, b),
        "peak_ratio": float(a.max() / b.max()),
        "peaks_a": _peaks(a),
        "peaks_b": _peaks(b),
        "probes": [],
    }
    for iy, ix in probes:
        va, vb = float(ra[iy, ix]), float(rb[iy, ix])
        report["probes"].append(
            {"site": [int(iy), int(ix)], "a": va, "b": vb, "ratio": va / vb if vb else float("inf")}
        )
    return report
