"""Command-line entry point: ``ghostsim {run,preset,diff,oracle}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import runner
from .config import PRESETS, ConfigError, ExperimentConfig, preset
from .lattice import ContractError
from .optics import ConfigurationError


def _load(args) -> ExperimentConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        raise ConfigError("a --config file or --preset name is required")
    overrides = {}
    for name in ("shots", "seed", "threads"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return cfg.with_overrides(**overrides) if overrides else cfg


def _add_source_flags(p: argparse.ArgumentParser, shots: bool = True):
    p.add_argument("--config", metavar="PATH", help="experiment INI file")
    p.add_argument("--preset", metavar="NAME", help=f"one of {', '.join(PRESETS)}")
    if shots:
        p.add_argument("--shots", type=int, metavar="N")
        p.add_argument("--seed", type=int, metavar="S")
        p.add_argument("--threads", type=int, metavar="T")
    p.add_argument("--out", metavar="DIR", help="output directory (default: $GHOSTSIM_OUT, then the config's out)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ghostsim", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="run a Monte Carlo experiment")
    _add_source_flags(p)

    p = sub.add_parser("oracle", help="write the semi-analytic reference maps only")
    _add_source_flags(p, shots=False)

    p = sub.add_parser("preset", help="print (or save) a preset configuration")
    p.add_argument("name", nargs="?", help="preset name; omit to list presets")
    p.add_argument("--out", metavar="PATH", help="write the INI here instead of stdout")

    p = sub.add_parser("diff", help="compare two exported .gimg maps")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument(
        "--probe",
        action="append",
        default=[],
        metavar="IY,IX",
        help="site (FFT order) for a rescaled value ratio; repeatable",
    )
    return ap


def _summarise(bundle) -> str:
    lines = [f"{bundle.config.name}: wrote {bundle.out_dir}"]
    for key, m in bundle.maps.items():
        s = bundle.series[key]
        fit = bundle.fits.get(key)
        txt = f"  {key}: n={m.n} eps={s.eps[-1]:.4g}" if s.eps else f"  {key}: n={m.n}"
        if fit is not None:
            txt += f" d0={fit.d0:.4g} d1={fit.d1:.4g}"
        lines.append(txt)
    for row in bundle.kernel_study:
        lines.append(f"  kernel {row['halfwidth_omega0']:g} Omega0: FWHM {row['fwhm_m'] * 1e6:.3f} um")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.verb == "preset":
            if not args.name:
                print("\n".join(PRESETS))
                return 0
            text = preset(args.name).to_ini()
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
            return 0
        if args.verb == "diff":
            probes = [tuple(int(v) for v in p.split(",")) for p in args.probe]
            print(json.dumps(runner.diff(args.a, args.b, probes), indent=2))
            return 0
        cfg = _load(args)
        if args.verb == "oracle":
            cfg = cfg.with_overrides(shots=0)
        bundle = runner.run(cfg, out_dir=args.out)
        print(_summarise(bundle))
        return 0
    except (ConfigError, ConfigurationError, ContractError, OSError) as err:
        print(f"ghostsim: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
