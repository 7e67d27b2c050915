"""Width of the bucket-mode kernel as the interference filter opens up.

Oracle only, for both refocus rules. No Monte Carlo shots are drawn.
"""

from ghostsim import preset, run

for rule in ("compensating", "formula"):
    cfg = preset("fig7").with_overrides(refocus=rule)
    bundle = run(cfg, write=False)
    widths = ", ".join(f"{r['halfwidth_omega0']:g}: {r['fwhm_m'] * 1e6:.1f} um" for r in bundle.kernel_study)
    print(f"{rule:>12} refocus, FWHM by filter half width (Omega0) -> {widths}")
