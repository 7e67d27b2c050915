"""Convergence of the error eps(n) and the fitted (d0 n)^-1/2 + d1 model.

Uses a Gaussian pump whose waist makes the predicted spatial-average
speedup about 10.
"""

import argparse
from dataclasses import replace

from ghostsim import compute_gain, oracle, preset, run
from ghostsim.metrics import speedup_estimate

ap = argparse.ArgumentParser()
ap.add_argument("--shots", type=int, default=5000)
ap.add_argument("--seed", type=int, default=1)
args = ap.parse_args()

base = preset("fig3")
lattice = replace(base.lattice, Nt=1, dt=1.0)
bw = oracle.bandwidth_pdc(compute_gain(base.source, lattice))
source = replace(base.source, model="gaussian_pump", w0=20 / bw, Nz=40)
cfg = base.with_overrides(source=source, lattice=lattice, shots=args.shots, seed=args.seed)
print(f"w0 = {source.w0 * 1e6:.0f} um, predicted speedup {speedup_estimate(source, compute_gain(source, lattice)):.1f}")

bundle = run(cfg, write=False)
for key, series in bundle.series.items():
    fit = bundle.fits[key]
    print(f"{key}:")
    for n, e in list(zip(series.n, series.eps))[::3]:
        print(f"  n={n:6d}  eps={e:.4f}  model={fit(n):.4f}" if fit else f"  n={n:6d}  eps={e:.4f}")
    if fit:
        print(f"  d0={fit.d0:.4g} d1={fit.d1:.4g}")
fits = bundle.fits
if all(fits.values()):
    print(f"d0 ratio SA/fixed = {fits['ff_spatial_average'].d0 / fits['ff_fixed_x1'].d0:.2f}")
