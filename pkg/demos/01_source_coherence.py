"""Gain of the PDC source and the coherence it leaves in the near field.

Prints the imaging bandwidth and the near-field coherence length for the
default crystal, with and without refocusing the reference arm.
"""

from ghostsim import LatticeSpec, SourceParams, compute_gain, oracle, optics

params = SourceParams()
spec = LatticeSpec(256, 1, 16, dx=2.9e-6, dt=0.375e-12)
gain = compute_gain(params, spec)
print(f"gain g = {params.gain:.2f}, unitarity residual {gain.unitarity_error():.1e}")
print(f"q0 = {params.q0:.4g} 1/m, nominal x_coh = {params.x_coh * 1e6:.1f} um")

for label, hw in [("all frequencies", None), ("central bin only", 0.0)]:
    bw = oracle.bandwidth_pdc(gain, hw)
    print(f"bandwidth ({label}): {bw / params.q0:.2f} q0")

flat = compute_gain(params, LatticeSpec(256, 1, 1, dx=2.9e-6))
for rule in ("compensating", "formula"):
    dz = optics.resolve_delta_z(params, None, rule)
    H = optics.reference_transfer(flat.spec, dz, params.k_free)
    nf = oracle.near_field_correlation(flat, H)
    print(f"refocus {rule:>12}: dz = {dz * 1e3:+.2f} mm, x_coh = {nf.x_coh * 1e6:.1f} um")
bare = oracle.near_field_correlation(flat)
print(f"no refocus: x_coh = {bare.x_coh * 1e6:.1f} um")
