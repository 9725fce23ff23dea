"""Stretch a wavefunction onto a coarser grid with two registers and a window.

Run: python demos/04_resample.py
"""

import numpy as np

from gaussprep import GaussianParams, GaussianWindow, ScaleMap, UniformWindow, resample
from gaussprep.resample import band_diagnostic, gaussian_psi, joint_state, shift_add_B

n, sigma, mu = 10, 60.0, 512.0
psi = gaussian_psi(sigma, mu, n)
params = GaussianParams(sigma, mu)

print("  a  window              P(A=0)    fidelity")
for a in (1.0, 1.5, 2.0):
    for spec in (UniformWindow(8), GaussianWindow(6.0), GaussianWindow(16.0)):
        state_B, rep = resample(psi, ScaleMap(a), spec, params)
        print(f"{a:4.1f}  {spec.describe():18s}  {rep.prob_A_zero:.5f}   {rep.fidelity_B_vs_target:.6f}")

# After the first shift the amplitude sits in a band around y = x / a.
scale = ScaleMap(1.5)
for s in (30.0, 60.0, 120.0):
    band = band_diagnostic(shift_add_B(joint_state(gaussian_psi(s, mu, n), UniformWindow(16)), scale), scale)
    print(f"sigma_psi={s:5.0f}: strip gap {band.max_gap:.3f}")

state_B, _ = resample(psi, ScaleMap(1.5), GaussianWindow(6.0), params)
print("B peaks at", int(np.argmax(np.abs(state_B.amplitudes))), "expected near", mu / 1.5)
