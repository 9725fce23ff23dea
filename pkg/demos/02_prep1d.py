"""Build a 1D Gaussian one qubit at a time, then quantize the angles.

Run: python demos/02_prep1d.py
"""

import math

from gaussprep import GaussianParams, PrepConfig, fidelity, gate_count_report, periodized_oracle, prepare_xi
from gaussprep.statevec import StateVector, distance

params = GaussianParams(16.0, 128.0)
n = 8

exact, trace = prepare_xi(PrepConfig(params, n))
oracle = StateVector(periodized_oracle(params, n), exact.layout)
print(f"exact recursion vs brute force: fidelity = {fidelity(exact, oracle):.15f}")
print(f"trace holds {len(trace.records)} rotations over {n} levels")
for r in trace.level(0) + trace.level(1):
    print(f"  level {r.level} path {r.path}: sigma={r.sigma:g} mu={r.mu:g} alpha={r.alpha:.6f}")

# Each angle kept to k bits costs at most pi/2^k per level.
print("\n k   distance     bound pi N 2^-k")
for k in (6, 8, 10, 12, 14):
    q, _ = prepare_xi(PrepConfig(params, n, angle_bits=k))
    print(f"{k:2d}   {distance(exact, q):.3e}    {math.pi * n * 2.0**-k:.3e}")

_, qtrace = prepare_xi(PrepConfig(params, n, angle_bits=10))
rep = gate_count_report(qtrace, delta_target=1e-4)
print(f"\nfor distance 1e-4 use k = {rep['k_needed']}; k=10 uses {rep['standard_rotations']} standard rotations")
