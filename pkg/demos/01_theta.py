"""The normalization sum f(sigma, mu) and the angle it feeds.

Run: python demos/01_theta.py
"""

import math

from gaussprep import GaussianParams, recursion_angle, theta, theta_direct, theta_poisson

# Narrow Gaussians: the lattice sum is dominated by a few terms.
for sigma, mu in [(0.3, 0.7), (0.5, 0.0), (0.8, 0.25)]:
    t = theta(GaussianParams(sigma, mu))
    print(f"f({sigma}, {mu}) = {t.value:.12f}  via {t.branch} with {t.terms} terms")

# Wide Gaussians: the sum is sigma*sqrt(pi) up to exponentially small corrections.
for sigma in (1.5, 3.0, 10.0):
    t = theta(GaussianParams(sigma, 0.3))
    print(f"f({sigma}, 0.3) / (sigma sqrt(pi)) - 1 = {t.value / (sigma * math.sqrt(math.pi)) - 1:.3e}")

# Near the switch both evaluators are usable; they agree to rounding.
p = GaussianParams(1.0, 0.4)
print("direct vs poisson at sigma=1:", theta_direct(p).value, theta_poisson(p).value)

# The first rotation angle sends cos^2 of the mass to even sites.
for sigma in (0.1, 1.0, 100.0):
    a = recursion_angle(GaussianParams(sigma, 0.0))
    print(f"sigma={sigma:>6}: alpha = {a:.6f}  (pi/4 = {math.pi / 4:.6f})")
