"""Normalization sums for discrete Gaussians.

The central object is

    f(sigma, mu) = sum_n exp(-(n - mu)**2 / sigma**2),

a real slice of the third Jacobi theta function.  Two evaluators are
provided: a direct lattice sum (cheap when sigma is small) and the
Poisson-dual cosine series

    f(sigma, mu) = sigma*sqrt(pi) * sum_k exp(-pi**2 sigma**2 k**2) cos(2 pi k mu),

which is cheap when sigma is large.  Everything is carried in log space
because the preparation recursion halves sigma at every level and the
values underflow quickly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

SIGMA_SWITCH = 1.0
DEFAULT_EPS = 1e-17

_LOG_SQRT_PI = 0.5 * math.log(math.pi)
_CLAMP_ULPS = 4


class NumericalHealthWarning(UserWarning):
    """A ratio of theta values left its admissible range by more than a few ulps."""


@dataclass(frozen=True)
class GaussianParams:
    """Width and centre of a discrete Gaussian, in grid units."""

    sigma: float
    mu: float = 0.0

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma!r}")
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu!r}")

    def child(self, bit: int) -> "GaussianParams":
        """Parameters of the sub-lattice selected by the lowest bit."""
        return GaussianParams(self.sigma / 2, (self.mu - bit) / 2)


@dataclass(frozen=True)
class ThetaValue:
    log_value: float
    branch: str
    terms: int

    @property
    def value(self) -> float:
        return math.exp(self.log_value)


def _check_eps(eps):
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")


def _reduce(mu):
    """Split mu into its nearest integer and the offset in [-1/2, 1/2]."""
    n0 = math.floor(mu + 0.5)
    return n0, mu - n0


def direct_term_bound(sigma, eps):
    return 2 * math.ceil(sigma * math.sqrt(math.log(3 / eps))) + 3


def theta_direct(params: GaussianParams, eps: float = DEFAULT_EPS) -> ThetaValue:
    _check_eps(eps)
    s2 = params.sigma**2
    _, d0 = _reduce(params.mu)
    half = math.ceil(params.sigma * math.sqrt(math.log(3 / eps))) + 1
    # exponents are taken relative to the dominant term, so the largest is 0
    offs = np.arange(-half, half + 1, dtype=float) - d0
    rel = -(offs * offs - d0 * d0) / s2
    total = math.fsum(np.exp(rel))
    return ThetaValue(-d0 * d0 / s2 + math.log(total), "direct", offs.size)


def theta_poisson(params: GaussianParams, eps: float = DEFAULT_EPS) -> ThetaValue:
    _check_eps(eps)
    sigma = params.sigma
    _, frac = _reduce(params.mu)
    a = (math.pi * sigma) ** 2
    parts = [1.0]
    k = 1
    while True:
        weight = math.exp(-a * k * k)
        # stop test uses the envelope, never the cosine, so nodes of cos cannot end the sum early
        if k >= 3 and 2 * weight < eps * abs(math.fsum(parts)):
            break
        parts.append(2 * weight * math.cos(2 * math.pi * k * frac))
        k += 1
        if weight == 0.0:
            break
    total = math.fsum(parts)
    if total <= 0:
        # only reachable far outside the intended regime
        return theta_direct(params, eps)
    return ThetaValue(math.log(sigma) + _LOG_SQRT_PI + math.log(total), "poisson", len(parts))


def theta(params: GaussianParams, eps: float = DEFAULT_EPS) -> ThetaValue:
    if params.sigma <= SIGMA_SWITCH:
        return theta_direct(params, eps)
    return theta_poisson(params, eps)


def log_theta(sigma, mu, eps=DEFAULT_EPS):
    return theta(GaussianParams(sigma, mu), eps).log_value


def branch_logs(params: GaussianParams, eps: float = DEFAULT_EPS):
    """Log masses of the even and odd sub-lattices, and of the whole lattice."""
    log_even = theta(params.child(0), eps).log_value
    log_odd = theta(params.child(1), eps).log_value
    log_total = theta(params, eps).log_value
    return log_even, log_odd, log_total


def angle_from_logs(log_even, log_odd):
    """atan2(sqrt(odd), sqrt(even)) without leaving log space."""
    d = 0.5 * (log_odd - log_even)
    if d <= 0:
        return math.atan(math.exp(d))
    return 0.5 * math.pi - math.atan(math.exp(-d))


def recursion_angle(params: GaussianParams, eps: float = DEFAULT_EPS) -> float:
    """Rotation angle that splits the lattice mass between even and odd points.

    Returns alpha in [0, pi/2] with cos(alpha)**2 equal to the even fraction
    f(sigma/2, mu/2) / f(sigma, mu).
    """
    log_even, log_odd, log_total = branch_logs(params, eps)
    r = math.exp(log_even - log_total)
    if r > 1 + _CLAMP_ULPS * np.finfo(float).eps:
        warnings.warn(
            f"even-branch ratio {r!r} exceeds 1 at sigma={params.sigma}, mu={params.mu}",
            NumericalHealthWarning,
            stacklevel=2,
        )
    return angle_from_logs(log_even, log_odd)


def periodized_oracle(params: GaussianParams, n_qubits: int, cutoff: float = 10.0) -> np.ndarray:
    """Brute-force periodized Gaussian on ``n_qubits`` qubits.

    Every lattice point whose weight exceeds exp(-cutoff**2) relative to the
    peak is summed explicitly and folded modulo 2**n_qubits.  The
    normalization comes from the same brute-force sum, so the result does not
    depend on either theta evaluator.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be at least 1")
    sigma, mu = params.sigma, params.mu
    reach = cutoff * sigma + 2
    n = np.arange(math.floor(mu - reach), math.ceil(mu + reach) + 1)
    expo = -((n - mu) ** 2) / sigma**2
    w = np.exp(expo - expo.max())
    w /= math.fsum(w)
    mass = np.bincount(np.mod(n, 2**n_qubits), weights=w, minlength=2**n_qubits)
    return np.sqrt(mass)
