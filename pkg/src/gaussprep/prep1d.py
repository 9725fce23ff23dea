"""Lowest-bit-first preparation of periodized Gaussian states.

At every level the lowest undecided qubit is rotated by the angle that
splits the remaining lattice mass between even and odd points; the rest of
the register then holds a Gaussian of half the width on the selected
sub-lattice.  The simulation walks the binary tree of paths level by level,
so the cost is one angle per tree node and one multiply per amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .statevec import Register, StateVector, apply_rotation, check_size
from .theta import DEFAULT_EPS, GaussianParams, angle_from_logs, log_theta

#: Per-rotation error of nearest rounding is at most pi / 2**k, and rotation
#: errors add up along the N levels, so ||exact - quantized|| <= pi * N * 2**-k.
ROUNDING_CONSTANT = {"nearest": math.pi, "truncate": 2 * math.pi}


@dataclass(frozen=True)
class PrepConfig:
    params: GaussianParams
    n_qubits: int
    angle_bits: int | None = None  # None means exact angles
    rounding: str = "nearest"
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be at least 1")
        if self.angle_bits is not None and self.angle_bits < 1:
            raise ValueError("angle_bits must be at least 1")
        if self.rounding not in ROUNDING_CONSTANT:
            raise ValueError(f"rounding must be one of {sorted(ROUNDING_CONSTANT)}")

    @property
    def mode(self):
        return "exact" if self.angle_bits is None else "quantized"


@dataclass(frozen=True)
class QuantizedAngle:
    bits: tuple
    realized_angle: float

    @property
    def k(self):
        return len(self.bits)

    def standard_rotations(self):
        """Angles of the standard rotations R(pi / 2**(i-1)) selected by the bits."""
        return [math.pi / 2 ** (i - 1) for i, a in enumerate(self.bits, start=1) if a]


def quantize_angle(alpha: float, k: int, rounding: str = "nearest") -> QuantizedAngle:
    """Round alpha / 2pi to ``k`` binary digits a_1 .. a_k (a_1 weighs 1/2)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    scaled = alpha / (2 * math.pi) * 2**k
    m = math.floor(scaled + 0.5) if rounding == "nearest" else math.floor(scaled)
    m %= 2**k
    bits = tuple((m >> (k - i)) & 1 for i in range(1, k + 1))
    return QuantizedAngle(bits, 2 * math.pi * m / 2**k)


@dataclass(frozen=True)
class TraceRecord:
    level: int
    path: tuple
    sigma: float
    mu: float
    alpha: float
    bits: tuple | None = None
    realized: float | None = None

    @property
    def applied_angle(self):
        return self.alpha if self.realized is None else self.realized


@dataclass
class CircuitTrace:
    n_qubits: int
    mode: str
    angle_bits: int | None
    records: list = field(default_factory=list)
    rounding: str = "nearest"
    warnings: list = field(default_factory=list)

    def level(self, i):
        return [r for r in self.records if r.level == i]

    def level_errors(self):
        """Largest |alpha - realized| at each level (zeros in exact mode)."""
        worst = [0.0] * self.n_qubits
        for r in self.records:
            if r.realized is not None:
                worst[r.level] = max(worst[r.level], abs(r.alpha - r.realized))
        return worst

    @property
    def summary(self):
        k = self.angle_bits
        return {
            "levels": self.n_qubits,
            "records": len(self.records),
            "standard_rotations": None if k is None else self.n_qubits * k,
            "max_active_rotations": None
            if k is None
            else sum(max((sum(r.bits) for r in self.level(i)), default=0) for i in range(self.n_qubits)),
            "angle_register_bits": k,
        }

    def write(self, path, header=None):
        with open(path, "w") as fh:
            for key, val in (header or {}).items():
                fh.write(f"# {key}={val}\n")
            fh.write(f"# N={self.n_qubits} mode={self.mode} k={self.angle_bits or '-'} rounding={self.rounding}\n")
            for r in self.records:
                path_s = "".join(map(str, r.path)) or "*"
                bits_s = "".join(map(str, r.bits)) if r.bits is not None else "-"
                fh.write(
                    f"LEVEL {r.level} PATH {path_s} SIGMA {r.sigma!r} MU {r.mu!r} "
                    f"ALPHA {r.alpha!r} BITS {bits_s}\n"
                )

    @classmethod
    def read(cls, path):
        records, meta = [], {}
        with open(path) as fh:
            for line in fh:
                if line.startswith("#"):
                    for tok in line[1:].split():
                        if "=" in tok:
                            key, val = tok.split("=", 1)
                            meta[key] = val
                    continue
                f = line.split()
                if not f:
                    continue
                fields = dict(zip(f[::2], f[1::2]))
                path_s, bits_s = fields["PATH"], fields["BITS"]
                bits = None if bits_s == "-" else tuple(int(c) for c in bits_s)
                records.append(
                    TraceRecord(
                        level=int(fields["LEVEL"]),
                        path=() if path_s == "*" else tuple(int(c) for c in path_s),
                        sigma=float(fields["SIGMA"]),
                        mu=float(fields["MU"]),
                        alpha=float(fields["ALPHA"]),
                        bits=bits,
                        realized=None if bits is None else _realized_from_bits(bits),
                    )
                )
        k = meta.get("k", "-")
        return cls(
            n_qubits=int(meta["N"]),
            mode=meta.get("mode", "exact"),
            angle_bits=None if k == "-" else int(k),
            records=records,
            rounding=meta.get("rounding", "nearest"),
        )


def _realized_from_bits(bits):
    m = 0
    for a in bits:
        m = 2 * m + a
    return 2 * math.pi * m / 2 ** len(bits)


def quality_warnings(params: GaussianParams, n_qubits: int, margin: float = 3.0):
    out = []
    if params.sigma < 1:
        out.append(f"sigma={params.sigma} is below one grid spacing")
    lo, hi = params.mu, 2**n_qubits - params.mu
    if min(lo, hi) < margin * params.sigma:
        out.append(
            f"mu={params.mu} lies within {margin} sigma of the register edge; "
            "the state wraps around (periodized)"
        )
    return out


def _level_angles(sigma, mus, eps):
    """Angles for every node of one tree level (all nodes share sigma)."""
    alphas = np.empty(mus.size)
    for j, mu in enumerate(mus):
        mu = float(mu)
        alphas[j] = angle_from_logs(log_theta(sigma / 2, mu / 2, eps), log_theta(sigma / 2, (mu - 1) / 2, eps))
    return alphas


def prepare_xi(config: PrepConfig):
    """Build the periodized Gaussian on ``config.n_qubits`` qubits.

    Returns ``(state, trace)``.  In quantized mode every branch rotation uses
    its k-bit angle; the branch parameters still follow the path bits.
    """
    n = config.n_qubits
    check_size(n)
    sigma = config.params.sigma
    amps = np.ones(1)
    mus = np.array([float(config.params.mu)])
    trace = CircuitTrace(n, config.mode, config.angle_bits, rounding=config.rounding)
    trace.warnings.extend(quality_warnings(config.params, n))
    for level in range(n):
        alphas = _level_angles(sigma, mus, config.eps)
        applied = alphas
        quantized = None
        if config.angle_bits is not None:
            quantized = [quantize_angle(a, config.angle_bits, config.rounding) for a in alphas]
            applied = np.array([q.realized_angle for q in quantized])
        for p in range(mus.size):
            trace.records.append(
                TraceRecord(
                    level=level,
                    path=tuple((p >> j) & 1 for j in range(level)),
                    sigma=sigma,
                    mu=float(mus[p]),
                    alpha=float(alphas[p]),
                    bits=None if quantized is None else quantized[p].bits,
                    realized=None if quantized is None else quantized[p].realized_angle,
                )
            )
        # path p gets bit `level`; bit 0 keeps index p, bit 1 moves to p + 2**level
        # math.cos/sin, not numpy's, so trace replay through apply_rotation is bit-identical
        cos = np.array([math.cos(a) for a in applied])
        sin = np.array([math.sin(a) for a in applied])
        amps = np.concatenate([amps * cos, amps * sin])
        mus = np.concatenate([mus / 2, (mus - 1) / 2])
        sigma = sigma / 2
    return StateVector(amps.astype(complex), (Register("x", n),)), trace


def prepare_xi_quantized(config: PrepConfig):
    if config.angle_bits is None:
        raise ValueError("prepare_xi_quantized needs angle_bits")
    return prepare_xi(config)


def replay_trace(trace: CircuitTrace) -> StateVector:
    """Rebuild the state by applying each record as a path-controlled rotation."""
    n = trace.n_qubits
    state = StateVector.basis(0, (Register("x", n),))
    for r in sorted(trace.records, key=lambda r: r.level):
        controls = {j: b for j, b in enumerate(r.path)}
        state = apply_rotation(state, r.level, r.applied_angle, controls)
    return state


def gate_count_report(trace: CircuitTrace, delta_target: float, param_bits: int = 64) -> dict:
    """Rotation count, angle precision needed for a target error, and memory budget.

    ``param_bits`` is the fixed-point width assumed for each stored sigma_i
    and mu_i and for the working value of alpha.
    """
    if not delta_target > 0:
        raise ValueError("delta_target must be positive")
    n = trace.n_qubits
    c = ROUNDING_CONSTANT[trace.rounding]
    k_needed = max(1, math.ceil(math.log2(c * n / delta_target)))
    k = trace.angle_bits
    report = {
        "n_qubits": n,
        "mode": trace.mode,
        "angle_bits": k,
        "rounding": trace.rounding,
        "error_constant": c,
        "standard_rotations": None if k is None else n * k,
        "rotation_bound": None if k is None else n * k,
        "predicted_delta": None if k is None else c * n * 2.0**-k,
        "delta_target": delta_target,
        "k_needed": k_needed,
        "rotations_for_target": n * k_needed,
        "memory_bits": {
            "stored_pairs": 2 * param_bits * n,
            "alpha_working": param_bits + (k if k is not None else k_needed),
            "param_bits": param_bits,
        },
    }
    report["memory_bits"]["total"] = report["memory_bits"]["stored_pairs"] + report["memory_bits"]["alpha_working"]
    return report
