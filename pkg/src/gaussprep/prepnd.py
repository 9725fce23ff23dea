"""Multidimensional Gaussians from a diagonal product state and integer shears.

A positive definite A is written as A = M^-T D M^-1 with M unit upper
triangular.  The product of 1D Gaussians with variances 1/d_i is prepared
first; then M is applied to the basis labels one elementary shear at a
time, each shear adding floor(alpha * n_j) to coordinate n_i.  Flooring per
elementary shear keeps the label map a bijection, so the whole step is a
basis permutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .prep1d import PrepConfig, prepare_xi
from .statevec import (
    Register,
    SignedCodec,
    StateVector,
    check_size,
    fidelity,
    grid_coords,
    permute_basis,
    tensor,
)
from .theta import DEFAULT_EPS, GaussianParams

ORACLE_BUDGET = 2**22


class NotPositiveDefinite(ValueError):
    def __init__(self, pivot_index, pivot):
        super().__init__(f"pivot {pivot_index} is {pivot!r}; matrix is not positive definite")
        self.pivot_index = pivot_index
        self.pivot = pivot


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if not np.allclose(A, A.T, rtol=1e-12, atol=1e-14 * max(1.0, np.abs(A).max())):
            raise ValueError("A is not symmetric")
        A = (A + A.T) / 2
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @property
    def S(self):
        return self.A.shape[0]

    @classmethod
    def from_file(cls, path):
        """Plain text: first line S, then S rows of S floats."""
        with open(path) as fh:
            lines = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines:
            raise ValueError(f"{path}: empty matrix file")
        S = int(lines[0][0])
        rows = lines[1 : 1 + S]
        if len(rows) != S or any(len(r) != S for r in rows):
            raise ValueError(f"{path}: expected {S} rows of {S} numbers")
        return cls(np.array(rows, dtype=float))


@dataclass(frozen=True)
class ShearFactor:
    """Unit matrix plus ``value`` at (row, col), row < col."""

    row: int
    col: int
    value: float

    def __post_init__(self):
        if not self.row < self.col:
            raise ValueError("shear factors sit strictly above the diagonal")

    def matrix(self, S):
        E = np.eye(S)
        E[self.row, self.col] = self.value
        return E


@dataclass(frozen=True, eq=False)
class UdutDecomposition:
    factors: tuple
    D: np.ndarray
    S: int

    def M(self):
        """Ordered product of the factors."""
        out = np.eye(self.S)
        for f in self.factors:
            out = out @ f.matrix(self.S)
        return out

    def reconstruct(self):
        Minv = np.linalg.inv(self.M())
        return Minv.T @ np.diag(self.D) @ Minv

    def residual(self, A):
        M = self.M()
        return float(np.abs(M.T @ A @ M - np.diag(self.D)).max())


def decompose(form: QuadraticForm) -> UdutDecomposition:
    """Congruence M^T A M = D by symmetric elimination, left to right.

    Eliminating column j adds -W[j, l] / W[j, j] times column (and row) j to
    every later column l.  The accumulated M is unit upper triangular; its
    entries are then emitted column by column, rightmost column first, since
    that ordered product of elementary shears reproduces M entry for entry.
    """
    S = form.S
    W = np.array(form.A)
    M = np.eye(S)
    for j in range(S):
        pivot = W[j, j]
        if not pivot > 0:
            raise NotPositiveDefinite(j, float(pivot))
        for l in range(j + 1, S):
            c = -W[j, l] / pivot
            if c == 0.0:
                continue
            W[:, l] += c * W[:, j]
            W[l, :] += c * W[j, :]
            M[:, l] += c * M[:, j]
    D = np.diag(W).copy()
    factors = tuple(
        ShearFactor(i, col, float(M[i, col])) for col in range(S - 1, 0, -1) for i in range(col) if M[i, col] != 0.0
    )
    return UdutDecomposition(factors, D, S)


def _layout_shape(state: StateVector):
    widths = {r.width for r in state.layout}
    if len(widths) != 1:
        raise ValueError("all coordinate registers must have the same width")
    return len(state.layout), widths.pop()


def _round(values, rounding):
    if rounding == "floor":
        return np.floor(values)
    if rounding == "nearest":
        return np.floor(values + 0.5)
    raise ValueError(f"unknown rounding {rounding!r}")


def shear_map(coords, factor: ShearFactor, codec: SignedCodec, inverse=False, rounding="floor"):
    """New signed coordinates after one floored shear (wrap-around in B)."""
    out = np.array(coords)
    delta = _round(factor.value * coords[:, factor.col], rounding).astype(np.int64)
    out[:, factor.row] = codec.wrap(coords[:, factor.row] + (-delta if inverse else delta))
    return out


def _coords_to_index(coords, codec):
    index = np.zeros(coords.shape[0], dtype=np.int64)
    for r in range(coords.shape[1]):
        index = (index << codec.k) | np.mod(coords[:, r], 2**codec.k)
    return index


def apply_elementary_shear(
    state: StateVector, factor: ShearFactor, codec: SignedCodec | None = None, inverse=False, rounding="floor"
) -> StateVector:
    """Permute basis states by n_row <- n_row + floor(value * n_col).

    The inverse subtracts the same floor term (floor(-a n) is not -floor(a n)).
    """
    S, k = _layout_shape(state)
    codec = codec or SignedCodec(k)
    if codec.k != k:
        raise ValueError("codec width does not match the registers")
    coords = grid_coords(S, codec)
    moved = shear_map(coords, factor, codec, inverse, rounding)
    return permute_basis(state, _coords_to_index(moved, codec))


def shift_mean(state: StateVector, mean, codec: SignedCodec | None = None) -> StateVector:
    """Modular addition of an integer vector to the coordinates."""
    S, k = _layout_shape(state)
    codec = codec or SignedCodec(k)
    mean = np.asarray(mean, dtype=np.int64)
    if mean.shape != (S,):
        raise ValueError(f"mean needs {S} components")
    coords = grid_coords(S, codec)
    return permute_basis(state, _coords_to_index(codec.wrap(coords + mean), codec))


def coordinate_layout(S, k):
    return tuple(Register(f"x{i + 1}", k) for i in range(S))


def prepare_diagonal(D, k: int, eps: float = DEFAULT_EPS) -> StateVector:
    """Product of centred 1D Gaussians exp(-d_i n**2 / 2) on k-qubit registers.

    The 1D states are periodic mod 2**k, so read in two's complement they are
    centred at zero on the signed range.
    """
    D = np.asarray(D, dtype=float)
    if np.any(D <= 0):
        raise ValueError("diagonal entries must be positive")
    check_size(len(D) * k)
    state = None
    for i, d in enumerate(D):
        one, _ = prepare_xi(PrepConfig(GaussianParams(1 / math.sqrt(d), 0.0), k, eps=eps))
        one = StateVector(one.amplitudes, (Register(f"x{i + 1}", k),))
        state = one if state is None else tensor(state, one)
    return state


def prepare_general(form: QuadraticForm, k: int, mean=None, rounding="floor", eps=DEFAULT_EPS) -> StateVector:
    dec = decompose(form)
    codec = SignedCodec(k)
    state = prepare_diagonal(dec.D, k, eps)
    # the last factor acts on the labels first
    for f in reversed(dec.factors):
        state = apply_elementary_shear(state, f, codec, rounding=rounding)
    if mean is not None:
        state = shift_mean(state, mean, codec)
    return state


def target_oracle(form: QuadraticForm, k: int, mean=None, budget: int = ORACLE_BUDGET):
    """Brute-force exp(-(x-mu)^T A (x-mu) / 2) over the signed grid.

    Returns ``(state, info)``; ``info`` holds the raw sum of squares and the
    continuum constant 1/C**2 = pi**(S/2) / sqrt(det A) for comparison.
    """
    S = form.S
    if 2 ** (S * k) > budget:
        raise ValueError(f"oracle needs 2**{S * k} amplitudes, above budget {budget}")
    codec = SignedCodec(k)
    x = grid_coords(S, codec).astype(float)
    if mean is not None:
        x = x - np.asarray(mean, dtype=float)
    q = np.einsum("ni,ij,nj->n", x, form.A, x)
    amps = np.exp(-q / 2)
    raw = math.fsum(amps**2)
    info = {
        "sum_sq": raw,
        "continuum_sum_sq": math.pi ** (S / 2) / math.sqrt(np.linalg.det(form.A)),
    }
    return StateVector(amps / math.sqrt(raw), coordinate_layout(S, k)), info


def tail_mass(dec: UdutDecomposition, k: int, eps=DEFAULT_EPS):
    """Mass that leaves the signed range, split into its two sources.

    ``periodization``: mass of each 1D Gaussian outside B before folding.
    ``shear_wrap``: mass of the diagonal state whose exact (unrounded)
    image M n falls outside B, where the modular shear wraps it.
    """
    codec = SignedCodec(k)
    per = 0.0
    for d in dec.D:
        sigma = 1 / math.sqrt(d)
        reach = int(12 * sigma) + 2 ** (k - 1) + 2
        n = np.arange(-reach, reach + 1)
        w = np.exp(-(n**2) / sigma**2)
        inside = (n >= codec.lo) & (n <= codec.hi)
        per += math.fsum(w[~inside]) / math.fsum(w)
    diag = prepare_diagonal(dec.D, k, eps)
    n = grid_coords(dec.S, codec).astype(float)
    image = n @ dec.M().T
    outside = np.any((image < codec.lo - 0.5) | (image > codec.hi + 0.5), axis=1)
    wrap = float(diag.probabilities()[outside].sum())
    return {"periodization": per, "shear_wrap": wrap, "total": per + wrap}


def describe_preparation(form: QuadraticForm, k: int, mean=None, rounding="floor", budget=ORACLE_BUDGET):
    """Everything the prepnd report carries, plus the prepared state."""
    dec = decompose(form)
    state = prepare_general(form, k, mean, rounding)
    A = form.A
    report = {
        "S": form.S,
        "k": k,
        "rounding": rounding,
        "mean": None if mean is None else [int(m) for m in mean],
        "D": [float(d) for d in dec.D],
        "factors": [{"row": f.row, "col": f.col, "value": f.value} for f in dec.factors],
        "M": dec.M().tolist(),
        "congruence_residual": dec.residual(A) / np.abs(A).max(),
        "det_relative_error": abs(float(np.prod(dec.D)) / np.linalg.det(A) - 1),
        "tail_mass": tail_mass(dec, k),
        "fidelity": None,
    }
    if 2 ** (form.S * k) <= budget:
        oracle, info = target_oracle(form, k, mean, budget)
        report["fidelity"] = fidelity(state, oracle)
        report["oracle_sum_sq"] = info["sum_sq"]
        report["continuum_sum_sq"] = info["continuum_sum_sq"]
    return state, report
