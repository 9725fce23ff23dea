"""Dense state vectors over named registers.

Basis ordering: the first register in the layout is the most significant
block of the index, and inside each register bit 0 is the least
significant.  Global qubit numbers count from the least significant bit of
the whole index, so qubit 0 is bit 0 of the last register.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple, Sequence

import numpy as np

NORM_TOL = 1e-12

_memory_cap = 2**26


class MemoryCapError(RuntimeError):
    pass


class NonBijectiveError(ValueError):
    pass


def memory_cap() -> int:
    return _memory_cap


def set_memory_cap(n_amplitudes: int) -> int:
    """Set the largest state size any constructor may allocate; returns the old cap."""
    global _memory_cap
    old, _memory_cap = _memory_cap, int(n_amplitudes)
    return old


def check_size(n_qubits):
    if 2**n_qubits > _memory_cap:
        raise MemoryCapError(
            f"{n_qubits} qubits need 2**{n_qubits} amplitudes, above the cap of {_memory_cap}"
        )


@dataclass(frozen=True)
class Register:
    name: str
    width: int


@dataclass(frozen=True)
class SignedCodec:
    """Two's complement coordinates on ``k`` bits."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")

    @property
    def lo(self):
        return -(2 ** (self.k - 1))

    @property
    def hi(self):
        return 2 ** (self.k - 1) - 1

    def encode(self, s):
        s_arr = np.asarray(s)
        if np.any((s_arr < self.lo) | (s_arr > self.hi)):
            raise ValueError(f"coordinate outside [{self.lo}, {self.hi}]")
        out = np.mod(s_arr, 2**self.k)
        return int(out) if out.ndim == 0 else out

    def decode(self, u):
        u_arr = np.asarray(u)
        if np.any((u_arr < 0) | (u_arr >= 2**self.k)):
            raise ValueError(f"word outside [0, {2**self.k})")
        out = np.where(u_arr >= 2 ** (self.k - 1), u_arr - 2**self.k, u_arr)
        return int(out) if out.ndim == 0 else out

    def wrap(self, s):
        """Reduce arbitrary integers into the signed range."""
        return np.mod(np.asarray(s) - self.lo, 2**self.k) + self.lo


def basis_index(coords: Sequence[int], codec: SignedCodec) -> int:
    """Concatenate the k-bit words of ``coords``, first coordinate most significant.

    Coordinates may be given signed (in B) or as raw unsigned words; both
    views of the same bit pattern give the same index.
    """
    index = 0
    for c in coords:
        c = int(c)
        if not codec.lo <= c < 2**codec.k:
            raise ValueError(f"coordinate {c} outside [{codec.lo}, {codec.hi}]")
        index = (index << codec.k) | (c % 2**codec.k)
    return index


def index_coords(index, n_coords: int, codec: SignedCodec):
    """Inverse of :func:`basis_index`; works elementwise on integer arrays."""
    index = np.asarray(index)
    mask = 2**codec.k - 1
    out = [codec.decode((index >> (codec.k * (n_coords - 1 - r))) & mask) for r in range(n_coords)]
    if index.ndim == 0:
        return tuple(int(c) for c in out)
    return np.stack(out, axis=-1)


def grid_coords(n_coords: int, codec: SignedCodec) -> np.ndarray:
    """Signed coordinates of every basis state, shape (2**(S*k), S)."""
    return index_coords(np.arange(2 ** (n_coords * codec.k)), n_coords, codec)


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    layout: tuple = field(default=())

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        layout = tuple(self.layout) or (Register("q", int(round(math.log2(amps.size)))),)
        layout = tuple(r if isinstance(r, Register) else Register(*r) for r in layout)
        n = sum(r.width for r in layout)
        if len({r.name for r in layout}) != len(layout):
            raise ValueError("register names must be unique")
        check_size(n)
        if amps.shape != (2**n,):
            raise ValueError(f"expected {2**n} amplitudes for layout {layout}, got shape {amps.shape}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1) > NORM_TOL:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm2!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "layout", layout)

    @classmethod
    def from_unnormalized(cls, amps, layout=()):
        amps = np.asarray(amps, dtype=complex)
        return cls(amps / np.linalg.norm(amps), layout)

    @classmethod
    def basis(cls, index, layout):
        layout = tuple(r if isinstance(r, Register) else Register(*r) for r in layout)
        n = sum(r.width for r in layout)
        check_size(n)
        amps = np.zeros(2**n, dtype=complex)
        amps[index] = 1
        return cls(amps, layout)

    @property
    def n_qubits(self):
        return sum(r.width for r in self.layout)

    @property
    def register_names(self):
        return [r.name for r in self.layout]

    def register(self, name) -> Register:
        for r in self.layout:
            if r.name == name:
                return r
        raise KeyError(name)

    def offset(self, name):
        """Global qubit number of bit 0 of the named register."""
        total = 0
        for r in reversed(self.layout):
            if r.name == name:
                return total
            total += r.width
        raise KeyError(name)

    def qubit(self, name, bit):
        return self.offset(name) + bit

    def tensor_view(self):
        return self.amplitudes.reshape([2**r.width for r in self.layout])

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def with_amplitudes(self, amps):
        return StateVector(amps, self.layout)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    check_size(a.n_qubits + b.n_qubits)
    return StateVector(np.kron(a.amplitudes, b.amplitudes), a.layout + b.layout)


def _same_width(a, b):
    if a.amplitudes.size != b.amplitudes.size:
        raise ValueError(f"width mismatch: {a.n_qubits} vs {b.n_qubits} qubits")


def fidelity(a: StateVector, b: StateVector) -> float:
    _same_width(a, b)
    return min(1.0, float(abs(np.vdot(a.amplitudes, b.amplitudes))))


def distance(a: StateVector, b: StateVector) -> float:
    """Euclidean norm of the amplitude difference (phase sensitive)."""
    _same_width(a, b)
    return float(np.linalg.norm(a.amplitudes - b.amplitudes))


class Projection(NamedTuple):
    probability: float
    state: StateVector | None

    @property
    def empty(self):
        return self.state is None


def project_subregister(state: StateVector, name: str, value: int) -> Projection:
    """Condition on one register holding ``value`` (an unsigned word).

    A zero-probability slice comes back as ``Projection(0.0, None)``.
    """
    reg = state.register(name)
    if not 0 <= value < 2**reg.width:
        raise ValueError(f"value {value} does not fit register {name!r} of width {reg.width}")
    axis = state.register_names.index(name)
    sliced = np.take(state.tensor_view(), value, axis=axis).ravel()
    prob = float(np.vdot(sliced, sliced).real)
    if prob == 0.0:
        return Projection(0.0, None)
    rest = tuple(r for r in state.layout if r.name != name)
    if not rest:
        rest = (Register("_", 0),)
    return Projection(prob, StateVector(sliced / math.sqrt(prob), rest))


def _control_mask(indices, controls, n_qubits):
    if controls is None:
        return np.ones(indices.shape, dtype=bool)
    if callable(controls):
        return np.asarray(controls(indices), dtype=bool)
    mask = np.ones(indices.shape, dtype=bool)
    for q, bit in controls.items():
        if not 0 <= q < n_qubits:
            raise ValueError(f"control qubit {q} outside width {n_qubits}")
        mask &= ((indices >> q) & 1) == bit
    return mask


def apply_rotation(
    state: StateVector,
    target: int,
    angle: float,
    controls: Mapping[int, int] | Callable[[np.ndarray], np.ndarray] | None = None,
) -> StateVector:
    """Apply [[cos, -sin], [sin, cos]] to ``target`` where the controls hold.

    ``controls`` is either a mapping ``{qubit: required bit}`` or a callable
    that receives the basis indices with the target bit cleared and returns a
    boolean mask.
    """
    n = state.n_qubits
    if not 0 <= target < n:
        raise ValueError(f"target qubit {target} outside width {n}")
    if isinstance(controls, Mapping) and target in controls:
        raise ValueError("target qubit cannot also be a control")
    amps = np.array(state.amplitudes)
    idx = np.arange(amps.size)
    lo = idx[((idx >> target) & 1) == 0]
    lo = lo[_control_mask(lo, controls, n)]
    hi = lo | (1 << target)
    c, s = math.cos(angle), math.sin(angle)
    a0, a1 = amps[lo], amps[hi]
    amps[lo] = c * a0 - s * a1
    amps[hi] = s * a0 + c * a1
    return state.with_amplitudes(amps)


def permute_basis(state: StateVector, mapping) -> StateVector:
    """Move the amplitude at index ``i`` to index ``mapping[i]``.

    Raises :class:`NonBijectiveError` if two indices land on the same target.
    """
    mapping = np.asarray(mapping)
    size = state.amplitudes.size
    if mapping.shape != (size,):
        raise ValueError(f"mapping must have shape ({size},), got {mapping.shape}")
    if mapping.min() < 0 or mapping.max() >= size:
        raise NonBijectiveError("mapping leaves the index range")
    hits = np.bincount(mapping, minlength=size)
    if np.any(hits != 1):
        target = int(np.flatnonzero(hits > 1)[0])
        sources = np.flatnonzero(mapping == target)[:8].tolist()
        raise NonBijectiveError(f"indices {sources} all map to {target}")
    out = np.empty_like(state.amplitudes)
    out[mapping] = state.amplitudes
    return state.with_amplitudes(out)


def write_state_csv(path, state: StateVector, header: Mapping[str, object] = (), signed=True, min_abs2=0.0):
    """Dump amplitudes as CSV: index, one coordinate per register, re, im, abs2.

    Coordinates are two's complement when ``signed`` is true.  ``header``
    entries become leading ``# key=value`` comment lines.
    """
    view_idx = np.arange(state.amplitudes.size)
    coords = []
    shift = state.n_qubits
    for r in state.layout:
        shift -= r.width
        word = (view_idx >> shift) & (2**r.width - 1)
        if signed and r.width > 0:
            word = SignedCodec(r.width).decode(word)
        coords.append(word)
    abs2 = state.probabilities()
    with open(path, "w", newline="") as fh:
        for key, val in dict(header).items():
            fh.write(f"# {key}={val}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index"] + [f"coord_{i + 1}" for i in range(len(state.layout))] + ["re", "im", "abs2"])
        amps = state.amplitudes
        for i in np.flatnonzero(abs2 >= min_abs2):
            w.writerow(
                [int(i)]
                + [int(c[i]) for c in coords]
                + [repr(float(amps[i].real)), repr(float(amps[i].imag)), repr(float(abs2[i]))]
            )


def read_state_csv(path, layout=None) -> StateVector:
    """Read a state written by :func:`write_state_csv` (missing rows are zero)."""
    rows = []
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    for row in reader:
        rows.append((int(row["index"]), complex(float(row["re"]), float(row["im"]))))
    if not rows:
        raise ValueError(f"{path}: no amplitudes")
    if layout is None:
        top = max(i for i, _ in rows)
        width = max(1, int(top).bit_length())
        layout = (Register("q", width),)
    n = sum(r.width if isinstance(r, Register) else r[1] for r in layout)
    amps = np.zeros(2**n, dtype=complex)
    for i, a in rows:
        amps[i] = a
    return StateVector.from_unnormalized(amps, layout)
