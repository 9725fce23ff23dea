"""Gaussian wavefunction preparation and resampling on simulated qubit registers."""

__version__ = "0.1.0"

from .theta import GaussianParams, periodized_oracle, recursion_angle, theta, theta_direct, theta_poisson
from .statevec import SignedCodec, StateVector, basis_index, fidelity, tensor
from .prep1d import PrepConfig, gate_count_report, prepare_xi, quantize_angle
from .prepnd import QuadraticForm, decompose, prepare_general, target_oracle
from .resample import GaussianWindow, ScaleMap, UniformWindow, resample

__all__ = [
    "GaussianParams",
    "GaussianWindow",
    "PrepConfig",
    "QuadraticForm",
    "ScaleMap",
    "SignedCodec",
    "StateVector",
    "UniformWindow",
    "basis_index",
    "decompose",
    "fidelity",
    "gate_count_report",
    "periodized_oracle",
    "prepare_general",
    "prepare_xi",
    "quantize_angle",
    "recursion_angle",
    "resample",
    "target_oracle",
    "tensor",
    "theta",
    "theta_direct",
    "theta_poisson",
]
