import math

import numpy as np
import pytest

from gaussprep.resample import (
    GaussianWindow,
    ResampleError,
    ScaleMap,
    UniformWindow,
    band_diagnostic,
    gaussian_psi,
    joint_state,
    parse_window,
    resample,
    shift_add_B,
    shift_sub_A,
    signed_window_support,
    window_amplitudes,
)
from gaussprep.statevec import Register, StateVector
from gaussprep.theta import GaussianParams

N = 10
MU = 512.0


def psi_and_params(sigma, n=N, mu=MU):
    return gaussian_psi(sigma, mu, n), GaussianParams(sigma, mu)


def joint_basis(x, b, n):
    return StateVector.basis((x << n) | b, (Register("A", n), Register("B", n)))


def analytic_prob_zero(a, sigma_w, sigma_psi):
    # B window times the stretched A window is a Gaussian kernel of variance a^2 sigma_w^2 / 2
    return (1 + a**2 * sigma_w**2 / (2 * sigma_psi**2)) ** -0.5


def test_window_parsing_and_scaling():
    assert parse_window("uniform:16") == UniformWindow(16)
    assert parse_window("gaussian:8") == GaussianWindow(8.0)
    assert parse_window("gaussian:8,2") == GaussianWindow(8.0, 2.0)
    assert UniformWindow(16).scaled(1.5) == UniformWindow(24)
    assert UniformWindow(3).scaled(1.5) == UniformWindow(4)
    assert GaussianWindow(8, 2).scaled(1.5) == GaussianWindow(12, -3)
    for bad in ("box:3", "uniform:0", "gaussian:-1"):
        with pytest.raises(ValueError):
            parse_window(bad)


def test_uniform_window_support():
    assert sorted(signed_window_support(UniformWindow(3), 5).tolist()) == [-3, -2, -1, 0, 1, 2]
    amps = window_amplitudes(UniformWindow(3), 5)
    assert np.sum(amps**2) == pytest.approx(1)
    with pytest.raises(ValueError):
        window_amplitudes(UniformWindow(20), 5)


def test_scale_map():
    s = ScaleMap(1.5)
    assert s.forward(np.array([0, 1, 2, 3, 7])).tolist() == [0, 0, 1, 2, 4]
    assert s.pullback(np.array([0, 1, 2, 3])).tolist() == [0, 1, 3, 4]
    with pytest.raises(ValueError):
        ScaleMap(0.0)


def test_shift_add_examples():
    n = 4
    unit = ScaleMap(1.0)
    for x in range(2**n):
        out = shift_add_B(joint_basis(x, 0, n), unit)
        assert out.amplitudes[(x << n) | x] == 1
    out = shift_add_B(joint_basis(5, 0, n), ScaleMap(2.0))
    assert out.amplitudes[(5 << n) | 2] == 1


def test_shifts_invert():
    rng = np.random.default_rng(3)
    n = 5
    v = rng.normal(size=4**n) + 1j * rng.normal(size=4**n)
    s = StateVector.from_unnormalized(v, (Register("A", n), Register("B", n)))
    for a in (0.7, 1.0, 1.5, 3.2):
        scale = ScaleMap(a)
        assert np.array_equal(shift_add_B(shift_add_B(s, scale), scale, inverse=True).amplitudes, s.amplitudes)
        assert np.array_equal(shift_sub_A(shift_sub_A(s, scale), scale, inverse=True).amplitudes, s.amplitudes)


def test_joint_state_is_product():
    psi, _ = psi_and_params(40.0, 8, 128.0)
    eta = joint_state(psi, GaussianWindow(6.0))
    grid = eta.tensor_view()
    w = window_amplitudes(GaussianWindow(6.0), 8)
    assert np.allclose(grid, np.outer(psi.amplitudes, w), atol=1e-14)


def test_norm_and_leak_bookkeeping():
    psi, p = psi_and_params(60.0)
    state_B, rep = resample(psi, ScaleMap(1.5), GaussianWindow(16.0), p)
    assert state_B.norm() == pytest.approx(1, abs=1e-12)
    assert rep.prob_A_zero + rep.leaked_mass.sum() == pytest.approx(1, abs=1e-12)
    d = rep.as_dict()
    assert d["total_leaked_mass"] == pytest.approx(1 - rep.prob_A_zero, abs=1e-12)
    assert len(d["largest_leaks"]) <= 16


@pytest.mark.parametrize("a,sigma_w,sigma_psi,tol", [(1.0, 16.0, 60.0, 1e-5), (1.0, 8.0, 30.0, 1e-5), (1.5, 16.0, 60.0, 2e-3)])
def test_success_probability_matches_convolution(a, sigma_w, sigma_psi, tol):
    psi, p = psi_and_params(sigma_psi)
    _, rep = resample(psi, ScaleMap(a), GaussianWindow(sigma_w), p)
    assert rep.prob_A_zero == pytest.approx(analytic_prob_zero(a, sigma_w, sigma_psi), abs=tol)


def test_unit_scale_narrow_window_returns_input():
    psi, p = psi_and_params(60.0)
    state_B, rep = resample(psi, ScaleMap(1.0), GaussianWindow(0.3), p)
    assert rep.fidelity_B_vs_target >= 1 - 1e-6
    assert rep.prob_A_zero >= 1 - 1e-4


def test_stretch_by_two():
    psi, p = psi_and_params(100.0)
    state_B, rep = resample(psi, ScaleMap(2.0), GaussianWindow(16.0), p)
    assert rep.fidelity_B_vs_target >= 0.99
    assert int(np.argmax(np.abs(state_B.amplitudes))) in (255, 256, 257)


def test_uniform_and_gaussian_windows_both_work():
    psi, p = psi_and_params(60.0)
    for spec in (UniformWindow(16), GaussianWindow(32.0)):
        _, rep = resample(psi, ScaleMap(1.5), spec, p)
        assert rep.fidelity_B_vs_target >= 0.99


def test_gaussian_beats_uniform_at_equal_width():
    psi, p = psi_and_params(60.0)
    for n in (4, 8, 16):
        _, uni = resample(psi, ScaleMap(1.5), UniformWindow(n), p)
        _, gau = resample(psi, ScaleMap(1.5), GaussianWindow(n * math.sqrt(2 / 3)), p)
        assert gau.prob_A_zero > uni.prob_A_zero


def test_fidelity_improves_with_smoother_input():
    fids = []
    for sigma in (30.0, 60.0, 120.0):
        psi, p = psi_and_params(sigma)
        fids.append(resample(psi, ScaleMap(1.5), GaussianWindow(16.0), p)[1].fidelity_B_vs_target)
    assert fids[0] < fids[1] < fids[2]


def test_uniform_report_rounding_discrepancy():
    psi, p = psi_and_params(60.0)
    _, rep = resample(psi, ScaleMap(1.5), UniformWindow(3), p)
    assert rep.band_width_used["A_half_width"] == 4
    assert rep.band_width_used["A_rounding_discrepancy"] == pytest.approx(-0.5)


def test_band_is_flat_for_constant_input():
    n = 8
    flat = StateVector(np.full(2**n, 2 ** (-n / 2), dtype=complex), (Register("A", n),))
    scale = ScaleMap(1.5)
    band = band_diagnostic(shift_add_B(joint_state(flat, UniformWindow(4)), scale), scale)
    assert band.max_gap < 1e-12


def test_band_gap_shrinks_with_smoothness(tmp_path):
    scale = ScaleMap(1.5)
    gaps = []
    for sigma in (30.0, 60.0, 120.0):
        psi, _ = psi_and_params(sigma)
        band = band_diagnostic(shift_add_B(joint_state(psi, UniformWindow(16)), scale), scale)
        gaps.append(band.max_gap)
    assert gaps[0] > gaps[1] > gaps[2]
    path = tmp_path / "band.csv"
    band.write_csv(path, {"a": 1.5})
    lines = path.read_text().splitlines()
    assert lines[:2] == ["# a=1.5", "x,y,re,im,abs2"]
    assert len(lines) == 2 + len(band.points)


def test_rough_input_warns():
    rng = np.random.default_rng(0)
    psi = StateVector.from_unnormalized(rng.normal(size=2**8), (Register("A", 8),))
    _, rep = resample(psi, ScaleMap(1.5), GaussianWindow(4.0))
    assert any("varies quickly" in w for w in rep.warnings)


def test_zero_probability_projection_raises():
    # at a = 2 with the narrowest box the A = 0 amplitude at y is psi(2y) + psi(2y + 1)
    n = 4
    alternating = (-1.0) ** np.arange(2**n)
    psi = StateVector.from_unnormalized(alternating, (Register("A", n),))
    with pytest.raises(ResampleError) as err:
        resample(psi, ScaleMap(2.0), UniformWindow(1))
    assert err.value.report.prob_A_zero < 1e-28
