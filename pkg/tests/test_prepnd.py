import itertools

import numpy as np
import pytest

from gaussprep.prepnd import (
    NotPositiveDefinite,
    QuadraticForm,
    ShearFactor,
    apply_elementary_shear,
    coordinate_layout,
    decompose,
    describe_preparation,
    prepare_diagonal,
    prepare_general,
    shear_map,
    shift_mean,
    tail_mass,
    target_oracle,
)
from gaussprep.statevec import SignedCodec, StateVector, fidelity, grid_coords

BASE = np.array([[0.02, 0.01], [0.01, 0.02]])


def random_spd(rng, S):
    X = rng.normal(size=(S, S))
    return X @ X.T + 0.1 * np.eye(S)


def random_state(rng, S, k):
    v = rng.normal(size=2 ** (S * k)) + 1j * rng.normal(size=2 ** (S * k))
    return StateVector.from_unnormalized(v, coordinate_layout(S, k))


def test_identity_has_no_shears():
    dec = decompose(QuadraticForm(np.eye(3)))
    assert dec.factors == ()
    assert np.array_equal(dec.D, np.ones(3))


def test_two_by_two_example():
    dec = decompose(QuadraticForm([[2.0, 1.0], [1.0, 1.0]]))
    assert np.allclose(dec.D, [2.0, 0.5])
    assert dec.factors == (ShearFactor(0, 1, -0.5),)
    assert np.allclose(dec.M(), [[1, -0.5], [0, 1]])


def test_random_spd_reconstruction():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        S = int(rng.integers(1, 7))
        A = random_spd(rng, S)
        dec = decompose(QuadraticForm(A))
        M = dec.M()
        assert np.allclose(np.tril(M, -1), 0) and np.allclose(np.diag(M), 1)
        assert np.all(dec.D > 0)
        assert dec.residual(A) <= 1e-10 * np.abs(A).max()
        assert np.abs(dec.reconstruct() - A).max() <= 1e-9 * np.abs(A).max()
        assert abs(np.prod(dec.D) / np.linalg.det(A) - 1) < 1e-9


def test_factor_order_reproduces_every_entry():
    rng = np.random.default_rng(8)
    A = random_spd(rng, 5)
    dec = decompose(QuadraticForm(A))
    M = dec.M()
    entries = {(f.row, f.col): f.value for f in dec.factors}
    for i, j in itertools.combinations(range(5), 2):
        assert M[i, j] == pytest.approx(entries.get((i, j), 0.0), abs=1e-12)


@pytest.mark.parametrize("A", [[[1.0, 2.0], [2.0, 1.0]], [[0.0, 0.0], [0.0, 1.0]], [[-1.0]]])
def test_rejects_indefinite(A):
    with pytest.raises(NotPositiveDefinite) as err:
        decompose(QuadraticForm(A))
    assert err.value.pivot <= 0


def test_rejects_asymmetric():
    with pytest.raises(ValueError):
        QuadraticForm([[1.0, 0.5], [0.0, 1.0]])


def test_matrix_file(tmp_path):
    path = tmp_path / "A.txt"
    path.write_text("2\n0.02 0.01\n0.01 0.02\n")
    assert np.array_equal(QuadraticForm.from_file(path).A, BASE)
    path.write_text("2\n1 0\n")
    with pytest.raises(ValueError):
        QuadraticForm.from_file(path)


def test_shear_example():
    codec = SignedCodec(3)
    out = shear_map(np.array([[1, 2]]), ShearFactor(0, 1, 1.0), codec)
    assert out.tolist() == [[3, 2]]
    # wraps in two's complement
    out = shear_map(np.array([[3, 2]]), ShearFactor(0, 1, 1.0), codec)
    assert out.tolist() == [[-3, 2]]


def test_floor_of_negative_is_not_negated_floor():
    codec = SignedCodec(4)
    f = ShearFactor(0, 1, 0.5)
    c = np.array([[0, 3]])
    fwd = shear_map(c, f, codec)
    assert fwd.tolist() == [[1, 3]]
    assert shear_map(fwd, f, codec, inverse=True).tolist() == [[0, 3]]
    negated = shear_map(c, ShearFactor(0, 1, -0.5), codec)
    assert negated.tolist() == [[-2, 3]]


@pytest.mark.parametrize("value", [1.0, -0.5, 0.37, 2.6, -3.3])
@pytest.mark.parametrize("rounding", ["floor", "nearest"])
def test_shear_roundtrip_every_basis_state(value, rounding):
    k, S = 4, 3
    codec = SignedCodec(k)
    coords = grid_coords(S, codec)
    for row, col in itertools.combinations(range(S), 2):
        f = ShearFactor(row, col, value)
        back = shear_map(shear_map(coords, f, codec, rounding=rounding), f, codec, inverse=True, rounding=rounding)
        assert np.array_equal(back, coords)


def test_shear_on_state_is_unitary_and_invertible():
    rng = np.random.default_rng(4)
    s = random_state(rng, 2, 4)
    f = ShearFactor(0, 1, -1.7)
    out = apply_elementary_shear(s, f)
    assert out.norm() == pytest.approx(1, abs=1e-14)
    assert np.array_equal(apply_elementary_shear(out, f, inverse=True).amplitudes, s.amplitudes)


def test_diagonal_matches_brute_force():
    for D, k in (([0.5, 0.125], 5), ([0.5, 0.3, 0.2], 5), ([1.0], 6)):
        oracle, _ = target_oracle(QuadraticForm(np.diag(D)), k)
        assert fidelity(prepare_diagonal(D, k), oracle) >= 1 - 1e-10


def test_diagonal_register_swap_symmetry():
    a = prepare_diagonal([0.1, 0.4], 4).tensor_view()
    b = prepare_diagonal([0.4, 0.1], 4).tensor_view()
    assert np.allclose(a, b.T, atol=1e-15)


def test_regression_baseline_fidelity():
    state = prepare_general(QuadraticForm(BASE), 6)
    oracle, _ = target_oracle(QuadraticForm(BASE), 6)
    assert fidelity(state, oracle) >= 0.99937


def test_mean_shift_roundtrip_and_placement():
    s = prepare_general(QuadraticForm(BASE), 6)
    moved = shift_mean(s, [5, -3])
    assert np.array_equal(shift_mean(moved, [-5, 3]).amplitudes, s.amplitudes)
    view = np.abs(moved.tensor_view()) ** 2
    codec = SignedCodec(6)
    peak = np.unravel_index(np.argmax(view), view.shape)
    assert [int(codec.decode(p)) for p in peak] == [5, -3]
    oracle, _ = target_oracle(QuadraticForm(BASE), 6, mean=[5, -3])
    assert fidelity(moved, oracle) >= 0.999


def test_oracle_sum_matches_continuum_constant():
    A = np.array([[0.1, 0.03], [0.03, 0.05]])
    _, info = target_oracle(QuadraticForm(A), 6)
    assert info["sum_sq"] == pytest.approx(info["continuum_sum_sq"], rel=1e-2)


def test_oracle_budget():
    with pytest.raises(ValueError):
        target_oracle(QuadraticForm(np.eye(3)), 8, budget=2**20)


def test_fidelity_improves_with_scale():
    base = np.array([[1.0, 0.4], [0.4, 0.6]])
    fids = []
    for scale in (1, 2, 4):
        A = base / scale**2
        fids.append(fidelity(prepare_general(QuadraticForm(A), 8), target_oracle(QuadraticForm(A), 8)[0]))
    assert fids[0] <= fids[1] <= fids[2]


def test_report_contents():
    _, rep = describe_preparation(QuadraticForm(BASE), 6)
    assert rep["congruence_residual"] <= 1e-12
    assert rep["det_relative_error"] <= 1e-12
    assert rep["fidelity"] >= 0.99937
    assert set(rep["tail_mass"]) == {"periodization", "shear_wrap", "total"}


def test_tail_mass_small_for_wide_grid_and_large_when_cramped():
    dec = decompose(QuadraticForm(BASE))
    assert tail_mass(dec, 8)["total"] < 1e-12
    assert tail_mass(dec, 4)["total"] > 1e-3
