"""A correlated 2D Gaussian from a product state and two-register shears.

Run: python demos/03_prepnd.py
"""

import numpy as np

from gaussprep import QuadraticForm, decompose
from gaussprep.prepnd import describe_preparation, prepare_diagonal, shift_mean

form = QuadraticForm([[0.02, 0.01], [0.01, 0.02]])
dec = decompose(form)
print("D =", dec.D)
print("M =\n", dec.M())
print("shears:", [(f.row, f.col, f.value) for f in dec.factors])

k = 6
state, report = describe_preparation(form, k)
print(f"\nk={k}: fidelity vs brute force = {report['fidelity']:.6f}")
print("tail mass:", {key: f"{v:.2e}" for key, v in report["tail_mass"].items()})


def moments(s):
    p = np.abs(s.tensor_view()) ** 2
    x = np.arange(2**k)
    x = np.where(x >= 2 ** (k - 1), x - 2**k, x)
    X, Y = np.meshgrid(x, x, indexing="ij")
    return float((p * X * Y).sum()), float((p * X * X).sum())


# The product state is uncorrelated; the shear introduces the covariance.
diag = prepare_diagonal(dec.D, k)
print("E[xy], E[xx] before shear:", moments(diag))
print("E[xy], E[xx] after shear: ", moments(state))
print("target covariance A^-1 / 2:\n", np.linalg.inv(form.A) / 2)

moved = shift_mean(state, [10, -5])
p = np.abs(moved.tensor_view()) ** 2
print("peak after shifting the mean by (10, -5):", [int(i) for i in np.unravel_index(np.argmax(p), p.shape)], "(unsigned words)")
