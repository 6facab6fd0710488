"""Recover a planted low-rank tensor with the alternating least-squares fit.

Plants a rank-3 tensor from unit factor rows, runs cp_decompose, and
reports the reconstruction residual plus what the report says about the
sweeps taken. Also shows the guard against impossible ranks.
"""

import numpy as np

from qforage import qrep
from qforage.errors import RankTooLarge

rng = np.random.default_rng(23)

order, basis_dim, rank = 3, 3, 3
factors = rng.standard_normal((rank, order, basis_dim))
qrep.renormalize_rows(factors.reshape(rank * order, basis_dim))
truth = qrep.GlobalRepresentation(
    weights=np.array([2.0, -1.3, 0.7]), factors=factors
)
tensor = qrep.cp_reconstruct(truth)
print("tensor shape:", tensor.shape, "norm:", np.linalg.norm(tensor))

fitted, report = qrep.cp_decompose(tensor, rank, rng=np.random.default_rng(0))
residual = np.linalg.norm(qrep.cp_reconstruct(fitted) - tensor)
print("relative residual:", residual / np.linalg.norm(tensor))
print("restarts used:", report.restarts_run, "sweeps of best run:", report.sweeps)
print("fitted weights (sorted by size):", np.sort(np.abs(fitted.weights))[::-1])
print("planted weights (sorted by size):", np.sort(np.abs(truth.weights))[::-1])

# Underfitting: a rank-1 fit of a genuinely rank-3 tensor leaves a large
# residual, which is the honest signal that the rank was too small.
under, under_report = qrep.cp_decompose(tensor, 1, rng=np.random.default_rng(0))
under_residual = np.linalg.norm(qrep.cp_reconstruct(under) - tensor)
print("rank-1 relative residual:", under_residual / np.linalg.norm(tensor))

# Overreaching: ranks beyond what the shape supports are rejected up front.
try:
    qrep.cp_decompose(np.ones((2, 2)), 3, rng=np.random.default_rng(0))
except RankTooLarge as exc:
    print("rank guard:", exc)
