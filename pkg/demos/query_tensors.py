"""Represent short queries as tensor-product states and score them.

Shows the amplitude table, padding and unknown-word handling, and the
equivalence between the factored projection and a dense inner product
against the fully materialized query tensor.
"""

import numpy as np

from qforage import qrep

rng = np.random.default_rng(11)
vocabulary = ("cats", "chase", "dogs", "mice", "run")

table = qrep.AmplitudeTable.from_vocab(vocabulary, basis_dim=3, rng=rng)
print("rows (null, unk, then words):", table.amplitudes.shape)
print("null row stays pinned:", table.amplitudes[qrep.NULL_ID])

# Queries shorter than the slot count are padded with the null word;
# out-of-vocabulary words fall back to the shared unknown row.
state = qrep.embed_query(["dogs", "chase", "zebras"], table, order=4)
print("word ids:", state.word_ids)

# The global semantic space is a low-rank set of per-slot factor rows.
global_rep = qrep.GlobalRepresentation.from_random(order=4, basis_dim=3, rank=5, rng=rng)
score = qrep.project(global_rep, state)
print("factored score:", score)

# Same number the slow way: materialize both tensors and take the
# inner product over all 81 entries.
dense = np.dot(
    qrep.cp_reconstruct(global_rep).ravel(),
    qrep.materialize_local(state).ravel(),
)
print("dense score:   ", dense)
print("difference:    ", abs(score - dense))

# Per-component pooled products show how much each rank-1 direction
# contributes before weighting.
pool = qrep.product_pool(global_rep, state)
print("pooled contributions:", pool)
print("weights @ pool == score:", np.dot(global_rep.weights, pool) == score)
