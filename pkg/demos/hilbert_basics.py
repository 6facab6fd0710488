"""Walk through the Hilbert-space primitives: products, projectors, collapse.

Builds a two-word composite state, measures it against basis projectors,
and checks that sampled collapse frequencies track squared amplitudes.
"""

import numpy as np

from qforage import qcore

rng = np.random.default_rng(7)

# Two single-axis states; the composite lives on the 4-dimensional product space.
left = np.array([0.6, 0.8])
right = np.array([1.0, 0.0])
composite = qcore.tensor_product([left, right])
print("composite state:", composite)
print("norm:", np.linalg.norm(composite))

# Born probability of finding the composite in each basis direction,
# measured against the pure density of the composite state.
state = qcore.build_density([1.0], [composite])
for i in range(composite.shape[0]):
    basis = np.zeros(composite.shape[0])
    basis[i] = 1.0
    p = qcore.born_probability(qcore.projector(basis), state)
    print(f"  P(basis {i}) = {p:.4f}")

# A projective measurement picks an index with those exact probabilities.
draws = 20_000
counts = np.zeros(composite.shape[0])
for _ in range(draws):
    index, collapsed = qcore.collapse_sample(composite, rng)
    counts[index] += 1
print("empirical frequencies:", counts / draws)
print("squared amplitudes:   ", composite**2)

# Mixtures: an equal blend of two orthogonal pure states has flat
# eigenvalues and maximal purity defect for its rank.
rho = qcore.build_density(
    [0.5, 0.5], [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
)
print("mixture eigenvalues:", rho.eigenvalues())
print("purity defect:", rho.purity_defect())

# Block observables read off coarse regions of a larger space.
observable = qcore.Observable.coordinate_blocks(6, 3, (-1.0, 0.0, 1.0))
vector = rng.standard_normal(6)
vector /= np.linalg.norm(vector)
pure = qcore.build_density([1.0], [vector])
print("block probabilities:", observable.probabilities(pure))
print("expectation:", observable.expectation(pure))
