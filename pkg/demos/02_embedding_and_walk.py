"""
Quantum embedding and the walk operator
=======================================

Each node contributes a multiplexed rotation controlled by its Markov
blanket. The product U = U2^dagger U1 carries M_hyb in the block that maps
|x, 0> to |0, y>, and the walk W built from U has eigenphases +-2 arccos(s_k)
for the singular values s_k of M_hyb.
"""

import numpy as np

from szegedy_gibbs import nets
from szegedy_gibbs.chains import build_M1, build_M2, build_M_hyb
from szegedy_gibbs.embedding import QEmbedding, decompose_multiplexors, hybrid_block
from szegedy_gibbs.walk import WalkOperator, stationary_state, verify_walk_spectrum

net = nets.seeded_three_node()
M_hyb = build_M_hyb(build_M1(net), build_M2(net))
emb = QEmbedding(net)

####################################################################
# The hybrid block of U, read off the matrix-free gate application.

A = hybrid_block(emb.apply_U, net.n_states)
print("max |<0,y|U|x,0> - M_hyb| =", np.abs(A - M_hyb).max())

####################################################################
# The same U1 as a list of uniformly controlled RY gates.

print(decompose_multiplexors(net, 1).to_text())

####################################################################
# The stationary state |0>|sqrt(pi)> is fixed by W, and the dense
# eigenvalues of W match the singular-value prediction.

walk = WalkOperator(net)
psi0 = stationary_state(net)
print("|W psi0 - psi0| =", np.linalg.norm(walk.apply(psi0) - psi0))
rep = verify_walk_spectrum(net)
print("spectrum vs singular values:", rep["spectrum_mismatch_singular"])
print("spectrum vs eigenvalue moduli:", rep["spectrum_mismatch_eigen"], "(M_hyb is not normal)")

####################################################################
# On a net with independent nodes M_hyb is symmetric and both predictions agree.

rep = verify_walk_spectrum(nets.independent([0.3, 0.8]))
print("independent net:", rep["spectrum_mismatch_eigen"], rep["busy_eigenpairs"])
