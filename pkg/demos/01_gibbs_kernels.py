"""
Gibbs kernels of a small Bayesian network
=========================================

Build a two-node net, form the forward sweep kernel M1, the reversed sweep
M2 and their geometric mean M_hyb, and look at the spectrum they share.
"""

import numpy as np

from szegedy_gibbs import nets
from szegedy_gibbs.chains import (
    build_M1,
    build_M2,
    build_M_hyb,
    check_pair_detailed_balance,
    spectrum,
    verify_spectra_equal,
)

net = nets.two_node_example()
print(net.names, net.cardinalities)
print("pi =", np.round(net.pi, 4))

####################################################################
# One sweep resamples x1 then x2 from their full conditionals. The
# reversed sweep goes x2 then x1; together they satisfy detailed balance
# as a pair even though neither is reversible on its own.

M1, M2 = build_M1(net), build_M2(net)
print("column sums of M1:", M1.sum(axis=0))
print("pair detailed balance residual:", check_pair_detailed_balance(M1, M2, net.pi))

####################################################################
# M_hyb is a diagonal similarity of M1, so all three share eigenvalues.
# Here it is not normal, which matters later for the walk.

M_hyb = build_M_hyb(M1, M2)
spec = spectrum(M_hyb)
print("eigenvalues:", np.round(spec.eigenvalues, 6))
print("gap delta =", spec.delta, "(13 * delta =", 13 * spec.delta, ")")
print("normality residual:", spec.normality_residual)
print("spectra mismatch:", verify_spectra_equal(M1, M2, M_hyb, net.pi).mismatch)
