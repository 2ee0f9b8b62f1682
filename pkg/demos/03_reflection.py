"""
Approximate reflection about the stationary state
=================================================

Phase estimation on W separates psi0 (phase 0) from the busy eigenvectors.
Negating the all-zero probe outcome and undoing the estimation gives an
approximate reflection whose error shrinks geometrically with the number
of estimation blocks c.
"""

from szegedy_gibbs import nets
from szegedy_gibbs.reflection import PEParams, measure_reflection_error
from szegedy_gibbs.sampler import default_parameters

net = nets.two_node_example()
pe = default_parameters(net, epsilon2=1 / 16)
print(pe)
print("W applications per V:", pe.walk_applications_per_V())

####################################################################
# Error on the busy subspace for c = 1..4 blocks.

for c in range(1, 5):
    err = measure_reflection_error(net, PEParams(pe.a, c, pe.epsilon2, pe.Delta))
    print(f"c={c}  error={err:.4f}")

####################################################################
# With a single node every busy phase is exactly 1/2, so one probe qubit
# resolves it and the reflection is exact.

print("single node:", measure_reflection_error(nets.single_node(0.5), PEParams(1, 1, 0.25, 0.5)))
