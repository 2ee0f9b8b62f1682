"""
Sampling and the cost comparison
================================

Grover iterations rotate the start state |0>|x0> toward psi0. Measuring R2
then yields samples of pi. The cost in walk applications grows like
1/sqrt(delta) while classical sweeps grow like 1/delta.
"""

import numpy as np

from szegedy_gibbs import nets
from szegedy_gibbs.sampler import (
    compare,
    loglog_slope,
    make_config,
    run_classical_sampler,
    run_quantum_sampler,
)

net = nets.uniform_independent(3)
cfg = make_config(net, x0=(0, 0, 0), shots=10_000, seed=1)
rep = run_quantum_sampler(net, cfg)
print("L =", cfg.L, "fidelity =", round(rep.details["grover_fidelity"], 4))
print("pi_tilde =", np.round(rep.pi_tilde, 3))
print("W applications:", rep.W_applications)

####################################################################
# The classical baseline runs independent chains from the same start.

net = nets.seeded_three_node()
print("quantum tv:", run_quantum_sampler(net, make_config(net, shots=5000)).tv)
print("classical tv:", run_classical_sampler(net, burn_in=5, shots=5000).tv)

####################################################################
# Coupling sweep: gap delta = (1 - g)^2.

rows = [compare(nets.coupling_family(g), 0.25, name=f"g={g}")["row"] for g in (0.6, 0.8, 0.9, 0.95)]
for r in rows:
    print(r["net"], f"1/delta={1 / r['delta']:.0f}", "W:", r["W_applications"], "sweeps:", r["classical_sweeps"])
inv = [1 / r["delta"] for r in rows]
print("quantum slope:", loglog_slope(inv, [r["W_applications"] for r in rows]))
print("classical slope:", loglog_slope(inv, [r["classical_sweeps"] for r in rows]))
