"""Quantum Gibbs sampling of Bayesian networks with Szegedy walk operators."""

from .bayesnet import (
    BayesianNetwork,
    NodeSpec,
    conditional_table,
    find_support_point,
    full_conditional,
    joint_probability,
    markov_blanket,
)
from .chains import (
    SpectralData,
    build_M1,
    build_M2,
    build_M_hyb,
    check_pair_detailed_balance,
    classical_gibbs_step,
    spectrum,
    verify_spectra_equal,
)
from .embedding import QEmbedding, RegisterLayout, build_U, build_U1, build_U2, decompose_multiplexors
from .errors import *  # noqa: F401,F403
from .reflection import PEParams, apply_R_tar_approx, apply_V, choose_parameters, measure_reflection_error
from .sampler import (
    GroverConfig,
    SamplingReport,
    compare,
    grover_iterations,
    run_classical_sampler,
    run_quantum_sampler,
    tv_distance,
)
from .walk import WalkOperator, busy_basis, singular_busy_basis, verify_walk_spectrum

__version__ = "0.1.0"
