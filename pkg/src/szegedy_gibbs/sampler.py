"""Grover-style quantum Gibbs sampler and the classical Gibbs baseline.

The quantum run starts from ``|0>_R1 |x0>_R2 |0^{ac}>`` and applies
``R_beg R~_tar`` (right factor first) ``L`` times, where ``R_beg`` negates the
start state and ``R~_tar`` is the phase-estimation reflection about psi0.
A final success check runs ``V`` once more and keeps the branch whose probes
read zero, i.e. the branch identified as psi0; the R2 register of that
branch is then measured. Measurement is simulated by multinomial sampling
from the exact marginal.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bayesnet import BayesianNetwork, find_support_point, joint_probability
from .chains import GibbsSampler, build_M1, build_M2, build_M_hyb, spectrum
from .errors import LengthMismatch
from .reflection import (
    DEFAULT_MAX_QUBITS,
    PEParams,
    apply_R_tar_approx,
    apply_V,
    choose_parameters,
    walk_phase_gap,
)
from .walk import WalkOperator, stationary_state

SCHEMA_VERSION = 1


def tv_distance(p, q) -> float:
    """Total variation distance ``0.5 * sum |p - q|``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise LengthMismatch(f"distributions have lengths {p.shape} and {q.shape}")
    return float(min(1.0, 0.5 * np.abs(p - q).sum()))


def sqrt_precision(p, q) -> float:
    """``max_x |sqrt(p(x)) - sqrt(q(x))|``."""
    return float(np.max(np.abs(np.sqrt(np.asarray(p)) - np.sqrt(np.asarray(q)))))


def grover_iterations(p0: float) -> int:
    """Grover-optimal iteration count ``max(1, round(pi / (4 theta) - 1/2))``."""
    if not 0 < p0 <= 1:
        raise ValueError(f"p0 must be in (0, 1], got {p0}")
    theta = math.asin(math.sqrt(p0))
    return max(1, round(math.pi / (4 * theta) - 0.5))


def grover_success(p0: float, L: int) -> float:
    """``sin^2((2L + 1) theta)`` with ``theta = arcsin(sqrt(p0))``."""
    theta = math.asin(math.sqrt(p0))
    return math.sin((2 * L + 1) * theta) ** 2


def build_R_beg(net: BayesianNetwork, x0):
    """Reflection that negates ``|0>_R1 |x0>_R2`` with all probes zero."""
    idx = x0 if isinstance(x0, (int, np.integer)) else net.pack(x0)
    if joint_probability(net, net.unpack(idx)) <= 0:
        raise ValueError(f"pi(x0) must be positive for x0={net.unpack(idx)}")

    def R_beg(state):
        out = np.array(state, dtype=complex)
        out[..., 0, 0, idx] *= -1
        return out

    return R_beg


@dataclass
class GroverConfig:
    """Settings for one quantum sampling run."""

    x0: tuple
    L: int
    pe: PEParams
    shots: int = 10_000
    seed: int = 0
    postselect: bool = True

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be at least 1")
        if self.shots < 1:
            raise ValueError("shots must be at least 1")


@dataclass
class SamplingReport:
    """Outcome of a sampling run.

    ``pi_exact`` is the distribution the measurement samples from (no shot
    noise); ``pi_tilde`` is the empirical one.
    """

    method: str
    counts: np.ndarray
    pi: np.ndarray
    pi_exact: np.ndarray
    shots: int
    seed: int
    W_applications: int = 0
    classical_sweeps: int = 0
    details: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    @property
    def pi_tilde(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    @property
    def tv(self) -> float:
        return tv_distance(self.pi_tilde, self.pi)

    @property
    def tv_exact(self) -> float:
        return tv_distance(self.pi_exact, self.pi)

    @property
    def epsilon_hat(self) -> float:
        return sqrt_precision(self.pi, self.pi_tilde)

    @property
    def epsilon_hat_exact(self) -> float:
        return sqrt_precision(self.pi, self.pi_exact)

    def to_dict(self, include_timing=False) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "method": self.method,
            "shots": self.shots,
            "seed": self.seed,
            "counts": [int(c) for c in self.counts],
            "pi": [float(v) for v in self.pi],
            "pi_tilde": [float(v) for v in self.pi_tilde],
            "pi_exact": [float(v) for v in self.pi_exact],
            "tv": self.tv,
            "tv_exact": self.tv_exact,
            "epsilon_hat": self.epsilon_hat,
            "epsilon_hat_exact": self.epsilon_hat_exact,
            "W_applications": self.W_applications,
            "classical_sweeps": self.classical_sweeps,
        }
        out.update(self.details)
        if include_timing:
            out["wall_clock"] = self.wall_clock
        return out


def default_parameters(
    net: BayesianNetwork,
    epsilon2: float,
    max_qubits: int = DEFAULT_MAX_QUBITS,
    cap: bool = False,
) -> PEParams:
    """PE parameters using the walk phase gap of ``net``."""
    M_hyb = build_M_hyb(build_M1(net), build_M2(net))
    delta = spectrum(M_hyb).delta
    return choose_parameters(
        max(delta, 1e-300),
        epsilon2,
        phase_gap=walk_phase_gap(M_hyb),
        walk_qubits=2 * net.n_bits,
        max_qubits=max_qubits,
        cap=cap,
    )


def make_config(net, *, epsilon2=1 / 16, x0=None, L=None, a=None, c=None, shots=10_000, seed=0,
                postselect=True, max_qubits=DEFAULT_MAX_QUBITS, cap=False) -> GroverConfig:
    """Fill in defaults: greedy support point, Grover-optimal L, gap-derived (a, c)."""
    if x0 is None:
        x0 = find_support_point(net)
    x0 = tuple(int(v) for v in x0)
    if L is None:
        L = grover_iterations(joint_probability(net, x0))
    pe = default_parameters(net, epsilon2, max_qubits=max_qubits, cap=cap)
    if a is not None or c is not None:
        pe = PEParams(a or pe.a, c or pe.c, pe.epsilon2, pe.Delta, pe.cap_applied)
    return GroverConfig(x0, L, pe, shots, seed, postselect)


def prepare_state(net, cfg: GroverConfig, walk: WalkOperator):
    """Pre-measurement state after ``L`` rounds of ``R_beg R~_tar``."""
    state = np.zeros((cfg.pe.probe_dim, net.n_states, net.n_states), dtype=complex)
    state[0, 0, net.pack(cfg.x0)] = 1.0
    R_beg = build_R_beg(net, cfg.x0)
    for _ in range(cfg.L):
        state = R_beg(apply_R_tar_approx(state, walk, cfg.pe))
    return state


def run_quantum_sampler(net: BayesianNetwork, cfg: GroverConfig, backend="gates") -> SamplingReport:
    """Simulate the quantum sampler and draw ``cfg.shots`` samples of R2."""
    start = time.perf_counter()
    walk = WalkOperator(net, backend)
    p0 = joint_probability(net, cfg.x0)
    state = prepare_state(net, cfg, walk)
    w_prep = walk.applications
    psi0 = stationary_state(net)
    fidelity = float(abs(np.vdot(psi0, state[0])) ** 2)

    if cfg.postselect:
        checked = apply_V(state, walk, cfg.pe)
        kept = checked[0]
        accept = float(np.vdot(kept, kept).real)
        final = kept / math.sqrt(accept)
        marginal = np.einsum("ij,ij->j", final.conj(), final).real
    else:
        accept = 1.0
        marginal = np.einsum("pij,pij->j", state.conj(), state).real
    w_check = walk.applications - w_prep
    marginal = np.clip(marginal, 0.0, None)
    marginal /= marginal.sum()

    rng = np.random.default_rng(cfg.seed)
    counts = rng.multinomial(cfg.shots, marginal)
    details = {
        "x0": list(cfg.x0),
        "p0": p0,
        "L": cfg.L,
        "large_p0": p0 > 0.25,
        "pe": cfg.pe.to_dict(),
        "postselect": cfg.postselect,
        "acceptance_probability": accept,
        "grover_fidelity": fidelity,
        "grover_fidelity_ideal": grover_success(p0, cfg.L),
        "W_applications_prep": w_prep,
        "W_applications_check": w_check,
        "W_formula_prep": cfg.L * 2 * cfg.pe.walk_applications_per_V(),
        "qubits": 2 * net.n_bits + cfg.pe.n_probe,
    }
    return SamplingReport(
        method="quantum",
        counts=counts,
        pi=net.pi.copy(),
        pi_exact=marginal,
        shots=cfg.shots,
        seed=cfg.seed,
        W_applications=walk.applications,
        details=details,
        wall_clock=time.perf_counter() - start,
    )


def exact_sweep_distribution(M1, x0_index: int, k: int) -> np.ndarray:
    """``M1^k delta_{x0}``."""
    v = np.zeros(M1.shape[0])
    v[x0_index] = 1.0
    for _ in range(k):
        v = M1 @ v
    return v


def run_classical_sampler(net: BayesianNetwork, burn_in: int, shots: int, seed: int = 0, x0=None) -> SamplingReport:
    """Independent Gibbs chains from ``x0``, each run for ``burn_in`` sweeps."""
    if burn_in < 0 or shots < 1:
        raise ValueError("burn_in must be >= 0 and shots >= 1")
    start = time.perf_counter()
    if x0 is None:
        x0 = find_support_point(net)
    x0 = tuple(int(v) for v in x0)
    rng = np.random.default_rng(seed)
    sampler = GibbsSampler(net)
    states = np.tile(np.array(x0, dtype=np.int64), (shots, 1))
    for _ in range(burn_in):
        states = sampler.sweep(states, rng)
    packed = np.ravel_multi_index(states.T, net.cardinalities)
    counts = np.bincount(packed, minlength=net.n_states)
    exact = exact_sweep_distribution(build_M1(net), net.pack(x0), burn_in) if net.n_bits <= 8 else counts / shots
    return SamplingReport(
        method="classical",
        counts=counts,
        pi=net.pi.copy(),
        pi_exact=exact,
        shots=shots,
        seed=seed,
        classical_sweeps=burn_in,
        details={"x0": list(x0), "burn_in": burn_in},
        wall_clock=time.perf_counter() - start,
    )


def classical_sweeps_needed(M1, pi, x0_index: int, eps: float, max_sweeps: int = 1 << 20) -> int:
    """Smallest ``k`` (by doubling, then bisection) with ``tv(M1^k delta_x0, pi) <= eps``."""

    def tv_at(k):
        return tv_distance(exact_sweep_distribution(M1, x0_index, k), pi)

    if tv_at(0) <= eps:
        return 0
    hi = 1
    while tv_at(hi) > eps:
        hi *= 2
        if hi > max_sweeps:
            raise RuntimeError(f"chain did not reach tv <= {eps} within {max_sweeps} sweeps")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tv_at(mid) <= eps:
            hi = mid
        else:
            lo = mid
    return hi


COMPARE_COLUMNS = (
    "net",
    "delta",
    "eps_target",
    "a",
    "c",
    "L",
    "W_applications",
    "classical_sweeps",
    "tv_quantum",
    "tv_classical",
)


def compare(net: BayesianNetwork, eps_target: float, *, name="net", shots=2000, seed=0, x0=None,
            max_qubits=DEFAULT_MAX_QUBITS) -> dict:
    """Quantum cost versus classical sweeps at a common precision target.

    The quantum run uses ``epsilon2 = (eps_target / L)**2`` so that ``L`` reflections
    stay within the target. The classical cost is the number of exact sweeps
    needed to bring the tv distance from ``x0`` down to ``eps_target``.
    ``W_applications`` counts every W (and W^dagger) call for one prepared
    state including the success check. Both tv columns are noise-free.
    """
    if x0 is None:
        x0 = find_support_point(net)
    M1 = build_M1(net)
    M_hyb = build_M_hyb(M1, build_M2(net))
    delta = spectrum(M_hyb).delta
    p0 = joint_probability(net, x0)
    L = grover_iterations(p0)
    eps2 = min((eps_target / L) ** 2, 0.25)
    pe = choose_parameters(
        delta, eps2, phase_gap=walk_phase_gap(M_hyb), walk_qubits=2 * net.n_bits, max_qubits=max_qubits
    )
    cfg = GroverConfig(tuple(x0), L, pe, shots, seed)
    q = run_quantum_sampler(net, cfg)
    k = classical_sweeps_needed(M1, net.pi, net.pack(x0), eps_target)
    c_report = run_classical_sampler(net, k, shots, seed, x0)
    row = {
        "net": name,
        "delta": delta,
        "eps_target": eps_target,
        "a": pe.a,
        "c": pe.c,
        "L": L,
        "W_applications": q.W_applications,
        "classical_sweeps": k,
        "tv_quantum": q.tv_exact,
        "tv_classical": c_report.tv_exact,
    }
    return {
        "schema_version": SCHEMA_VERSION,
        "row": row,
        "ratio": q.W_applications / max(k, 1),
        "quantum": q.to_dict(),
        "classical": c_report.to_dict(),
    }


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
