"""Phase-estimation reflection about the stationary state of the walk.

States carry a probe axis in front of the walk registers: shape
``(*batch, 2**(a*c), N_S, N_S)``. The probe index packs ``c`` blocks of ``a``
qubits, block 0 most significant; inside a block the first qubit is the
most significant bit.

``V`` runs ``c`` independent phase-estimation blocks. Block ``k`` applies
Hadamards to its qubits, then W^(2^t) controlled on bit ``t`` of the block
value (``t = 0..a-1``, each power realized by repeated W), then the inverse
Fourier transform. ``Q`` negates the all-zero probe component and
``R_tar ~ V^dagger Q V``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chains import build_M1, build_M2, build_M_hyb
from .errors import BudgetExceeded
from .walk import WalkOperator, singular_busy_basis, stationary_state

DEFAULT_MAX_QUBITS = 24


@dataclass(frozen=True)
class PEParams:
    """Phase-estimation parameters.

    a : probe qubits per block; c : number of blocks; epsilon2 : per-reflection
    error budget; Delta : phase resolution the probes must separate from zero.
    """

    a: int
    c: int
    epsilon2: float
    Delta: float
    cap_applied: bool = False

    @property
    def n_probe(self) -> int:
        return self.a * self.c

    @property
    def probe_dim(self) -> int:
        return 1 << (self.a * self.c)

    def walk_applications_per_V(self) -> int:
        return self.c * ((1 << self.a) - 1)

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "c": self.c,
            "epsilon2": self.epsilon2,
            "Delta": self.Delta,
            "cap_applied": self.cap_applied,
        }


def walk_phase_gap(M_hyb) -> float:
    """Smallest nonzero walk eigenphase divided by 2 pi.

    The busy eigenphases of W are ``+-2 arccos(s_k)`` for the non-leading
    singular values ``s_k`` of M_hyb, so the gap is ``arccos(s_1) / pi``.
    """
    s = np.linalg.svd(np.asarray(M_hyb), compute_uv=False)
    if len(s) < 2:
        return 0.5
    return float(np.arccos(np.clip(s[1], 0.0, 1.0)) / np.pi)


def _ceil_log2(x: float) -> int:
    return max(0, math.ceil(math.log2(x) - 1e-12))


def choose_parameters(
    delta: float,
    epsilon2: float,
    *,
    phase_gap: float | None = None,
    walk_qubits: int = 0,
    max_qubits: int = DEFAULT_MAX_QUBITS,
    cap: bool = False,
) -> PEParams:
    """Pick ``(a, c)`` from the spectral gap and the error budget.

    Parameters
    ----------
    delta : float
        Spectral gap ``1 - |m_1|`` in (0, 1].
    epsilon2 : float
        Error budget in (0, 1); ``c = ceil(log2(1/sqrt(epsilon2)))``.
    phase_gap : float, optional
        Walk phase gap (see :func:`walk_phase_gap`). When omitted it is
        estimated from ``delta`` as ``arccos(1 - delta) / pi``.
    walk_qubits : int
        Qubits used by the walk registers, counted against ``max_qubits``.
    cap : bool
        Shrink ``c`` and then ``a`` to fit the budget instead of raising.

    Raises
    ------
    BudgetExceeded
        If the parameters need more than ``max_qubits`` qubits and ``cap`` is off.
    """
    if not 0 < delta <= 1:
        raise ValueError(f"delta must be in (0, 1], got {delta}")
    if not 0 < epsilon2 < 1:
        raise ValueError(f"epsilon2 must be in (0, 1), got {epsilon2}")
    Delta = phase_gap if phase_gap is not None else math.acos(1.0 - delta) / math.pi
    if not 0 < Delta <= 1:
        raise ValueError(f"phase gap must be in (0, 1], got {Delta}")
    a = max(1, _ceil_log2(1.0 / Delta))
    c = max(1, _ceil_log2(1.0 / math.sqrt(epsilon2)))
    capped = False
    while walk_qubits + a * c > max_qubits:
        if not cap:
            raise BudgetExceeded(
                f"a={a}, c={c} needs {walk_qubits + a * c} qubits; budget is {max_qubits}"
            )
        if c > 1:
            c -= 1
        elif a > 1:
            a -= 1
        else:
            raise BudgetExceeded(f"walk registers alone need {walk_qubits} qubits")
        capped = True
    return PEParams(a, c, float(epsilon2), float(Delta), capped)


def hadamard_matrix(a: int) -> np.ndarray:
    idx = np.arange(1 << a)
    parity = np.array([[bin(i & j).count("1") & 1 for j in idx] for i in idx])
    return (1 - 2 * parity) / np.sqrt(1 << a)


def inverse_qft_matrix(a: int) -> np.ndarray:
    """``F^dagger[m, j] = exp(-2 pi i m j / 2^a) / sqrt(2^a)``."""
    n = 1 << a
    m = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(m, m) / n) / np.sqrt(n)


def _blocks_view(state, params):
    state = np.asarray(state, dtype=complex)
    if state.ndim < 3 or state.shape[-3] != params.probe_dim:
        raise ValueError(f"state must have a probe axis of length {params.probe_dim} before (R1, R2)")
    lead = state.shape[:-3]
    tail = state.shape[-2:]
    return state.reshape(lead + (1 << params.a,) * params.c + tail), lead, tail


def _apply_on_block(psi, k, c, matrix):
    """Multiply block axis ``k`` (of ``c``) by ``matrix``."""
    ax = psi.ndim - 2 - c + k
    out = np.tensordot(matrix, psi, axes=([1], [ax]))
    return np.moveaxis(out, 0, ax)


def _controlled_powers(psi, k, params, walk, inverse):
    ax = psi.ndim - 2 - params.c + k
    n = 1 << params.a
    ts = range(params.a - 1, -1, -1) if inverse else range(params.a)
    step = walk.apply_inverse if inverse else walk.apply
    for t in ts:
        sel = np.array([j for j in range(n) if (j >> t) & 1])
        sub = np.take(psi, sel, axis=ax)
        for _ in range(1 << t):
            sub = step(sub)
        index = [slice(None)] * psi.ndim
        index[ax] = sel
        psi[tuple(index)] = sub
    return psi


def apply_V(state, walk: WalkOperator, params: PEParams):
    """Forward phase estimation on all ``c`` blocks."""
    psi, lead, tail = _blocks_view(state, params)
    psi = psi.copy()
    H = hadamard_matrix(params.a)
    Fd = inverse_qft_matrix(params.a)
    for k in range(params.c):
        psi = _apply_on_block(psi, k, params.c, H)
        psi = _controlled_powers(psi, k, params, walk, inverse=False)
        psi = _apply_on_block(psi, k, params.c, Fd)
    return psi.reshape(lead + (params.probe_dim,) + tail)


def apply_V_inverse(state, walk: WalkOperator, params: PEParams):
    psi, lead, tail = _blocks_view(state, params)
    psi = psi.copy()
    H = hadamard_matrix(params.a)
    F = inverse_qft_matrix(params.a).conj().T
    for k in range(params.c - 1, -1, -1):
        psi = _apply_on_block(psi, k, params.c, F)
        psi = _controlled_powers(psi, k, params, walk, inverse=True)
        psi = _apply_on_block(psi, k, params.c, H)
    return psi.reshape(lead + (params.probe_dim,) + tail)


def apply_Q(state, params: PEParams | None = None):
    """Negate the component whose probes are all zero."""
    out = np.array(state, dtype=complex)
    out[..., 0, :, :] *= -1
    return out


def apply_R_tar_approx(state, walk: WalkOperator, params: PEParams):
    """``V^dagger Q V``."""
    return apply_V_inverse(apply_Q(apply_V(state, walk, params)), walk, params)


def exact_R_tar(state, psi0):
    """``(1 - 2 |psi0><psi0|)`` on the walk registers."""
    state = np.asarray(state, dtype=complex)
    overlap = np.einsum("ij,...ij->...", psi0.conj(), state)
    return state - 2 * overlap[..., None, None] * psi0


def with_probes(walk_state, params: PEParams):
    """``walk_state (x) |0^{ac}>`` (probe axis inserted before R1, R2)."""
    walk_state = np.asarray(walk_state, dtype=complex)
    out = np.zeros(walk_state.shape[:-2] + (params.probe_dim,) + walk_state.shape[-2:], dtype=complex)
    out[..., 0, :, :] = walk_state
    return out


def busy_inputs(net, walk: WalkOperator) -> np.ndarray:
    """psi0 and the busy eigenvectors of W, stacked along a leading axis."""
    M_hyb = build_M_hyb(build_M1(net), build_M2(net))
    basis = singular_busy_basis(M_hyb, walk.apply_U)
    return np.array([stationary_state(net)] + basis.vectors()[1:])


def measure_reflection_error(net, params: PEParams, walk: WalkOperator | None = None) -> float:
    """Largest ``||R~_tar (psi (x) 0) - (R_tar psi) (x) 0||`` over the busy eigenbasis.

    Because each basis vector is a W eigenvector the errors of different
    inputs are mutually orthogonal, so this maximum is the operator-norm error
    on the busy subspace.
    """
    walk = walk or WalkOperator(net)
    inputs = busy_inputs(net, walk)
    out = apply_R_tar_approx(with_probes(inputs, params), walk, params)
    target = with_probes(exact_R_tar(inputs, stationary_state(net)), params)
    err = np.linalg.norm((out - target).reshape(len(inputs), -1), axis=1)
    return float(err.max())


def zero_bin_amplitude(phase: float, a: int) -> complex:
    """Probe-zero amplitude of one block for a W eigenvalue ``exp(2 pi i phase)``."""
    j = np.arange(1 << a)
    return complex(np.exp(2j * np.pi * j * phase).mean())
