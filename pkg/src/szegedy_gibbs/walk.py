"""The Szegedy walk operator W = U (-1)^{pi_check} U^dagger (-1)^{pi_hat}.

``pi_hat`` projects R1 onto ``|0>`` and ``pi_check`` projects R2 onto ``|0>``.
The stationary state is ``psi0 = |0>_R1 |sqrt(pi)>_R2``.

For every net the busy subspace splits into planes spanned by
``|0> (x) u_k`` and ``U |v_k, 0>`` where ``M_hyb = sum_k s_k u_k v_k^T`` is a
singular value decomposition; W rotates each plane by ``+-2 arccos(s_k)``.
When ``M_hyb`` is normal the singular values are the moduli ``cos(phi_j)`` of
its eigenvalues and the planes can be labelled by eigenvectors instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bayesnet import BayesianNetwork
from .chains import build_M1, build_M2, build_M_hyb, multiset_distance, spectrum
from .embedding import QEmbedding, hybrid_block
from .errors import DegeneratePhase, DimensionMismatch

PHASE_TOL = 1e-8
GATE_TOL = 1e-6
MAX_DENSE_W_BITS = 4


def reflect_pihat(state):
    """Negate amplitudes with R1 = 0."""
    out = np.array(state, dtype=complex)
    out[..., 0, :] *= -1
    return out


def reflect_picheck(state):
    """Negate amplitudes with R2 = 0."""
    out = np.array(state, dtype=complex)
    out[..., :, 0] *= -1
    return out


def swap(state):
    """Exchange the R1 and R2 registers."""
    return np.swapaxes(np.asarray(state), -1, -2)


def stationary_state(net: BayesianNetwork) -> np.ndarray:
    """psi0 as an ``(N_S, N_S)`` array."""
    N = net.n_states
    psi = np.zeros((N, N), dtype=complex)
    psi[0, :] = np.sqrt(net.pi)
    return psi


def sample_state(net: BayesianNetwork, x) -> np.ndarray:
    """``|0>_R1 |x>_R2`` for an assignment or a packed index."""
    idx = x if isinstance(x, (int, np.integer)) else net.pack(x)
    N = net.n_states
    psi = np.zeros((N, N), dtype=complex)
    psi[0, idx] = 1.0
    return psi


def zero_r1(vec) -> np.ndarray:
    """``|0>_R1 (x) |vec>_R2``."""
    vec = np.asarray(vec)
    psi = np.zeros((len(vec), len(vec)), dtype=complex)
    psi[0, :] = vec
    return psi


class WalkOperator:
    """Matrix-free (or dense) W with an exact application counter.

    Parameters
    ----------
    net : BayesianNetwork
    backend : {"gates", "dense"}
        ``"gates"`` applies the per-node blocks; ``"dense"`` multiplies by the
        dense U (small nets only).
    completion : str
        Unitary completion used by the embedding.
    """

    def __init__(self, net: BayesianNetwork, backend: str = "gates", completion: str = "gram_schmidt"):
        if backend not in ("gates", "dense"):
            raise ValueError(f"unknown backend {backend!r}")
        self.net = net
        self.backend = backend
        self.embedding = QEmbedding(net, completion)
        self.n_states = net.n_states
        self.applications = 0
        self._U = self.embedding.dense_U() if backend == "dense" else None

    def reset_counter(self) -> None:
        self.applications = 0

    def _check(self, state):
        N = self.n_states
        if np.ndim(state) < 2 or np.shape(state)[-2:] != (N, N):
            raise DimensionMismatch(f"walk state must end with axes ({N}, {N}); got {np.shape(state)}")

    def apply_U(self, state, inverse=False):
        if self._U is None:
            return self.embedding.apply_U(state, inverse=inverse)
        N = self.n_states
        M = self._U.conj().T if inverse else self._U
        flat = np.asarray(state).reshape(np.shape(state)[:-2] + (N * N,))
        return (flat @ M.T).reshape(np.shape(state))

    def apply(self, state):
        """W applied to ``state``; increments the counter by one."""
        self._check(state)
        psi = reflect_pihat(state)
        psi = self.apply_U(psi, inverse=True)
        psi = reflect_picheck(psi)
        psi = self.apply_U(psi)
        self.applications += 1
        return psi

    def apply_inverse(self, state):
        """W^dagger applied to ``state``; also counted as one application."""
        self._check(state)
        psi = self.apply_U(state, inverse=True)
        psi = reflect_picheck(psi)
        psi = self.apply_U(psi)
        psi = reflect_pihat(psi)
        self.applications += 1
        return psi

    __call__ = apply

    def dense(self) -> np.ndarray:
        """Dense W (does not touch the counter)."""
        if self.net.n_bits > MAX_DENSE_W_BITS:
            raise ValueError(f"dense W limited to {MAX_DENSE_W_BITS} bits per register")
        N = self.n_states
        saved = self.applications
        cols = np.eye(N * N, dtype=complex).reshape(N * N, N, N)
        out = self.apply(cols).reshape(N * N, N * N).T
        self.applications = saved
        return out


def apply_W(state, walk: WalkOperator):
    return walk.apply(state)


@dataclass
class BusyBasis:
    """psi0 plus one pair of W eigenvectors per non-stationary mode.

    ``phases[j]`` is the rotation angle of plane j: W psi_plus[j] =
    exp(2i phases[j]) psi_plus[j] and W psi_minus[j] = exp(-2i phases[j]) psi_minus[j].
    ``e1[j], e2[j]`` are the orthonormalized frame of that plane.
    """

    psi0: np.ndarray
    phases: np.ndarray
    psi_plus: list = field(default_factory=list)
    psi_minus: list = field(default_factory=list)
    e1: list = field(default_factory=list)
    e2: list = field(default_factory=list)

    def vectors(self) -> list:
        return [self.psi0] + [v for pair in zip(self.psi_plus, self.psi_minus) for v in pair]

    def gram(self) -> np.ndarray:
        V = np.array([v.ravel() for v in self.vectors()])
        return V.conj() @ V.T


def _plane_pair(e1, image, phase, eta=0.0):
    """Eigenvectors of W in the plane of ``e1`` and ``exp(-i eta) * image``."""
    c, s = np.cos(phase), np.sin(phase)
    rotated = np.exp(-1j * eta) * image
    e2 = (rotated - c * e1) / s
    plus = -1j / (np.sqrt(2) * s) * (rotated - np.exp(-1j * phase) * e1)
    minus = 1j / (np.sqrt(2) * s) * (rotated - np.exp(1j * phase) * e1)
    return e2, plus, minus


def busy_basis(spectral, apply_U, n_states: int | None = None) -> BusyBasis:
    """Busy basis from the eigenvectors of a normal M_hyb.

    ``psi_pm_j = -+ i / (sqrt(2) sin phi_j) (exp(-i eta_j) U SWAP |m_j 0> - exp(-+i phi_j) |m_j 0>)``
    with eigenvalue ``exp(+-2i phi_j)``.

    Raises
    ------
    DegeneratePhase
        If some ``phi_j`` with ``j != 0`` is at most 1e-8.
    """
    V = spectral.eigenvectors
    N = n_states or V.shape[0]
    if np.any(spectral.phis[1:] <= PHASE_TOL):
        j = 1 + int(np.argmin(spectral.phis[1:]))
        raise DegeneratePhase(f"phi_{j} = {spectral.phis[j]:.3e}: |m_{j}| is too close to 1")
    m0 = V[:, 0] * np.sign(V[:, 0].real.sum())
    basis = BusyBasis(psi0=zero_r1(m0), phases=spectral.phis[1:].copy())
    for j in range(1, N):
        e1 = zero_r1(V[:, j])
        image = apply_U(swap(e1))
        e2, plus, minus = _plane_pair(e1, image, spectral.phis[j], spectral.etas[j])
        basis.e1.append(e1)
        basis.e2.append(e2)
        basis.psi_plus.append(plus)
        basis.psi_minus.append(minus)
    return basis


def singular_busy_basis(M_hyb, apply_U) -> BusyBasis:
    """Busy basis from the SVD of M_hyb; valid for every net."""
    u, s, vt = np.linalg.svd(M_hyb)
    N = len(s)
    thetas = np.arccos(np.clip(s, 0.0, 1.0))
    if np.any(thetas[1:] <= PHASE_TOL):
        raise DegeneratePhase("a non-leading singular value of M_hyb is numerically 1")
    sign = np.sign(u[:, 0].sum())
    basis = BusyBasis(psi0=zero_r1(u[:, 0] * sign), phases=thetas[1:].copy())
    for k in range(1, N):
        e1 = zero_r1(u[:, k])
        image = apply_U(swap(zero_r1(vt[k])))
        e2, plus, minus = _plane_pair(e1, image, thetas[k])
        basis.e1.append(e1)
        basis.e2.append(e2)
        basis.psi_plus.append(plus)
        basis.psi_minus.append(minus)
    return basis


def predicted_spectrum(phases, n_states: int) -> np.ndarray:
    """``{1} + {exp(+-2i phase)} + {1} * (N^2 - 2N + 1)``."""
    phases = np.asarray(phases)
    busy = np.concatenate([np.exp(2j * phases), np.exp(-2j * phases)])
    n_perp = n_states**2 - 2 * n_states + 1
    return np.concatenate([[1.0 + 0j], busy, np.ones(n_perp)])


def busy_span(apply_U, n_states: int, tol=1e-10) -> np.ndarray:
    """Orthonormal basis (columns, flattened) of span{|0,y>} + span{U|x,0>}."""
    N = n_states
    A = np.zeros((N * N, N), dtype=complex)
    A[np.arange(N), np.arange(N)] = 1.0  # |0, y> has flat index y
    cols = np.zeros((N, N, N), dtype=complex)
    cols[np.arange(N), np.arange(N), 0] = 1.0
    B = apply_U(cols).reshape(N, N * N).T
    Q, s, _ = np.linalg.svd(np.hstack([A, B]), full_matrices=False)
    return Q[:, s > tol * s[0]]


def perp_vectors(apply_U, n_states: int, count: int, rng) -> list:
    """Random unit vectors orthogonal to both V_A and V_B."""
    N = n_states
    Q = busy_span(apply_U, N)
    out = []
    for _ in range(count):
        v = rng.normal(size=N * N) + 1j * rng.normal(size=N * N)
        v -= Q @ (Q.conj().T @ v)
        v -= Q @ (Q.conj().T @ v)
        out.append((v / np.linalg.norm(v)).reshape(N, N))
    return out


def _max_norm(vectors):
    return float(max((np.linalg.norm(v) for v in vectors), default=0.0))


def verify_walk_spectrum(net: BayesianNetwork, completion="gram_schmidt", n_perp=20, seed=0) -> dict:
    """Residuals of the walk's spectral picture on a small net.

    The report always contains the dense-eigensolver comparison against both
    the eigenvalue-based and the singular-value-based predictions, the
    stationarity of psi0 and the perp-space identity. Checks that rely on an
    orthonormal eigenbasis of M_hyb are reported as skipped when it has none.
    """
    walk = WalkOperator(net, "gates", completion)
    N = net.n_states
    M_hyb = build_M_hyb(build_M1(net), build_M2(net))
    spec = spectrum(M_hyb)
    normal = spec.orthonormality_residual < GATE_TOL
    W = walk.dense()
    w_eigs = np.linalg.eigvals(W)
    U = walk.apply_U
    psi0 = stationary_state(net)

    report = {
        "n_states": N,
        "normal_M_hyb": bool(normal),
        "orthonormality_residual": spec.orthonormality_residual,
        "W_unitarity": float(np.max(np.abs(W.conj().T @ W - np.eye(N * N)))),
        "spectrum_mismatch_eigen": multiset_distance(w_eigs, predicted_spectrum(spec.phis[1:], N)),
        "psi0_fixed": float(np.linalg.norm(walk.apply(psi0) - psi0)),
        "u_swap_psi0": float(np.linalg.norm(U(swap(psi0)) - psi0)),
    }
    sv = np.linalg.svd(M_hyb, compute_uv=False)
    thetas = np.arccos(np.clip(sv[1:], 0.0, 1.0))
    report["spectrum_mismatch_singular"] = multiset_distance(w_eigs, predicted_spectrum(thetas, N))

    rng = np.random.default_rng(seed)
    perp = perp_vectors(U, N, n_perp, rng)
    report["perp_fixed"] = _max_norm(walk.apply(np.array(perp)) - np.array(perp))
    report["busy_dimension"] = int(busy_span(U, N).shape[1])

    # pi_hat (U SWAP)|m_j 0> = m_j |m_j 0>, pi_hat (SWAP U^dag)|m_j 0> = conj(m_j) |m_j 0>
    r4a, r4b = [], []
    for j in range(N):
        mj0 = zero_r1(spec.eigenvectors[:, j])
        a = U(swap(mj0))
        b = swap(U(mj0, inverse=True))
        r4a.append(zero_r1(a[0]) - spec.eigenvalues[j] * mj0)
        r4b.append(zero_r1(b[0]) - np.conj(spec.eigenvalues[j]) * mj0)
    report["swap_eigen"] = _max_norm(r4a)
    report["swap_adjoint_eigen"] = _max_norm(r4b)

    try:
        sb = singular_busy_basis(M_hyb, U)
        res = []
        for th, p, m in zip(sb.phases, sb.psi_plus, sb.psi_minus):
            res.append(walk.apply(p) - np.exp(2j * th) * p)
            res.append(walk.apply(m) - np.exp(-2j * th) * m)
        report["singular_planes"] = _max_norm(res)
        report["singular_gram"] = float(np.max(np.abs(sb.gram() - np.eye(2 * N - 1))))
    except DegeneratePhase as exc:
        report["singular_planes"] = f"skipped: {exc}"

    if not normal:
        for key in ("busy_eigenpairs", "busy_gram", "busy_invariance"):
            report[key] = "skipped: non-normal M_hyb"
        return report
    try:
        bb = busy_basis(spec, U, N)
    except DegeneratePhase as exc:
        for key in ("busy_eigenpairs", "busy_gram", "busy_invariance"):
            report[key] = f"skipped: {exc}"
        return report
    res, inv = [], []
    for th, p, m, e1, e2 in zip(bb.phases, bb.psi_plus, bb.psi_minus, bb.e1, bb.e2):
        res.append(walk.apply(p) - np.exp(2j * th) * p)
        res.append(walk.apply(m) - np.exp(-2j * th) * m)
        frame = np.array([e1.ravel(), e2.ravel()]).T
        q, _ = np.linalg.qr(frame)
        for v in (e1, e2):
            wv = walk.apply(v).ravel()
            inv.append(wv - q @ (q.conj().T @ wv))
    report["busy_eigenpairs"] = _max_norm(res)
    report["busy_gram"] = float(np.max(np.abs(bb.gram() - np.eye(2 * N - 1))))
    report["busy_invariance"] = _max_norm(inv)
    return report


def hybrid_from_walk(walk: WalkOperator) -> np.ndarray:
    """``<0, y| U |x, 0>`` read off the walk's own U."""
    return hybrid_block(walk.apply_U, walk.n_states)
