"""Dual Gibbs kernels of a Bayesian network and their spectral data.

Transition matrices are dense ``(N_S, N_S)`` arrays indexed ``M[y, x] = M(y|x)``
over packed states, so stochastic kernels have unit column sums.

``M1`` sweeps the nodes in order 1..N, each resampled from its full
conditional given the newest values of all other nodes. ``M2`` is the dual
kernel in which every node conditions on the *old* values of the nodes before
it and the *new* values of the nodes after it (equivalently, the sweep N..1).
The pair satisfies ``M1(y|x) pi(x) = M2(x|y) pi(y)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import schur
from scipy.optimize import linear_sum_assignment
from scipy.sparse.csgraph import connected_components

from .bayesnet import BayesianNetwork, conditional_table, full_conditional, markov_blanket
from .errors import DegenerateTopEigenvalue, SingularPi, ZeroConditioningEvent

MAX_DENSE_BITS = 8
TOP_TOL = 1e-9
NORMAL_TOL = 1e-9
CLUSTER_TOL = 1e-5


def _check_size(net):
    if net.n_bits > MAX_DENSE_BITS:
        raise ValueError(
            f"dense kernels are limited to {MAX_DENSE_BITS} bits, net has {net.n_bits}"
        )


def gibbs_conditionals(net: BayesianNetwork):
    """Per node, P(x_i | x_MB(i)) broadcast over the full node tensor.

    Returns a list of ``(cond, undefined)`` pairs. ``cond`` has one axis per
    node, of length 1 for nodes outside ``{i} | MB(i)``; ``undefined`` (same
    shape minus nothing) flags blanket configurations of probability zero.
    """
    out = []
    for i in range(net.n_nodes):
        given = sorted(markov_blanket(net, i))
        table, defined = conditional_table(net, i, given)
        # table axes: (given..., i) -> node order
        axes = given + [i]
        order = np.argsort(axes)
        table = np.transpose(table, order)
        shape = [1] * net.n_nodes
        for a in axes:
            shape[a] = net.cardinalities[a]
        cond = table.reshape(shape)
        und_shape = list(shape)
        und_shape[i] = 1
        undefined = ~np.expand_dims(defined, axis=-1)
        undefined = np.transpose(undefined, order).reshape(und_shape)
        out.append((cond, undefined))
    return out


def _on_pair_axes(arr, n, old_nodes):
    """Lift an n-axis node tensor to 2n axes (new states first, then old).

    Nodes listed in ``old_nodes`` are read from the old-state (column) axes.
    """
    lifted = np.expand_dims(arr, axis=tuple(range(n, 2 * n)))
    for j in old_nodes:
        lifted = np.swapaxes(lifted, j, n + j)
    return lifted


def _sweep_kernel(net, order, old_for):
    n = net.n_nodes
    N = net.n_states
    conds = gibbs_conditionals(net)
    kernel = np.ones([1] * (2 * n))
    for i in order:
        cond, undefined = conds[i]
        old = old_for(i)
        factor = _on_pair_axes(cond, n, old)
        bad = _on_pair_axes(undefined, n, old)
        live = np.broadcast_to(kernel > 0, np.broadcast_shapes(kernel.shape, bad.shape))
        hit = live & bad
        if np.any(hit):
            idx = np.argwhere(hit)[0]
            raise ZeroConditioningEvent(
                f"full conditional of node {net.names[i]!r} is undefined "
                f"(new/old partial configuration {tuple(int(v) for v in idx)})",
                node=i,
                configuration=tuple(int(v) for v in idx),
            )
        kernel = kernel * np.where(np.isnan(factor), 0.0, factor)
    full = np.broadcast_to(kernel, tuple(net.cardinalities) * 2)
    return np.ascontiguousarray(full).reshape(N, N)


def build_M1(net: BayesianNetwork) -> np.ndarray:
    """Forward-sweep Gibbs kernel: M1(y|x) = prod_i P(y_i | y_<i, x_>i)."""
    _check_size(net)
    n = net.n_nodes
    return _sweep_kernel(net, range(n), lambda i: range(i + 1, n))


def build_M2(net: BayesianNetwork) -> np.ndarray:
    """Dual kernel: M2(y|x) = prod_i P(y_i | x_<i, y_>i)."""
    _check_size(net)
    n = net.n_nodes
    return _sweep_kernel(net, range(n - 1, -1, -1), lambda i: range(i))


def build_lambda(M: np.ndarray) -> np.ndarray:
    """Entrywise square root of a kernel."""
    return np.sqrt(M)


def build_M_hyb(M1: np.ndarray, M2: np.ndarray) -> np.ndarray:
    """M_hyb(y|x) = sqrt(M2(x|y)) * sqrt(M1(y|x)). Not stochastic in general."""
    return np.sqrt(M2.T * M1)


def check_pair_detailed_balance(M1, M2, pi) -> float:
    """max over (x, y) of |M1(y|x) pi(x) - M2(x|y) pi(y)|."""
    pi = np.asarray(pi)
    return float(np.max(np.abs(M1 * pi[None, :] - M2.T * pi[:, None])))


def stationarity_residuals(M1, M2, M_hyb, pi) -> dict:
    """Infinity-norm residuals of M1 pi = pi, M2 pi = pi and M_hyb sqrt(pi) = sqrt(pi)."""
    pi = np.asarray(pi)
    root = np.sqrt(pi)
    return {
        "M1": float(np.max(np.abs(M1 @ pi - pi))),
        "M2": float(np.max(np.abs(M2 @ pi - pi))),
        "M_hyb": float(np.max(np.abs(M_hyb @ root - root))),
    }


def is_column_stochastic(M, tol=1e-12) -> bool:
    return bool(np.all(M >= 0) and np.max(np.abs(M.sum(axis=0) - 1.0)) <= tol)


@dataclass(frozen=True)
class SpectralData:
    """Sorted eigen-decomposition of a kernel.

    ``eigenvalues[0]`` is the Perron eigenvalue, the rest follow in descending
    modulus (ties by real then imaginary part, descending). Each eigenvalue is
    ``exp(i eta_j) cos(phi_j)`` with ``phi_j`` in [0, pi/2] and ``eta_j`` in
    [0, 2 pi). When the matrix is normal the eigenvector columns come from a
    complex Schur factorization and are orthonormal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    phis: np.ndarray
    etas: np.ndarray
    delta: float
    orthonormality_residual: float
    normality_residual: float

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    def reconstruction_residual(self) -> float:
        rebuilt = np.exp(1j * self.etas) * np.cos(self.phis)
        return float(np.max(np.abs(rebuilt - self.eigenvalues)))

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[float(m.real), float(m.imag)] for m in self.eigenvalues],
            "moduli": [float(abs(m)) for m in self.eigenvalues],
            "phi": [float(p) for p in self.phis],
            "eta": [float(e) for e in self.etas],
            "delta": float(self.delta),
            "orthonormality_residual": float(self.orthonormality_residual),
            "normality_residual": float(self.normality_residual),
        }


def _sort_order(values, decimals=12):
    mod = np.round(np.abs(values), decimals)
    re = np.round(values.real, decimals)
    im = np.round(values.imag, decimals)
    # lexsort sorts by the last key first
    return np.lexsort((-im, -re, -mod))


def _fix_phase(vectors):
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        j = int(np.argmax(np.abs(col)))
        if abs(col[j]) > 0:
            out[:, k] = col * (abs(col[j]) / col[j])
        norm = np.linalg.norm(out[:, k])
        if norm > 0:
            out[:, k] /= norm
    return out


def spectrum(M: np.ndarray) -> SpectralData:
    """Dense eigen-decomposition with the ordering and phase conventions above."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    normality = float(np.linalg.norm(M @ M.T - M.T @ M))
    if normality < NORMAL_TOL:
        T, Z = schur(M.astype(complex), output="complex")
        values = np.diag(T).copy()
        vectors = Z
    else:
        values, vectors = np.linalg.eig(M)
    order = _sort_order(values)
    values = values[order]
    vectors = _fix_phase(vectors[:, order].astype(complex))

    on_circle = np.abs(values) > 1.0 - TOP_TOL
    if np.count_nonzero(on_circle) > 1:
        raise DegenerateTopEigenvalue(
            f"{np.count_nonzero(on_circle)} eigenvalues have modulus within "
            f"{TOP_TOL} of 1: {values[on_circle]}"
        )
    moduli = np.abs(values)
    phis = np.arccos(np.clip(moduli, 0.0, 1.0))
    etas = np.where(moduli > 1e-14, np.mod(np.angle(values), 2 * np.pi), 0.0)
    # the Perron eigenvalue is 1 by construction; drop arccos rounding noise
    if abs(values[0] - 1.0) < 1e-12:
        phis[0] = etas[0] = 0.0
    delta = float(1.0 - moduli[1]) if len(values) > 1 else 1.0
    gram = vectors.conj().T @ vectors
    ortho = float(np.max(np.abs(gram - np.eye(len(values)))))
    return SpectralData(values, vectors, phis, etas, delta, ortho, normality)


def cluster_centroids(values, tol=CLUSTER_TOL) -> np.ndarray:
    """Replace every eigenvalue by the mean of its cluster (single linkage at ``tol``).

    A defective eigenvalue splits into a ring of radius about
    ``eps**(1/k)`` under rounding, while the mean of the ring moves only by
    O(eps). Comparing centroids keeps the comparison well conditioned.
    """
    values = np.asarray(values, dtype=complex).ravel()
    if values.size == 0:
        return values
    adjacent = np.abs(values[:, None] - values[None, :]) < tol
    n_clusters, labels = connected_components(adjacent, directed=False)
    out = values.copy()
    for k in range(n_clusters):
        members = labels == k
        out[members] = values[members].mean()
    return out


def multiset_distance(a, b, cluster_tol=None) -> float:
    """Largest pairwise gap under the optimal one-to-one matching of two value lists.

    With ``cluster_tol`` both lists are first replaced by their cluster centroids.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.shape != b.shape:
        raise ValueError("multisets have different sizes")
    if a.size == 0:
        return 0.0
    if cluster_tol is not None:
        a, b = cluster_centroids(a, cluster_tol), cluster_centroids(b, cluster_tol)
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))


class SpectraComparison(NamedTuple):
    mismatch: float
    m2_similarity_residual: float
    hyb_similarity_residual: float
    raw_mismatch: float


def verify_spectra_equal(M1, M2, M_hyb, pi) -> SpectraComparison:
    """Compare the spectra of M1, M2 and M_hyb and check the diagonal similarities.

    ``M2^T = D^-1 M1 D`` and ``M_hyb^T = D^-1/2 M2 D^1/2`` with ``D = diag(pi)``.
    ``mismatch`` compares cluster centroids (see :func:`cluster_centroids`);
    ``raw_mismatch`` compares the eigenvalues as returned by LAPACK.
    """
    pi = np.asarray(pi, dtype=float)
    if np.any(pi <= 0):
        raise SingularPi("pi has zero entries; diag(pi) is not invertible")
    e1 = np.linalg.eigvals(M1)
    e2 = np.linalg.eigvals(M2)
    eh = np.linalg.eigvals(M_hyb)
    pairs = ((e1, e2), (e1, eh), (e2, eh))
    mismatch = max(multiset_distance(p, q, CLUSTER_TOL) for p, q in pairs)
    raw = max(multiset_distance(p, q) for p, q in pairs)
    sim2 = np.abs(M2.T - (M1 * pi[None, :]) / pi[:, None]).max()
    root = np.sqrt(pi)
    simh = np.abs(M_hyb.T - (M2 * root[None, :]) / root[:, None]).max()
    return SpectraComparison(float(mismatch), float(sim2), float(simh), float(raw))


def classical_gibbs_step(net: BayesianNetwork, x, rng) -> tuple:
    """One forward sweep: resample nodes 1..N in order from their full conditionals."""
    state = list(x)
    for i in range(net.n_nodes):
        probs = full_conditional(net, i, state)
        state[i] = int(rng.choice(len(probs), p=probs))
    return tuple(state)


class GibbsSampler:
    """Vectorized forward sweeps over a batch of chains (rows of an int array)."""

    def __init__(self, net: BayesianNetwork):
        self.net = net
        self._conds = gibbs_conditionals(net)

    def sweep(self, states: np.ndarray, rng) -> np.ndarray:
        states = np.array(states, dtype=np.int64, copy=True)
        n_chains = states.shape[0]
        for i, (cond, undefined) in enumerate(self._conds):
            idx = tuple(
                states[:, j] if cond.shape[j] > 1 and j != i else np.zeros(n_chains, dtype=np.int64)
                for j in range(self.net.n_nodes)
            )
            bad = undefined[idx]
            if np.any(bad):
                row = int(np.argmax(bad))
                raise ZeroConditioningEvent(
                    f"full conditional of node {self.net.names[i]!r} is undefined",
                    node=i,
                    configuration=tuple(int(v) for v in states[row]),
                )
            k = self.net.cardinalities[i]
            probs = np.moveaxis(cond, i, -1)
            idx_wo = tuple(ix for j, ix in enumerate(idx) if j != i)
            rows = np.broadcast_to(probs[idx_wo], (n_chains, k))
            cdf = np.cumsum(rows, axis=1)
            u = rng.random(n_chains) * cdf[:, -1]
            states[:, i] = np.minimum((u[:, None] >= cdf).sum(axis=1), k - 1)
        return states


def export_csv(M: np.ndarray, path) -> None:
    """Write ``y,x,value`` rows (header included) for external diffing."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y", "x", "value"])
        for y in range(M.shape[0]):
            for x in range(M.shape[1]):
                writer.writerow([y, x, repr(float(M[y, x]))])
