"""Independent reference computations used to derive and freeze test values.

Everything here works from the CPTs directly, in mpmath arithmetic where the
result is compared at tight tolerance, and shares no code with the package
beyond the network container.
"""

import itertools

import mpmath as mp
import numpy as np

mp.mp.dps = 40


def joint_mp(net):
    """pi over packed states, each term a product of CPT entries in mpmath."""
    out = []
    for x in itertools.product(*[range(k) for k in net.cardinalities]):
        p = mp.mpf(1)
        for i, node in enumerate(net.nodes):
            row = 0
            for q in node.parents:
                row = row * net.cardinalities[q] + x[q]
            p *= mp.mpf(float(node.cpt[row, x[i]]))
        out.append(p)
    return out


def _states(net):
    return list(itertools.product(*[range(k) for k in net.cardinalities]))


def full_conditional_mp(net, pi, i, z):
    """P(z_i = . | z_{-i}) by brute-force summation of the joint."""
    states = _states(net)
    index = {s: n for n, s in enumerate(states)}
    weights = []
    for v in range(net.cardinalities[i]):
        w = list(z)
        w[i] = v
        weights.append(pi[index[tuple(w)]])
    total = sum(weights)
    return [w / total for w in weights]


def kernel_mp(net, reverse=False):
    """M1 (forward sweep) or M2 (dual sweep) as an mpmath matrix M[y, x]."""
    pi = joint_mp(net)
    states = _states(net)
    n = net.n_nodes
    N = len(states)
    M = mp.zeros(N, N)
    order = range(n - 1, -1, -1) if reverse else range(n)
    for xi, x in enumerate(states):
        for yi, y in enumerate(states):
            p = mp.mpf(1)
            for i in order:
                z = [y[j] if ((j >= i) if reverse else (j <= i)) else x[j] for j in range(n)]
                p *= full_conditional_mp(net, pi, i, z)[y[i]]
            M[yi, xi] = p
    return M


def hybrid_mp(net):
    M1 = kernel_mp(net)
    M2 = kernel_mp(net, reverse=True)
    N = M1.rows
    H = mp.zeros(N, N)
    for y in range(N):
        for x in range(N):
            H[y, x] = mp.sqrt(M2[x, y] * M1[y, x])
    return H


def eigenvalues_mp(M):
    """Eigenvalues from mpmath's QR eigensolver, returned as numpy complex."""
    E = mp.eig(M, left=False, right=False)
    return np.array([complex(e) for e in E])


def to_numpy(M):
    return np.array([[float(M[i, j]) for j in range(M.cols)] for i in range(M.rows)])


def sorted_spectrum(values, decimals=12):
    """Perron value first, then descending modulus, real part, imaginary part."""
    values = np.asarray(values, dtype=complex)
    key = np.lexsort(
        (-np.round(values.imag, decimals), -np.round(values.real, decimals), -np.round(np.abs(values), decimals))
    )
    return values[key]


def grover_sweep(p0, max_L=10):
    """First local maximum of sin^2((2L+1) theta) over L = 1..max_L.

    Later peaks of the periodic success curve are ignored.
    """
    theta = np.arcsin(np.sqrt(p0))
    f = np.sin((2 * np.arange(1, max_L + 2) + 1) * theta) ** 2
    for L in range(1, max_L + 1):
        if f[L - 1] >= f[L]:
            return L
    return max_L


def dense_walk(U, N):
    """W = U R_check U^dagger R_hat from a dense U."""
    idx = np.arange(N * N)
    r_hat = np.where(idx // N == 0, -1.0, 1.0)
    r_check = np.where(idx % N == 0, -1.0, 1.0)
    return U @ np.diag(r_check) @ U.conj().T @ np.diag(r_hat)


def reflection_error_closed_form(thetas, a, c):
    """2 |zero-bin amplitude|^c maximized over the walk phases +-2 theta / 2 pi."""
    j = np.arange(2**a)
    worst = 0.0
    for th in thetas:
        for s in (1, -1):
            amp = abs(np.exp(2j * np.pi * j * s * th / np.pi).mean())
            worst = max(worst, 2 * amp**c)
    return worst
