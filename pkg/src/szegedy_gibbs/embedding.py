"""Unitary embeddings U1, U2 of the dual Gibbs kernels and their gate lists.

Two registers R1 and R2 of ``nb`` qubits each hold packed states. A walk
state is an array whose last two axes are ``(R1, R2)``, each of length
``N_S``; the flat basis index is ``r1 * N_S + r2``. Any leading axes (probe
registers, batches) are carried along untouched.

* ``U1 |x>_R1 |0>_R2 = |x>_R1 (Lambda1 |x>)_R2``: node i (in order 1..N)
  writes R2 group i, controlled by the R2 groups of earlier blanket nodes
  and the R1 groups of later blanket nodes.
* ``U2 |0>_R1 |y>_R2 = (Lambda2 |y>)_R1 |y>_R2``: node i (in order N..1)
  writes R1 group i, controlled by the R1 groups of later blanket nodes and
  the R2 groups of earlier blanket nodes.

Both are products of per-node uniformly controlled blocks. The columns not
fixed by these identities are completed by Gram-Schmidt over the standard
basis, which is deterministic but arbitrary; every quantity checked by the
test-suite is independent of that choice.

Gate-list text format, one gate per line in application order::

    MUXRY target=<q> controls=<q,...> angles=<csv>

Qubits ``0..nb-1`` are R1 and ``nb..2nb-1`` are R2, node 0 first and the most
significant qubit of a node first. The gate applies
``[[cos t_b, -sin t_b], [sin t_b, cos t_b]]`` to the target when the controls
read ``b`` (first listed control most significant). Lines starting with
``#`` are comments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .bayesnet import BayesianNetwork, markov_blanket
from .chains import gibbs_conditionals
from .errors import DimensionMismatch, UnsupportedCardinality

COMPLETIONS = ("gram_schmidt", "reversed")
MAX_DENSE_BITS = 5
CLAMP = 1e-15


@dataclass(frozen=True)
class RegisterLayout:
    """Qubit ranges of the two state registers."""

    n_bits: int

    @classmethod
    def for_net(cls, net: BayesianNetwork) -> "RegisterLayout":
        return cls(net.n_bits)

    @property
    def n_states(self) -> int:
        return 1 << self.n_bits

    @property
    def r1(self) -> range:
        return range(0, self.n_bits)

    @property
    def r2(self) -> range:
        return range(self.n_bits, 2 * self.n_bits)

    @property
    def dim(self) -> int:
        return self.n_states**2

    def index(self, r1: int, r2: int) -> int:
        return r1 * self.n_states + r2


# -- node blocks -------------------------------------------------------------


def _complete_sector(v, order):
    """Unitary whose first column is the unit vector ``v``.

    Further columns are the standard basis vectors, taken in ``order``,
    orthogonalized against everything kept so far (two MGS passes).
    """
    k = len(v)
    cols = [np.asarray(v, dtype=float)]
    for e in order:
        if len(cols) == k:
            break
        w = np.zeros(k)
        w[e] = 1.0
        for _ in range(2):
            for c in cols:
                w = w - (c @ w) * c
        norm = np.linalg.norm(w)
        if norm > 1e-10:
            cols.append(w / norm)
    return np.column_stack(cols)


def node_sectors(P, completion="gram_schmidt") -> np.ndarray:
    """Per-control-configuration unitaries of a node block, shape ``(nsa, nsb, nsb)``.

    ``P[b, a] = P(b|a)``. Sector ``a`` has first column ``sqrt(P[:, a])``.
    """
    P = np.asarray(P, dtype=float)
    nsb, nsa = P.shape
    if completion == "gram_schmidt":
        order = range(nsb)
    elif completion == "reversed":
        order = range(nsb - 1, -1, -1)
    else:
        raise ValueError(f"unknown completion {completion!r}; expected one of {COMPLETIONS}")
    amps = np.sqrt(np.clip(P, 0.0, None))
    amps /= np.linalg.norm(amps, axis=0, keepdims=True)
    return np.stack([_complete_sector(amps[:, a], order) for a in range(nsa)])


def build_node_block(P, completion="gram_schmidt") -> np.ndarray:
    """Dense unitary of a single node's uniformly controlled block.

    Parameters
    ----------
    P : array of shape (nsb, nsa)
        ``P[b, a] = P(b|a)`` with unit column sums.

    Returns
    -------
    ndarray of shape (nsb * nsa, nsb * nsa)
        Row and column index ``b * nsa + a``. Column ``(0, a)`` holds
        ``sqrt(P(b|a))`` on rows ``(b, a)``; other columns complete it.
    """
    sectors = node_sectors(P, completion)
    nsa, nsb, _ = sectors.shape
    block = np.zeros((nsb * nsa, nsb * nsa))
    for a in range(nsa):
        block[a::nsa, a::nsa] = sectors[a]
    return block


def node_table(net: BayesianNetwork, i: int, conds=None) -> tuple[np.ndarray, tuple]:
    """``(P, blanket)``: P(x_i | x_blanket) as an ``(k_i, n_configs)`` table.

    Blanket configurations of probability zero get a point mass on 0 (those
    columns are never reached by a live amplitude).
    """
    if conds is None:
        conds = gibbs_conditionals(net)
    cond, _ = conds[i]
    blanket = tuple(sorted(markov_blanket(net, i)))
    P = np.moveaxis(cond, i, 0).reshape(net.cardinalities[i], -1).copy()
    bad = np.isnan(P).any(axis=0)
    P[:, bad] = 0.0
    P[0, bad] = 1.0
    return P, blanket


# -- generic block application ----------------------------------------------


def _apply_blocks(psi, tgt_axes, ctrl_axes, sectors):
    """Apply ``sectors[a]`` to the target axes wherever the control axes read ``a``.

    ``psi`` is a tensor; axes may be negative. Target and control configurations
    are packed in the order the axes are listed (first most significant).
    """
    nd = psi.ndim
    tgt = [ax % nd for ax in tgt_axes]
    ctl = [ax % nd for ax in ctrl_axes]
    moved = np.moveaxis(psi, ctl + tgt, list(range(nd - len(ctl) - len(tgt), nd)))
    rest = moved.shape[: nd - len(ctl) - len(tgt)]
    nsa, nsb = sectors.shape[0], sectors.shape[1]
    flat = moved.reshape(rest + (nsa, nsb))
    out = np.einsum("aij,...aj->...ai", sectors, flat)
    out = out.reshape(moved.shape)
    return np.moveaxis(out, list(range(nd - len(ctl) - len(tgt), nd)), ctl + tgt)


def _embed_dense(sectors, tgt_axes, ctrl_axes, shape):
    """Dense matrix of a controlled block on a register with axis sizes ``shape``.

    Built by explicit index arithmetic, independently of :func:`_apply_blocks`.
    """
    shape = tuple(shape)
    D = int(np.prod(shape))
    cols = np.arange(D)
    digits = np.array(np.unravel_index(cols, shape))
    a = np.zeros(D, dtype=np.int64)
    for ax in ctrl_axes:
        a = a * shape[ax] + digits[ax]
    bt = np.zeros(D, dtype=np.int64)
    for ax in tgt_axes:
        bt = bt * shape[ax] + digits[ax]
    tgt_shape = tuple(shape[ax] for ax in tgt_axes)
    nsb = int(np.prod(tgt_shape))
    G = np.zeros((D, D), dtype=complex)
    for b in range(nsb):
        new = digits.copy()
        for ax, v in zip(tgt_axes, np.unravel_index(b, tgt_shape)):
            new[ax] = v
        rows = np.ravel_multi_index(tuple(new), shape)
        G[rows, cols] = sectors[a, b, bt]
    return G


# -- node-level embedding ----------------------------------------------------


@dataclass(frozen=True)
class NodeGate:
    """One node's block inside U1 or U2, addressed by (register, node) pairs."""

    node: int
    target: tuple  # (register, node)
    controls: tuple  # ((register, node), ...) in node order
    sectors: np.ndarray = field(repr=False)


class QEmbedding:
    """U1, U2 and U = U2^dagger U1 for a network.

    Parameters
    ----------
    net : BayesianNetwork
    completion : {"gram_schmidt", "reversed"}
        How the undetermined columns of each node block are filled in.
    """

    def __init__(self, net: BayesianNetwork, completion: str = "gram_schmidt"):
        self.net = net
        self.completion = completion
        self.layout = RegisterLayout.for_net(net)
        conds = gibbs_conditionals(net)
        self.tables = [node_table(net, i, conds) for i in range(net.n_nodes)]
        self.sectors = [node_sectors(P, completion) for P, _ in self.tables]
        n = net.n_nodes
        self.gates1 = []
        for i in range(n):
            ctrls = tuple((2 if j < i else 1, j) for j in self.tables[i][1])
            self.gates1.append(NodeGate(i, (2, i), ctrls, self.sectors[i]))
        self.gates2 = []
        for i in range(n - 1, -1, -1):
            ctrls = tuple((1 if j > i else 2, j) for j in self.tables[i][1])
            self.gates2.append(NodeGate(i, (1, i), ctrls, self.sectors[i]))

    # axis of (register, node) in the node-level tensor, counted from the end
    def _axis(self, reg, node):
        n = self.net.n_nodes
        return -2 * n + node if reg == 1 else -n + node

    def _to_nodes(self, state):
        state = np.asarray(state)
        N = self.layout.n_states
        if state.ndim < 2 or state.shape[-2:] != (N, N):
            raise DimensionMismatch(
                f"state must end with axes ({N}, {N}) for R1, R2; got shape {state.shape}"
            )
        cards = self.net.cardinalities
        return state.reshape(state.shape[:-2] + cards + cards).astype(complex)

    def _from_nodes(self, psi, lead):
        N = self.layout.n_states
        return psi.reshape(lead + (N, N))

    def _run(self, state, gates, inverse):
        lead = np.shape(state)[:-2]
        psi = self._to_nodes(state)
        seq = reversed(gates) if inverse else gates
        for g in seq:
            sec = np.conj(np.swapaxes(g.sectors, 1, 2)) if inverse else g.sectors
            psi = _apply_blocks(
                psi, [self._axis(*g.target)], [self._axis(*c) for c in g.controls], sec
            )
        return self._from_nodes(psi, lead)

    def apply_U1(self, state, inverse=False):
        return self._run(state, self.gates1, inverse)

    def apply_U2(self, state, inverse=False):
        return self._run(state, self.gates2, inverse)

    def apply_U(self, state, inverse=False):
        """U = U2^dagger U1 (or its inverse)."""
        if inverse:
            return self.apply_U1(self.apply_U2(state), inverse=True)
        return self.apply_U2(self.apply_U1(state), inverse=True)

    # -- dense matrices (independent construction) --

    def _dense(self, gates):
        if self.net.n_bits > MAX_DENSE_BITS:
            raise ValueError(f"dense U limited to {MAX_DENSE_BITS} bits per register")
        n = self.net.n_nodes
        shape = self.net.cardinalities * 2
        pos = lambda reg, node: node if reg == 1 else n + node  # noqa: E731
        total = np.eye(self.layout.dim, dtype=complex)
        for g in gates:
            G = _embed_dense(g.sectors, [pos(*g.target)], [pos(*c) for c in g.controls], shape)
            total = G @ total
        return total

    def dense_U1(self):
        return self._dense(self.gates1)

    def dense_U2(self):
        return self._dense(self.gates2)

    def dense_U(self):
        return build_U(self.dense_U1(), self.dense_U2())


def build_U1(net: BayesianNetwork, layout: RegisterLayout | None = None, completion="gram_schmidt"):
    """Dense U1 (dimension N_S**2)."""
    emb = QEmbedding(net, completion)
    _check_layout(emb, layout)
    return emb.dense_U1()


def build_U2(net: BayesianNetwork, layout: RegisterLayout | None = None, completion="gram_schmidt"):
    """Dense U2 (dimension N_S**2)."""
    emb = QEmbedding(net, completion)
    _check_layout(emb, layout)
    return emb.dense_U2()


def _check_layout(emb, layout):
    if layout is not None and layout != emb.layout:
        raise DimensionMismatch(f"layout {layout} does not match network ({emb.layout})")


def build_U(U1: np.ndarray, U2: np.ndarray) -> np.ndarray:
    return U2.conj().T @ U1


def hybrid_block(U, n_states: int) -> np.ndarray:
    """``A[y, x] = <0, y| U |x, 0>`` from a dense U or an applier callable."""
    N = n_states
    if callable(U):
        cols = np.zeros((N, N, N), dtype=complex)
        cols[np.arange(N), np.arange(N), 0] = 1.0
        out = U(cols)
        return out[:, 0, :].T
    U = np.asarray(U)
    return U[:N, ::N]


class GatedResidual(NamedTuple):
    """A residual that may have been skipped because its precondition failed."""

    value: float | None
    skipped: str | None = None

    @property
    def ran(self) -> bool:
        return self.skipped is None


def verify_eigen_diagonal(U, spectral, layout: RegisterLayout, gate_tol=1e-6) -> GatedResidual:
    """``max_jk |<0, m_j| U |m_k, 0> - m_j delta_jk|``.

    Only meaningful when the eigenvectors of M_hyb are orthonormal; otherwise
    the residual is still computed but marked as skipped.
    """
    A = hybrid_block(U, layout.n_states)
    V = spectral.eigenvectors
    C = V.conj().T @ A @ V
    value = float(np.max(np.abs(C - np.diag(spectral.eigenvalues))))
    if spectral.orthonormality_residual >= gate_tol:
        return GatedResidual(value, "skipped: non-normal M_hyb")
    return GatedResidual(value)


# -- multiplexor gate lists --------------------------------------------------


@dataclass(frozen=True)
class MultiplexorGate:
    """A uniformly controlled gate on qubits of the two registers.

    For binary targets ``angles[b]`` is the rotation angle under control value
    ``b``. Wider targets carry their per-configuration ``sectors`` instead
    and are flagged ``dense``.
    """

    target: tuple
    controls: tuple
    angles: np.ndarray | None = field(default=None, repr=False)
    sectors: np.ndarray | None = field(default=None, repr=False)
    node: int | None = None
    register: int | None = None
    blanket: tuple = ()

    @property
    def dense(self) -> bool:
        return self.angles is None

    def matrices(self) -> np.ndarray:
        """Per-control-value target matrices, shape ``(n_configs, 2**t, 2**t)``."""
        if self.dense:
            return self.sectors
        c, s = np.cos(self.angles), np.sin(self.angles)
        return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)

    def to_line(self) -> str:
        if self.dense:
            raise UnsupportedCardinality(
                f"gate on {len(self.target)} target qubits has no MUXRY form"
            )
        ctrls = ",".join(str(q) for q in self.controls)
        angles = ",".join(repr(float(t)) for t in self.angles)
        return f"MUXRY target={self.target[0]} controls={ctrls} angles={angles}"


@dataclass
class GateList:
    """Gates in application order (the first gate acts first)."""

    n_bits: int
    gates: list
    which: int | None = None

    def to_text(self) -> str:
        lines = [f"# U{self.which} n_bits={self.n_bits}" if self.which else f"# n_bits={self.n_bits}"]
        for g in self.gates:
            if g.node is not None:
                lines.append(f"# node={g.node} register=R{g.register} blanket={list(g.blanket)}")
            lines.append(g.to_line())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, n_bits: int | None = None) -> "GateList":
        gates = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if tok.startswith("n_bits=") and n_bits is None:
                        n_bits = int(tok.split("=", 1)[1])
                continue
            parts = line.split()
            if parts[0] != "MUXRY" or len(parts) != 4:
                raise ValueError(f"cannot parse gate line {raw!r}")
            kv = dict(p.split("=", 1) for p in parts[1:])
            target = (int(kv["target"]),)
            controls = tuple(int(q) for q in kv["controls"].split(",") if q)
            angles = np.array([float(t) for t in kv["angles"].split(",")])
            if len(angles) != 1 << len(controls):
                raise ValueError(f"expected {1 << len(controls)} angles in {raw!r}")
            gates.append(MultiplexorGate(target, controls, angles))
        if n_bits is None:
            raise ValueError("n_bits not given and not found in header")
        return cls(n_bits, gates)

    def apply(self, state, inverse=False):
        """Apply to a state whose last two axes are (R1, R2)."""
        state = np.asarray(state, dtype=complex)
        N = 1 << self.n_bits
        if state.shape[-2:] != (N, N):
            raise DimensionMismatch(f"state must end with axes ({N}, {N})")
        lead = state.shape[:-2]
        nq = 2 * self.n_bits
        psi = state.reshape(lead + (2,) * nq)
        seq = reversed(self.gates) if inverse else self.gates
        for g in seq:
            mats = g.matrices()
            if inverse:
                mats = np.conj(np.swapaxes(mats, 1, 2))
            psi = _apply_blocks(psi, [q - nq for q in g.target], [q - nq for q in g.controls], mats)
        return psi.reshape(lead + (N, N))

    def dense(self) -> np.ndarray:
        """Ordered product as a dense matrix."""
        nq = 2 * self.n_bits
        shape = (2,) * nq
        total = np.eye(1 << nq, dtype=complex)
        for g in self.gates:
            total = _embed_dense(g.matrices(), list(g.target), list(g.controls), shape) @ total
        return total


def decompose_multiplexors(net: BayesianNetwork, which: int, strict: bool = False) -> GateList:
    """Gate list realizing U1 (``which=1``) or U2 (``which=2``) on its defined columns.

    Each node contributes one gate whose controls are the qubits of its
    Markov blanket in the appropriate registers. Binary targets become
    ``MUXRY`` gates with ``angle_b = arccos(sqrt(P(0|b)))``. Wider targets
    raise :class:`UnsupportedCardinality` when ``strict``; otherwise a dense
    per-configuration block is emitted and flagged.
    """
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    emb = QEmbedding(net)
    nb = net.n_bits
    offs = net.bit_offsets

    def qubits(reg, node):
        base = offs[node] + (0 if reg == 1 else nb)
        return tuple(range(base, base + net.node_bits[node]))

    gates = []
    for g in emb.gates1 if which == 1 else emb.gates2:
        P, blanket = emb.tables[g.node]
        tq = qubits(*g.target)
        cq = tuple(q for c in g.controls for q in qubits(*c))
        meta = dict(node=g.node, register=g.target[0], blanket=blanket)
        if len(tq) == 1:
            amp = np.clip(np.sqrt(np.clip(P[0], 0.0, 1.0)), 0.0, 1.0)
            amp = np.where(amp > 1.0 - CLAMP, 1.0, amp)
            gates.append(MultiplexorGate(tq, cq, angles=np.arccos(amp), **meta))
        elif strict:
            raise UnsupportedCardinality(
                f"node {net.names[g.node]!r} has cardinality {net.cardinalities[g.node]}; "
                "only binary targets have a MUXRY form"
            )
        else:
            gates.append(MultiplexorGate(tq, cq, sectors=g.sectors, **meta))
    return GateList(nb, gates, which)


def defined_columns(n_states: int, which: int) -> np.ndarray:
    """Flat indices of the columns fixed by the embedding identity."""
    idx = np.arange(n_states)
    return idx * n_states if which == 1 else idx
