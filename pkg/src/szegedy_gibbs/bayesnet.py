"""Discrete Bayesian networks with power-of-two node cardinalities.

States are packed into a single index in ``[0, N_S)`` with node 0 in the most
significant position (C order over the node axes), so a node of cardinality
``2**b`` occupies a contiguous group of ``b`` bits.

Network file format (JSON)::

    {"nodes": [
        {"name": "rain", "cardinality": 2, "parents": [], "cpt": [[0.8, 0.2]]},
        {"name": "wet", "cardinality": 2, "parents": ["rain"],
         "cpt": [[0.9, 0.1], [0.2, 0.8]]}
    ]}

``cpt`` has one row per parent configuration. Row ``r`` is the configuration
whose packed value is ``r`` when the parents are read in the listed order,
first parent most significant; entry ``cpt[r][v]`` is ``P(node = v | parents = r)``.
Nodes must be listed in topological order (parents before children).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import NetworkFormatError, ZeroConditioningEvent

ROW_SUM_TOL = 1e-12

Assignment = tuple  # one value per node, node order


@dataclass(frozen=True, eq=False)
class NodeSpec:
    """One node: its name, cardinality, parent indices and CPT.

    ``cpt`` has shape ``(prod(parent cardinalities), cardinality)``.
    """

    name: str
    cardinality: int
    parents: tuple = ()
    cpt: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        k = self.cardinality
        if not isinstance(k, (int, np.integer)) or k < 2 or (k & (k - 1)) != 0:
            raise NetworkFormatError(
                f"cardinality must be a power of two >= 2, got {k!r}",
                field=f"{self.name}.cardinality",
            )
        object.__setattr__(self, "parents", tuple(int(p) for p in self.parents))
        cpt = np.array(self.cpt, dtype=float)
        if cpt.ndim == 1:
            cpt = cpt[None, :]
        if cpt.ndim != 2 or cpt.shape[1] != k:
            raise NetworkFormatError(
                f"cpt must have rows of length {k}, got shape {cpt.shape}",
                field=f"{self.name}.cpt",
            )
        for r, row in enumerate(cpt):
            if not np.all(np.isfinite(row)) or np.any(row < 0):
                raise NetworkFormatError(
                    "negative or non-finite probability", field=f"{self.name}.cpt[{r}]"
                )
            if abs(row.sum() - 1.0) > ROW_SUM_TOL:
                raise NetworkFormatError(
                    f"row sums to {float(row.sum()):.12g}, not 1", field=f"{self.name}.cpt[{r}]"
                )
        cpt.setflags(write=False)
        object.__setattr__(self, "cpt", cpt)

    @property
    def n_bits(self) -> int:
        return self.cardinality.bit_length() - 1


class BayesianNetwork:
    """An immutable discrete Bayesian network.

    Parameters
    ----------
    nodes : sequence of NodeSpec
        Nodes in topological order; every parent index must be smaller than
        the index of its child.
    """

    def __init__(self, nodes: Sequence[NodeSpec]):
        nodes = tuple(nodes)
        if not nodes:
            raise NetworkFormatError("network has no nodes", field="nodes")
        names = [n.name for n in nodes]
        if len(set(names)) != len(names):
            raise NetworkFormatError("duplicate node names", field="nodes")
        for i, node in enumerate(nodes):
            if len(set(node.parents)) != len(node.parents):
                raise NetworkFormatError("repeated parent", field=f"nodes[{i}].parents")
            for p in node.parents:
                if not 0 <= p < i:
                    raise NetworkFormatError(
                        f"parent index {p} does not precede node {i} "
                        "(nodes must be topologically ordered)",
                        field=f"nodes[{i}].parents",
                    )
            n_rows = math.prod(nodes[p].cardinality for p in node.parents)
            if node.cpt.shape[0] != n_rows:
                raise NetworkFormatError(
                    f"expected {n_rows} cpt rows, got {node.cpt.shape[0]}",
                    field=f"nodes[{i}].cpt",
                )
        self._nodes = nodes

    # -- structure -------------------------------------------------------

    @property
    def nodes(self) -> tuple:
        return self._nodes

    @property
    def n_nodes(self) -> int:
        return len(self._nodes)

    @cached_property
    def names(self) -> tuple:
        return tuple(n.name for n in self._nodes)

    @cached_property
    def cardinalities(self) -> tuple:
        return tuple(n.cardinality for n in self._nodes)

    @cached_property
    def node_bits(self) -> tuple:
        return tuple(n.n_bits for n in self._nodes)

    @property
    def n_bits(self) -> int:
        return sum(self.node_bits)

    @property
    def n_states(self) -> int:
        return 1 << self.n_bits

    @cached_property
    def bit_offsets(self) -> tuple:
        """First qubit of each node inside an ``n_bits``-qubit register (node 0 first)."""
        offs, acc = [], 0
        for b in self.node_bits:
            offs.append(acc)
            acc += b
        return tuple(offs)

    def parents(self, i: int) -> tuple:
        return self._nodes[i].parents

    def children(self, i: int) -> tuple:
        return tuple(j for j, n in enumerate(self._nodes) if i in n.parents)

    def index(self, name: str) -> int:
        return self.names.index(name)

    # -- state packing ---------------------------------------------------

    def pack(self, values: Sequence[int]) -> int:
        """Packed state index of a full assignment."""
        if len(values) != self.n_nodes:
            raise ValueError(f"expected {self.n_nodes} values, got {len(values)}")
        for v, k in zip(values, self.cardinalities):
            if not 0 <= v < k:
                raise ValueError(f"value {v} out of range for cardinality {k}")
        return int(np.ravel_multi_index(tuple(int(v) for v in values), self.cardinalities))

    def unpack(self, index: int) -> Assignment:
        if not 0 <= index < self.n_states:
            raise ValueError(f"state index {index} out of range")
        return tuple(int(v) for v in np.unravel_index(int(index), self.cardinalities))

    @cached_property
    def state_table(self) -> np.ndarray:
        """Integer array of shape ``(N_S, n_nodes)``; row ``s`` is ``unpack(s)``."""
        grid = np.indices(self.cardinalities).reshape(self.n_nodes, -1).T
        grid.setflags(write=False)
        return grid

    # -- distributions ---------------------------------------------------

    def _parent_config(self, i: int, values: np.ndarray) -> np.ndarray:
        """Packed parent configuration of node ``i`` for each row of ``values``."""
        node = self._nodes[i]
        cfg = np.zeros(values.shape[0], dtype=np.int64)
        for p in node.parents:
            cfg = cfg * self._nodes[p].cardinality + values[:, p]
        return cfg

    @cached_property
    def joint(self) -> np.ndarray:
        """Joint distribution as a tensor with one axis per node."""
        states = self.state_table
        probs = np.ones(states.shape[0])
        for i, node in enumerate(self._nodes):
            probs *= node.cpt[self._parent_config(i, states), states[:, i]]
        out = probs.reshape(self.cardinalities)
        out.setflags(write=False)
        return out

    @property
    def pi(self) -> np.ndarray:
        """Joint distribution flattened over packed state indices."""
        return self.joint.reshape(-1)

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {
                    "name": n.name,
                    "cardinality": int(n.cardinality),
                    "parents": [self._nodes[p].name for p in n.parents],
                    "cpt": n.cpt.tolist(),
                }
                for n in self._nodes
            ]
        }

    def to_json(self, path=None, indent=2) -> str:
        text = json.dumps(self.to_dict(), indent=indent)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    @classmethod
    def from_dict(cls, doc) -> "BayesianNetwork":
        if not isinstance(doc, dict) or "nodes" not in doc:
            raise NetworkFormatError("document must be an object with a 'nodes' list")
        raw = doc["nodes"]
        if not isinstance(raw, list):
            raise NetworkFormatError("must be a list", field="nodes")
        name_to_index = {}
        specs = []
        for i, item in enumerate(raw):
            where = f"nodes[{i}]"
            if not isinstance(item, dict):
                raise NetworkFormatError("must be an object", field=where)
            for key in ("name", "cardinality", "cpt"):
                if key not in item:
                    raise NetworkFormatError(f"missing '{key}'", field=where)
            name = item["name"]
            parents = []
            for p in item.get("parents", []):
                if p not in name_to_index:
                    raise NetworkFormatError(
                        f"unknown or later-listed parent {p!r}", field=f"{where}.parents"
                    )
                parents.append(name_to_index[p])
            try:
                card = int(item["cardinality"])
            except (TypeError, ValueError):
                raise NetworkFormatError("not an integer", field=f"{where}.cardinality")
            cpt = item["cpt"]
            if not isinstance(cpt, list) or not cpt:
                raise NetworkFormatError("must be a non-empty list of rows", field=f"{where}.cpt")
            for r, row in enumerate(cpt):
                if not isinstance(row, list) or len(row) != card:
                    raise NetworkFormatError(
                        f"row must be a list of {card} numbers", field=f"{where}.cpt[{r}]"
                    )
            try:
                spec = NodeSpec(name, card, tuple(parents), cpt)
            except NetworkFormatError as exc:
                # report the document position rather than the node name
                suffix = exc.field[len(str(name)):] if exc.field else ""
                raise NetworkFormatError(exc.reason, field=where + suffix) from None
            name_to_index[name] = i
            specs.append(spec)
        return cls(specs)

    @classmethod
    def from_json(cls, source) -> "BayesianNetwork":
        """Load from a path or a JSON string."""
        text = str(source)
        if not text.lstrip().startswith("{"):
            text = Path(source).read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise NetworkFormatError(f"invalid JSON: {exc}") from None
        return cls.from_dict(doc)

    def __repr__(self):
        return f"BayesianNetwork(nodes={list(self.names)}, n_bits={self.n_bits})"


def joint_probability(net: BayesianNetwork, x: Sequence[int]) -> float:
    """pi(x): product of each node's CPT entry under assignment ``x``."""
    values = np.asarray([list(x)], dtype=np.int64)
    p = 1.0
    for i, node in enumerate(net.nodes):
        p *= node.cpt[net._parent_config(i, values)[0], values[0, i]]
    return float(p)


def markov_blanket(net: BayesianNetwork, i: int) -> frozenset:
    """Parents, children and co-parents of node ``i``."""
    blanket = set(net.parents(i))
    for c in net.children(i):
        blanket.add(c)
        blanket.update(net.parents(c))
    blanket.discard(i)
    return frozenset(blanket)


def full_conditional(net: BayesianNetwork, i: int, rest: Sequence[int]) -> np.ndarray:
    """P(x_i | all other nodes) from the local factors of node ``i``.

    ``rest`` is a full-length assignment; its entry at position ``i`` is
    ignored. Only the Markov blanket of ``i`` is read.
    """
    k = net.cardinalities[i]
    values = np.tile(np.asarray(list(rest), dtype=np.int64), (k, 1))
    values[:, i] = np.arange(k)
    weights = net.nodes[i].cpt[net._parent_config(i, values), values[:, i]].copy()
    for c in net.children(i):
        weights *= net.nodes[c].cpt[net._parent_config(c, values), values[:, c]]
    total = weights.sum()
    if total <= 0.0:
        raise ZeroConditioningEvent(
            f"conditioning event for node {net.names[i]!r} has probability zero",
            node=i,
            configuration=tuple(int(v) for v in rest),
        )
    return weights / total


def conditional_table(net: BayesianNetwork, i: int, given: Sequence[int]):
    """P(x_i | x_given) for every configuration of ``given``.

    Returns ``(table, defined)`` where ``table`` has shape
    ``(k_given[0], ..., k_given[-1], k_i)`` and ``defined`` marks the
    configurations with positive probability. Undefined rows are NaN.
    """
    given = tuple(given)
    keep = sorted(set(given) | {i})
    drop = tuple(a for a in range(net.n_nodes) if a not in keep)
    marg = net.joint.sum(axis=drop) if drop else np.array(net.joint)
    # reorder axes to (given..., i)
    order = [keep.index(g) for g in given] + [keep.index(i)]
    marg = np.transpose(marg, order)
    den = marg.sum(axis=-1, keepdims=True)
    defined = den[..., 0] > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        table = np.where(den > 0, marg / np.where(den > 0, den, 1.0), np.nan)
    return table, defined


def find_support_point(net: BayesianNetwork) -> Assignment:
    """A state with positive probability, chosen greedily in node order.

    Each node takes its most probable value given the values already chosen
    for its parents (ties go to the lowest value).
    """
    chosen = np.zeros((1, net.n_nodes), dtype=np.int64)
    for i, node in enumerate(net.nodes):
        row = node.cpt[net._parent_config(i, chosen)[0]]
        chosen[0, i] = int(np.argmax(row))
    x0 = tuple(int(v) for v in chosen[0])
    assert joint_probability(net, x0) > 0
    return x0
