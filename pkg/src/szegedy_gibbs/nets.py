"""Small networks used in tests, demos and the acceptance suite."""

import numpy as np

from .bayesnet import BayesianNetwork, NodeSpec


def single_node(p1=0.5, cardinality=2):
    """One root node. For binary nodes ``p1 = P(x = 1)``."""
    if cardinality == 2:
        cpt = [[1.0 - p1, p1]]
    else:
        cpt = [np.full(cardinality, 1.0 / cardinality)]
    return BayesianNetwork([NodeSpec("x1", cardinality, (), cpt)])


def two_node_example():
    """x1 -> x2 with P(x1=1)=0.3, P(x2=1|x1=0)=0.2, P(x2=1|x1=1)=0.7."""
    return BayesianNetwork(
        [
            NodeSpec("x1", 2, (), [[0.7, 0.3]]),
            NodeSpec("x2", 2, (0,), [[0.8, 0.2], [0.3, 0.7]]),
        ]
    )


def independent(probs):
    """Independent binary roots with ``P(x_i = 1) = probs[i]``."""
    return BayesianNetwork(
        [NodeSpec(f"x{i + 1}", 2, (), [[1.0 - p, p]]) for i, p in enumerate(probs)]
    )


def uniform_independent(n_nodes):
    return independent([0.5] * n_nodes)


def chain(n_nodes=3, stay=0.8, p_root=0.4):
    """Binary Markov chain x1 -> x2 -> ... where each node copies its parent w.p. ``stay``."""
    nodes = [NodeSpec("x1", 2, (), [[1.0 - p_root, p_root]])]
    for i in range(1, n_nodes):
        nodes.append(NodeSpec(f"x{i + 1}", 2, (i - 1,), [[stay, 1 - stay], [1 - stay, stay]]))
    return BayesianNetwork(nodes)


def collider():
    """x1 -> x3 <- x2."""
    return BayesianNetwork(
        [
            NodeSpec("x1", 2, (), [[0.6, 0.4]]),
            NodeSpec("x2", 2, (), [[0.3, 0.7]]),
            NodeSpec("x3", 2, (0, 1), [[0.9, 0.1], [0.4, 0.6], [0.25, 0.75], [0.05, 0.95]]),
        ]
    )


def copy_chain():
    """x1 uniform and x2 = x1 deterministically; the Gibbs kernel never moves."""
    return BayesianNetwork(
        [
            NodeSpec("x1", 2, (), [[0.5, 0.5]]),
            NodeSpec("x2", 2, (0,), [[1.0, 0.0], [0.0, 1.0]]),
        ]
    )


def coupling_family(g, n_free=1):
    """Two coupled binary nodes plus ``n_free`` independent uniform nodes.

    x1 is uniform and x2 agrees with x1 with probability ``(1 + r) / 2`` where
    ``r = sqrt(1 - (1 - g)**2)``. The Gibbs gap of this net is exactly
    ``delta = (1 - g)**2``, so g in {0.6, 0.8, 0.9, 0.95} sweeps 1/delta over
    two and a half decades.
    """
    r = np.sqrt(1.0 - (1.0 - g) ** 2)
    agree = 0.5 * (1.0 + r)
    nodes = [
        NodeSpec("x1", 2, (), [[0.5, 0.5]]),
        NodeSpec("x2", 2, (0,), [[agree, 1 - agree], [1 - agree, agree]]),
    ]
    for k in range(n_free):
        nodes.append(NodeSpec(f"f{k + 1}", 2, (), [[0.5, 0.5]]))
    return BayesianNetwork(nodes)


def random_network(rng, n_nodes=3, cardinalities=None, edge_prob=0.6, floor=0.05):
    """Random DAG over nodes in index order with strictly positive CPTs.

    Each CPT row is a Dirichlet(1) draw mixed with the uniform vector so every
    entry is at least ``floor / cardinality``; the resulting Gibbs chains are
    primitive.
    """
    rng = np.random.default_rng(rng)
    if cardinalities is None:
        cardinalities = [2] * n_nodes
    nodes = []
    for i, k in enumerate(cardinalities):
        parents = tuple(j for j in range(i) if rng.random() < edge_prob)
        n_rows = int(np.prod([cardinalities[p] for p in parents])) if parents else 1
        rows = (1 - floor) * rng.dirichlet(np.ones(k), size=n_rows) + floor / k
        rows /= rows.sum(axis=1, keepdims=True)
        nodes.append(NodeSpec(f"x{i + 1}", k, parents, rows))
    return BayesianNetwork(nodes)


def seeded_three_node(seed=7):
    """The seeded 3-binary-node fixture shared by tests and the acceptance suite."""
    return random_network(seed, n_nodes=3, edge_prob=1.0)
