import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from szegedy_gibbs import nets

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@st.composite
def random_nets(draw, max_bits=4, max_nodes=4):
    """Random positive networks with at most ``max_bits`` bits."""
    seed = draw(st.integers(0, 2**31 - 1))
    n = draw(st.integers(1, max_nodes))
    cards = []
    for _ in range(n):
        k = draw(st.sampled_from([2, 2, 4]))
        if sum(c.bit_length() - 1 for c in cards) + k.bit_length() - 1 <= max_bits:
            cards.append(k)
    edge_prob = draw(st.sampled_from([0.0, 0.5, 1.0]))
    return nets.random_network(seed, len(cards), cards, edge_prob=edge_prob)


@pytest.fixture
def two_node():
    return nets.two_node_example()


@pytest.fixture
def seeded3():
    return nets.seeded_three_node()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


SYMMETRIC_NETS = {
    "single_uniform": lambda: nets.single_node(0.5),
    "single_p03": lambda: nets.single_node(0.3),
    "independent_uniform2": lambda: nets.uniform_independent(2),
    "independent_skewed2": lambda: nets.independent([0.3, 0.8]),
    "independent3": lambda: nets.independent([0.2, 0.5, 0.9]),
}

GENERIC_NETS = {
    "two_node": nets.two_node_example,
    "seeded3": nets.seeded_three_node,
    "chain3": nets.chain,
    "collider": nets.collider,
    "wide": lambda: nets.random_network(11, 2, cardinalities=[4, 2]),
}


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
