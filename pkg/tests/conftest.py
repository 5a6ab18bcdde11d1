import pytest

from tanglewalk import OrientedGraph


@pytest.fixture
def tangle2() -> OrientedGraph:
    """Two nodes, unit weights, forward/backward edges between them."""
    return OrientedGraph(2, (1, 1), frozenset({(0, 2), (2, 0), (1, 3), (3, 1)}))


@pytest.fixture
def self_loop_graph() -> OrientedGraph:
    """Single node with a self-loop on its positive orientation, weight 2."""
    return OrientedGraph(1, (2,), frozenset({(0, 0), (1, 1)}))
