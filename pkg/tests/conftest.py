import itertools

import numpy as np
import pytest

from isinglb.graph import Graph


def random_graph(rng: np.random.Generator, p: int, q: float = 0.4) -> Graph:
    pairs = [e for e in itertools.combinations(range(p), 2) if rng.random() < q]
    return Graph(p, tuple(pairs))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def edge_file(tmp_path):
    path = tmp_path / "edge.el"
    path.write_text("2\n0 1\n")
    return path
