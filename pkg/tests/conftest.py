import os
from pathlib import Path

import numpy as np
import pytest

from pyage.config import RunConfig
from pyage.data import DATA_DIR_ENV, generate_sbm
from pyage.graph import build_graph


@pytest.fixture
def triangle():
    """K3 with one scalar feature per node."""
    return build_graph([(0, 1), (1, 2), (0, 2)], [[1.0], [2.0], [3.0]])


@pytest.fixture
def path_graph():
    """Path on 21 nodes: 20 edges, identity features."""
    return build_graph([(i, i + 1) for i in range(20)], np.eye(21))


@pytest.fixture
def two_cliques():
    """Two disjoint 4-cliques with block-indicator features."""
    edges = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    edges += [(i + 4, j + 4) for i, j in edges]
    features = np.repeat(np.eye(2), 4, axis=0)
    return build_graph(edges, features, [0] * 4 + [1] * 4)


@pytest.fixture(scope="session")
def sbm_graph():
    """Planted partition: 3 blocks of 50 nodes."""
    g, _ = generate_sbm((50, 50, 50), 0.3, 0.02, feature_noise=0.1, seed=0)
    return g


@pytest.fixture
def make_random_graph():
    """Factory for seeded Erdos-Renyi graphs with Gaussian features."""

    def factory(n, p, d=4, seed=0):
        rng = np.random.default_rng(seed)
        upper = np.triu(rng.random((n, n)) < p, k=1)
        return build_graph(np.argwhere(upper), rng.standard_normal((n, d)))

    return factory


@pytest.fixture
def small_config(tmp_path):
    """A fast run on the planted-partition graph."""
    return RunConfig(
        dataset="sbm",
        t=3,
        h=32,
        max_iter=40,
        update_every=10,
        lr=0.01,
        r_pos_st_ratio=0.05,
        r_pos_ed_ratio=0.02,
        r_neg_st_ratio=0.4,
        r_neg_ed_ratio=0.5,
        spectral_restarts=5,
        out=str(tmp_path / "out"),
    )


@pytest.fixture
def data_dir():
    """Root holding the citation datasets; skips when they are absent."""
    root = Path(os.environ.get(DATA_DIR_ENV, "data"))
    if not (root / "cora.content").is_file():
        pytest.skip(f"cora files not found under {root}")
    return root
