"""
Attributed graph container and the Laplacians built from it.

The stored adjacency is symmetric, unweighted and free of self-loops.
The renormalization trick (A + I) is applied only when the Laplacian
bundle is built, so both the plain Laplacian D - A and the renormalized
symmetric Laplacian are available from the same graph.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse as sp
from sklearn.preprocessing import normalize

from pyage.common import as_csr, symmetric_scale
from pyage.errors import DomainError, InputError

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from pyage.common import FloatMatrix, IntPairs

log = logging.getLogger(__file__)

__all__ = (
    "Graph",
    "LaplacianBundle",
    "build_graph",
    "laplacians",
    "rayleigh_quotient",
    "normalize_rows",
)


@dataclass(frozen=True)
class Graph:
    """
    Attributed, undirected graph.

    Attributes:
        adjacency: n x n CSR matrix of 0/1 weights, symmetric, zero diagonal.
        features: dense n x d feature matrix.
        labels: optional class id per node, in [0, class_count).
        class_count: number of classes when labels are known.
        node_ids: original identifiers of the nodes, in row order.
        class_names: original class strings, indexed by class id.
    """

    adjacency: sp.csr_matrix
    features: np.ndarray
    labels: np.ndarray | None = None
    class_count: int | None = None
    node_ids: tuple[str, ...] | None = field(default=None, repr=False)
    class_names: tuple[str, ...] | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def num_edges(self) -> int:
        return self.adjacency.nnz // 2

    def edge_array(self) -> IntPairs:
        """Undirected edges as an (E, 2) array with i < j, row-major order."""
        upper = sp.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return np.column_stack((upper.row[order], upper.col[order])).astype(np.int64)

    def has_edge(self, i: int, j: int) -> bool:
        return self.adjacency[i, j] != 0

    def with_features(self, features: np.ndarray) -> Graph:
        """Same topology and labels, different feature matrix."""
        return build_graph(
            self.edge_array(),
            features,
            self.labels,
            class_count=self.class_count,
            node_ids=self.node_ids,
            class_names=self.class_names,
        )

    def __repr__(self) -> str:
        return (
            f"Graph(n={self.n}, edges={self.num_edges}, d={self.d}, "
            f"classes={self.class_count})"
        )


@dataclass(frozen=True)
class LaplacianBundle:
    """
    Matrices derived from a graph.

    Attributes:
        a_tilde: A + I.
        d_tilde: degree sequence of a_tilde (every entry >= 1).
        l_sym: renormalized symmetric Laplacian I - D~^-1/2 A~ D~^-1/2.
        l_unnorm: combinatorial Laplacian D - A.
    """

    a_tilde: sp.csr_matrix
    d_tilde: np.ndarray
    l_sym: sp.csr_matrix
    l_unnorm: sp.csr_matrix

    @property
    def null_vector(self) -> np.ndarray:
        """D~^1/2 * 1, the eigenvector of l_sym for eigenvalue 0."""
        return np.sqrt(self.d_tilde)


def build_graph(
    edges: Iterable[tuple[int, int]] | np.ndarray,
    features: Sequence[Sequence[float]] | np.ndarray,
    labels: Sequence[int] | np.ndarray | None = None,
    *,
    class_count: int | None = None,
    node_ids: Sequence[str] | None = None,
    class_names: Sequence[str] | None = None,
) -> Graph:
    """
    Build an undirected graph from an edge list and a feature matrix.

    Duplicate edges are collapsed, both directions are stored and
    self-loops are dropped.

    Args:
        edges: (i, j) node index pairs, 0 <= i, j < n.
        features: n x d feature matrix; n is taken from its row count.
        labels: optional class id per node.
        class_count: number of classes; defaults to max(labels) + 1.
        node_ids: original node identifiers, kept for export.
        class_names: original class strings, kept for export.
    """
    x = np.array(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] == 0:
        raise InputError(f"feature matrix must be non-empty and 2-D, got {x.shape}")
    n = x.shape[0]

    pairs = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges)
    pairs = pairs.astype(np.int64).reshape(-1, 2)
    if pairs.size:
        bad = (pairs < 0) | (pairs >= n)
        if bad.any():
            row = int(np.argwhere(bad.any(axis=1))[0, 0])
            i, j = pairs[row]
            raise InputError(f"edge ({i}, {j}) out of range for {n} nodes")

    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    rows = np.concatenate((pairs[:, 0], pairs[:, 1]))
    cols = np.concatenate((pairs[:, 1], pairs[:, 0]))
    adjacency = as_csr(
        sp.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
    )
    adjacency.data[:] = 1.0

    y: np.ndarray | None = None
    if labels is not None:
        y = np.asarray(labels, dtype=np.int64)
        if y.shape != (n,):
            raise InputError(f"expected {n} labels, got {y.size}")
        if class_count is None:
            class_count = int(y.max()) + 1 if n else 0
        if y.size and (y.min() < 0 or y.max() >= class_count):
            raise InputError(f"labels must lie in [0, {class_count})")

    if node_ids is not None and len(node_ids) != n:
        raise InputError(f"expected {n} node ids, got {len(node_ids)}")

    return Graph(
        adjacency=adjacency,
        features=x,
        labels=y,
        class_count=class_count if y is not None else None,
        node_ids=tuple(node_ids) if node_ids is not None else None,
        class_names=tuple(class_names) if class_names is not None else None,
    )


def laplacians(g: Graph) -> LaplacianBundle:
    """Build A + I, its degrees, the renormalized L_sym and D - A."""
    n = g.n
    identity = sp.identity(n, format="csr", dtype=np.float64)

    a_tilde = as_csr(g.adjacency + identity)
    d_tilde = np.asarray(a_tilde.sum(axis=1)).ravel()

    inv_sqrt = 1.0 / np.sqrt(d_tilde)
    l_sym = as_csr(identity - symmetric_scale(a_tilde, inv_sqrt))
    l_sym.eliminate_zeros()

    degrees = np.asarray(g.adjacency.sum(axis=1)).ravel()
    l_unnorm = as_csr(sp.diags(degrees, format="csr") - g.adjacency)

    log.debug("built laplacians for %d nodes, %d stored entries", n, l_sym.nnz)
    return LaplacianBundle(
        a_tilde=a_tilde, d_tilde=d_tilde, l_sym=l_sym, l_unnorm=l_unnorm
    )


def rayleigh_quotient(l: sp.spmatrix | np.ndarray, x: np.ndarray) -> float:
    """
    Return x^T L x / x^T x.

    For the combinatorial Laplacian this is the sum of squared differences
    across edges divided by the signal energy: lower means smoother.
    """
    v = np.asarray(x, dtype=np.float64).ravel()
    energy = float(v @ v)
    if energy == 0.0:
        raise DomainError("Rayleigh quotient of the zero vector is undefined")
    return float(v @ (l @ v)) / energy


def normalize_rows(x: FloatMatrix) -> FloatMatrix:
    """Scale each feature row to unit L1 norm; all-zero rows stay zero."""
    return normalize(np.asarray(x, dtype=np.float64), norm="l1", axis=1)
