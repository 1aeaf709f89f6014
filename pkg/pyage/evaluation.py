"""
Clustering, link scoring, the metrics reported for both tasks and the
choice of the best training snapshot.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Literal

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import expit
from scipy.stats import rankdata
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score
from sklearn.metrics.cluster import contingency_matrix
from sklearn.preprocessing import normalize

from pyage.encoder import SimilarityState, similarity
from pyage.errors import ConfigurationError, DomainError
from pyage.spectral import top_m_eigenpairs

if TYPE_CHECKING:
    from collections.abc import Sequence

    from pyage.common import FloatMatrix, IntPairs
    from pyage.encoder import EmbeddingSnapshot

log = logging.getLogger(__file__)

__all__ = (
    "DBI_SENTINEL",
    "ClusterResult",
    "ClusteringScores",
    "RankingScores",
    "SelectionContext",
    "kmeans",
    "spectral_clustering",
    "cluster_embedding",
    "clustering_metrics",
    "dbi",
    "link_logits",
    "link_scores",
    "ranking_metrics",
    "score_dbi",
    "select_snapshot",
    "metrics_document",
)

# returned by dbi() when two clusters share a centroid
DBI_SENTINEL = 1e10
DEGENERATE_EIGENVALUE = 1e-10


@dataclass(frozen=True)
class ClusterResult:
    """
    Hard partition of the nodes.

    Attributes:
        assignments: cluster id per node, each in [0, m).
        m: number of clusters asked for.
        inertia: k-means objective of the partition.
        degenerate: True when the input carried no usable cluster structure.
    """

    assignments: np.ndarray
    m: int
    inertia: float | None = None
    degenerate: bool = False

    def __post_init__(self) -> None:
        if self.assignments.size == 0:
            raise DomainError("a partition needs at least one node")
        if self.assignments.min() < 0 or self.assignments.max() >= self.m:
            raise DomainError(f"cluster ids must lie in [0, {self.m})")

    @property
    def n(self) -> int:
        return self.assignments.size

    @property
    def cluster_count(self) -> int:
        """Number of non-empty clusters."""
        return int(np.unique(self.assignments).size)


@dataclass(frozen=True)
class ClusteringScores:
    acc: float
    nmi: float
    ari: float

    def to_dict(self) -> dict[str, float]:
        return {"acc": self.acc, "nmi": self.nmi, "ari": self.ari}


@dataclass(frozen=True)
class RankingScores:
    auc: float
    ap: float

    def to_dict(self) -> dict[str, float]:
        return {"auc": self.auc, "ap": self.ap}


@dataclass(frozen=True)
class SelectionContext:
    """
    What select_snapshot needs to score snapshots that carry no score yet.

    Attributes:
        m: number of clusters for the DBI criterion.
        seed: seed for spectral clustering.
        restarts: k-means restarts.
        val_pos: validation edges, for the AUC criterion.
        val_neg: validation non-edges, for the AUC criterion.
    """

    m: int | None = None
    seed: int = 0
    restarts: int = 10
    val_pos: IntPairs | None = None
    val_neg: IntPairs | None = None


def kmeans(
    points: FloatMatrix, m: int, seed: int = 0, restarts: int = 10
) -> ClusterResult:
    """
    k-means++ seeded Lloyd iterations, best of ``restarts`` runs.

    Each run stops at an assignment fixed point or after 300 iterations.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if not 1 <= m <= n:
        raise DomainError(f"cannot split {n} points into {m} clusters")

    model = KMeans(
        n_clusters=m,
        init="k-means++",
        n_init=restarts,
        max_iter=300,
        tol=0.0,
        random_state=seed,
    )
    with warnings.catch_warnings():
        # raised when fewer than m distinct points exist
        warnings.simplefilter("ignore", ConvergenceWarning)
        labels = model.fit_predict(x)
    result = ClusterResult(labels.astype(np.int64), m, float(model.inertia_))
    log.debug(
        "k-means: inertia %.6g after %d iterations", model.inertia_, model.n_iter_
    )
    return result


def spectral_clustering(
    s: SimilarityState | FloatMatrix, m: int, seed: int = 0, restarts: int = 10
) -> ClusterResult:
    """
    Normalized spectral clustering of a non-negative similarity matrix.

    The top m eigenvectors of D^-1/2 S D^-1/2 are row-normalized and
    clustered with k-means. The result is flagged degenerate when the m-th
    eigenvalue vanishes or fewer than m clusters come out.
    """
    if m < 2:
        raise DomainError(f"spectral clustering needs m >= 2, got {m}")
    dense = s.s if isinstance(s, SimilarityState) else np.asarray(s, dtype=np.float64)
    degrees = dense.sum(axis=1)
    zero = np.flatnonzero(degrees <= 0)
    if zero.size:
        raise DomainError(f"node {int(zero[0])} has zero similarity degree")

    inv_sqrt = 1.0 / np.sqrt(degrees)
    affinity = dense * inv_sqrt[:, None] * inv_sqrt[None, :]
    values, vectors = top_m_eigenpairs(affinity, m, seed=seed, tol=1e-6, max_iter=300)
    embedding = normalize(vectors, norm="l2", axis=1)

    clusters = kmeans(embedding, m, seed=seed, restarts=restarts)
    degenerate = bool(values[-1] < DEGENERATE_EIGENVALUE) or clusters.cluster_count < m
    if degenerate:
        log.warning(
            "spectral clustering is degenerate (eigenvalue %.3g, %d of %d clusters)",
            values[-1],
            clusters.cluster_count,
            m,
        )
    return ClusterResult(clusters.assignments, m, clusters.inertia, degenerate)


def cluster_embedding(
    z: FloatMatrix, m: int, seed: int = 0, restarts: int = 10
) -> ClusterResult:
    """Spectral clustering on the cosine similarity of an embedding."""
    return spectral_clustering(similarity(z), m, seed=seed, restarts=restarts)


def _assignments(pred: ClusterResult | Sequence[int] | np.ndarray) -> np.ndarray:
    if isinstance(pred, ClusterResult):
        return pred.assignments
    return np.asarray(pred, dtype=np.int64)


def clustering_metrics(
    pred: ClusterResult | Sequence[int] | np.ndarray,
    truth: Sequence[int] | np.ndarray,
    nmi_average: Literal["arithmetic", "geometric"] = "arithmetic",
) -> ClusteringScores:
    """
    ACC under the best one-to-one cluster/label matching, NMI and ARI.
    """
    y_pred = _assignments(pred)
    y_true = np.asarray(truth, dtype=np.int64)
    if y_pred.shape != y_true.shape:
        raise DomainError(
            f"{y_pred.size} predicted assignments for {y_true.size} labels"
        )
    if y_true.size == 0:
        raise DomainError("cannot score an empty partition")

    table = contingency_matrix(y_true, y_pred)
    rows, cols = linear_sum_assignment(table, maximize=True)
    acc = float(table[rows, cols].sum()) / y_true.size
    nmi = float(
        normalized_mutual_info_score(y_true, y_pred, average_method=nmi_average)
    )
    ari = float(adjusted_rand_score(y_true, y_pred))
    return ClusteringScores(acc=acc, nmi=nmi, ari=ari)


def dbi(z: FloatMatrix, clusters: ClusterResult | Sequence[int] | np.ndarray) -> float:
    """
    Davies-Bouldin index with Euclidean distances; lower is better.

    Scatter is the mean distance of a cluster's points to its centroid.
    When two clusters share a centroid the index diverges and
    ``DBI_SENTINEL`` is returned instead.
    """
    x = np.asarray(z, dtype=np.float64)
    labels = _assignments(clusters)
    if labels.size != x.shape[0]:
        raise DomainError(f"{labels.size} assignments for {x.shape[0]} points")
    ids, dense_labels = np.unique(labels, return_inverse=True)
    if ids.size < 2:
        raise DomainError("the Davies-Bouldin index needs two non-empty clusters")

    counts = np.bincount(dense_labels)
    centroids = np.zeros((ids.size, x.shape[1]))
    np.add.at(centroids, dense_labels, x)
    centroids /= counts[:, None]

    distances = np.linalg.norm(x - centroids[dense_labels], axis=1)
    scatter = np.bincount(dense_labels, weights=distances) / counts

    separation = np.linalg.norm(centroids[:, None, :] - centroids[None, :, :], axis=2)
    np.fill_diagonal(separation, np.inf)
    if np.any(separation == 0):
        log.warning("two clusters share a centroid; Davies-Bouldin index diverges")
        return DBI_SENTINEL

    ratios = (scatter[:, None] + scatter[None, :]) / separation
    return float(np.mean(ratios.max(axis=1)))


def link_logits(z: FloatMatrix, pairs: IntPairs) -> np.ndarray:
    """
    Inner products z_i . z_j for every pair (i, j).

    Ranks pairs exactly like link_scores but does not saturate: with wide
    non-negative embeddings the sigmoid rounds most products to 1.0.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return np.einsum("ij,ij->i", z[pairs[:, 0]], z[pairs[:, 1]])


def link_scores(z: FloatMatrix, pairs: IntPairs) -> np.ndarray:
    """sigmoid(z_i . z_j) for every pair (i, j)."""
    return expit(link_logits(z, pairs))


def ranking_metrics(
    pos_scores: Sequence[float] | np.ndarray, neg_scores: Sequence[float] | np.ndarray
) -> RankingScores:
    """
    AUC by pair counting (ties count one half) and average precision.

    For AP the scores are ranked in descending order; equal scores keep
    their input order with the positives ahead of the negatives.
    """
    pos = np.asarray(pos_scores, dtype=np.float64).ravel()
    neg = np.asarray(neg_scores, dtype=np.float64).ravel()
    if pos.size == 0 or neg.size == 0:
        raise DomainError("ranking metrics need positive and negative scores")

    scores = np.concatenate((pos, neg))
    ranks = rankdata(scores)
    p, q = pos.size, neg.size
    auc = (ranks[:p].sum() - p * (p + 1) / 2.0) / (p * q)

    order = np.argsort(-scores, kind="stable")
    hits = order < p
    precision = np.cumsum(hits) / np.arange(1, scores.size + 1)
    ap = float(precision[hits].mean())
    return RankingScores(auc=float(auc), ap=ap)


def score_dbi(
    snapshot: EmbeddingSnapshot, context: SelectionContext
) -> EmbeddingSnapshot:
    """The snapshot with the DBI of its own m-way spectral clustering."""
    if snapshot.dbi is not None:
        return snapshot
    if context.m is None:
        raise ConfigurationError("selecting by DBI needs the cluster count m")
    clusters = cluster_embedding(
        snapshot.z, context.m, seed=context.seed, restarts=context.restarts
    )
    return snapshot.with_scores(dbi=dbi(snapshot.z, clusters))


def _score_val_auc(
    snapshot: EmbeddingSnapshot, context: SelectionContext
) -> EmbeddingSnapshot:
    if snapshot.val_auc is not None:
        return snapshot
    if context.val_pos is None or context.val_neg is None:
        raise ConfigurationError("selecting by validation AUC needs validation pairs")
    scores = ranking_metrics(
        link_logits(snapshot.z, context.val_pos),
        link_logits(snapshot.z, context.val_neg),
    )
    return snapshot.with_scores(val_auc=scores.auc)


def select_snapshot(
    snapshots: Sequence[EmbeddingSnapshot],
    mode: Literal["dbi", "val_auc"],
    context: SelectionContext | None = None,
) -> EmbeddingSnapshot:
    """
    Best snapshot: lowest DBI or highest validation AUC, earliest on ties.

    Snapshots without the needed score are scored first; the returned
    snapshot carries its score.
    """
    if not snapshots:
        raise DomainError("no snapshots to select from")
    if mode not in ("dbi", "val_auc"):
        raise ConfigurationError(f"unknown selection mode {mode!r}")
    if len(snapshots) == 1:
        return snapshots[0]

    context = context or SelectionContext()
    if mode == "dbi":
        scored = [score_dbi(snapshot, context) for snapshot in snapshots]
        best = min(scored, key=lambda snap: (snap.dbi, snap.epoch))
    else:
        scored = [_score_val_auc(snapshot, context) for snapshot in snapshots]
        best = min(scored, key=lambda snap: (-snap.val_auc, snap.epoch))
    log.info("selected epoch %d by %s", best.epoch, mode)
    return best


def metrics_document(**values: Any) -> dict[str, Any]:
    """Flat metric JSON document, dropping fields that were not computed."""
    return {key: value for key, value in values.items() if value is not None}
