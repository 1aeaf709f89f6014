"""
End-to-end experiments: clustering and link prediction runs, the
ablation ladder, the variant comparison and the filter coefficient sweep.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from pyage.data import link_split
from pyage.errors import ConfigurationError
from pyage.evaluation import (
    SelectionContext,
    cluster_embedding,
    clustering_metrics,
    dbi,
    link_logits,
    ranking_metrics,
    select_snapshot,
)
from pyage.variant import make_variant
from pyage.variants.ls import ls_embedding

if TYPE_CHECKING:
    from collections.abc import Sequence

    from pyage.config import RunConfig
    from pyage.data import LinkSplit
    from pyage.encoder import EmbeddingSnapshot
    from pyage.evaluation import ClusteringScores, ClusterResult, RankingScores
    from pyage.graph import Graph
    from pyage.smoothing import KMode

log = logging.getLogger(__file__)

__all__ = (
    "LADDER",
    "ResultRow",
    "ClusteringRun",
    "LinkPredictionRun",
    "run_clustering",
    "run_link_prediction",
    "run_ablation",
    "compare_variants",
    "k_sweep",
    "format_table",
)

LADDER = ("raw", "+filter", "+encoder", "+adaptive", "+thresholds")


@dataclass(frozen=True)
class ResultRow:
    """One line of a comparison table: a name and its metrics."""

    name: str
    values: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, **self.values}


@dataclass(frozen=True)
class ClusteringRun:
    snapshots: list[EmbeddingSnapshot]
    best: EmbeddingSnapshot
    clusters: ClusterResult
    scores: ClusteringScores

    def metrics(self) -> dict[str, Any]:
        return {**self.scores.to_dict(), "dbi": self.best.dbi, "epoch": self.best.epoch}


@dataclass(frozen=True)
class LinkPredictionRun:
    snapshots: list[EmbeddingSnapshot]
    best: EmbeddingSnapshot
    split: LinkSplit
    scores: RankingScores

    def metrics(self) -> dict[str, Any]:
        return {
            **self.scores.to_dict(),
            "val_auc": self.best.val_auc,
            "epoch": self.best.epoch,
        }


def _class_count(g: Graph) -> int:
    if g.labels is None or g.class_count is None:
        raise ConfigurationError("clustering evaluation needs node labels")
    return g.class_count


def _score_clustering(
    g: Graph, snapshots: list[EmbeddingSnapshot], config: RunConfig
) -> ClusteringRun:
    m = _class_count(g)
    context = SelectionContext(m=m, seed=config.seed, restarts=config.spectral_restarts)
    best = select_snapshot(snapshots, "dbi", context)
    clusters = cluster_embedding(
        best.z, m, seed=config.seed, restarts=config.spectral_restarts
    )
    if best.dbi is None and clusters.cluster_count > 1:
        best = best.with_scores(dbi=dbi(best.z, clusters))
    scores = clustering_metrics(clusters, g.labels, nmi_average=config.nmi_average)
    log.info("epoch %d: %s", best.epoch, scores)
    return ClusteringRun(snapshots, best, clusters, scores)


def run_clustering(g: Graph, config: RunConfig) -> ClusteringRun:
    """
    Train the configured variant and cluster its best snapshot.

    The snapshot is chosen by the Davies-Bouldin index of its own
    clustering, so labels are only used for the final scores.
    """
    _class_count(g)
    snapshots = make_variant(config).train(g)
    return _score_clustering(g, snapshots, config)


def run_link_prediction(g: Graph, config: RunConfig) -> LinkPredictionRun:
    """
    Hold out edges, train on the rest and score the held-out test pairs.

    Each snapshot gets its validation AUC as it is saved; the best one is
    scored on the test pairs.
    """
    split = link_split(g, config.val_frac, config.test_frac, seed=config.seed)

    def attach_val_auc(snapshot: EmbeddingSnapshot) -> EmbeddingSnapshot:
        val = ranking_metrics(
            link_logits(snapshot.z, split.val_pos),
            link_logits(snapshot.z, split.val_neg),
        )
        return snapshot.with_scores(val_auc=val.auc)

    snapshots = make_variant(config).train(split.residual_graph, attach_val_auc)
    best = select_snapshot(snapshots, "val_auc")
    scores = ranking_metrics(
        link_logits(best.z, split.test_pos), link_logits(best.z, split.test_neg)
    )
    log.info("epoch %d: test auc %.4f, ap %.4f", best.epoch, scores.auc, scores.ap)
    return LinkPredictionRun(snapshots, best, split, scores)


def _row(name: str, run: ClusteringRun) -> ResultRow:
    return ResultRow(name, run.metrics())


def run_ablation(g: Graph, config: RunConfig) -> list[ResultRow]:
    """
    Clustering scores as the pieces of the model are added one at a time.

    - raw: scaled raw features
    - +filter: smoothed features
    - +encoder: encoder trained on pairs selected once from the smoothed
      features
    - +adaptive: pairs re-selected at every boundary, thresholds fixed
    - +thresholds: the full model
    """
    rows = []
    for name, overrides in (("raw", {"t": 0}), ("+filter", {})):
        snapshot = ls_embedding(g, config.with_overrides(**overrides))
        rows.append(_row(name, _score_clustering(g, [snapshot], config)))

    encoder_rungs = (
        ("+encoder", {"reselect": False, "update_thresholds": False}),
        ("+adaptive", {"reselect": True, "update_thresholds": False}),
        ("+thresholds", {"reselect": True, "update_thresholds": True}),
    )
    for name, overrides in encoder_rungs:
        rung = config.with_overrides(variant="age", **overrides)
        rows.append(_row(name, run_clustering(g, rung)))
        log.info("ablation %s done", name)
    return rows


def compare_variants(g: Graph, config: RunConfig) -> list[ResultRow]:
    """Clustering scores of LS, LS+RA, LS+RX and the adaptive encoder."""
    rows = []
    for variant in ("ls", "ls_ra", "ls_rx", "age"):
        run = run_clustering(g, config.with_overrides(variant=variant))
        rows.append(_row(variant, run))
    return rows


def k_sweep(
    g: Graph, config: RunConfig, ks: Sequence[KMode] = (0.5, 2 / 3, 1.0, "auto")
) -> list[ResultRow]:
    """Clustering scores of the configured variant for each filter coefficient."""
    rows = []
    for k in ks:
        run = run_clustering(g, config.with_overrides(k=k))
        name = "k=1/lambda_max" if k == "auto" else f"k={float(k):.4g}"
        rows.append(_row(name, run))
    return rows


def _cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def format_table(rows: Sequence[ResultRow]) -> str:
    """Rows as an aligned text table, columns in first-seen order."""
    columns: list[str] = []
    for row in rows:
        for key in row.values:
            if key not in columns:
                columns.append(key)
    header = ["name", *columns]
    body = [
        [row.name, *(_cell(row.values.get(key)) for key in columns)] for row in rows
    ]
    widths = [max(len(line[i]) for line in [header, *body]) for i in range(len(header))]

    def render(line: list[str]) -> str:
        first = line[0].ljust(widths[0])
        rest = (cell.rjust(width) for cell, width in zip(line[1:], widths[1:]))
        return " | ".join((first, *rest))

    rule = "-+-".join("-" * width for width in widths)
    return "\n".join((render(header), rule, *(render(line) for line in body)))
