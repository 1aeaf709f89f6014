"""
The adaptive graph encoder.

Every epoch takes one gradient step on all selected positives and as many
negatives drawn afresh from the selected pool. Every ``update_every``
epochs comes a boundary: the embedding is saved, the rank thresholds move
one step along their schedule and the pool is re-selected from the new
similarity matrix.

The last boundary only saves, so a run of T generations uses T - 1
threshold updates and the end thresholds are reached only when
``max_iter`` leaves room for one more generation.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

from pyage.common import make_rng
from pyage.encoder import (
    EncoderState,
    adam_step,
    encode_and_scale,
    init_similarity,
    loss_and_gradient,
    similarity,
)
from pyage.sampling import (
    ThresholdSchedule,
    balanced_batch,
    select_samples,
    update_thresholds,
)

from .base import BaseVariant

if TYPE_CHECKING:
    import numpy as np

    from pyage.common import FloatMatrix
    from pyage.config import RunConfig
    from pyage.encoder import EmbeddingSnapshot, SimilarityState
    from pyage.graph import Graph
    from pyage.sampling import TrainingSet

    from .base import SnapshotHook

log = logging.getLogger(__file__)

__all__ = ("AdaptiveEncoder", "train_age")


class AdaptiveEncoder(BaseVariant):
    """
    Linear encoder trained on its own similarity ranking.

    The two switches of the config give the ablation rungs:
    ``reselect=False`` trains on the pairs picked from the initial
    similarity only; ``update_thresholds=False`` keeps re-selecting with
    the start thresholds.
    """

    name = "age"

    def __init__(self, config: RunConfig) -> None:
        super().__init__(config)
        self.schedule: ThresholdSchedule | None = None
        self.state: EncoderState | None = None

    def _select(
        self,
        s: SimilarityState,
        sched: ThresholdSchedule,
        generation: int,
        rng: np.random.Generator,
    ) -> TrainingSet:
        return select_samples(
            s,
            sched,
            generation=generation,
            pair_budget=self.config.pair_budget,
            quantile_samples=self.config.quantile_samples,
            seed=rng,
        )

    def _fit(
        self, g: Graph, x_smooth: FloatMatrix, hook: SnapshotHook | None
    ) -> list[EmbeddingSnapshot]:
        cfg = self.config
        rng = make_rng(cfg.seed)

        state = EncoderState.initialize(x_smooth.shape[1], cfg.h, rng)
        sched = ThresholdSchedule.from_ratios(
            g.n,
            cfg.r_pos_st_ratio,
            cfg.r_pos_ed_ratio,
            cfg.r_neg_st_ratio,
            cfg.r_neg_ed_ratio,
            cfg.total_updates,
        )
        generation = 0
        training = self._select(init_similarity(x_smooth), sched, generation, rng)

        snapshots: list[EmbeddingSnapshot] = []
        for epoch in range(1, cfg.max_iter + 1):
            batch = balanced_batch(training, rng)
            loss, grad = loss_and_gradient(state, x_smooth, batch)
            state = adam_step(state, grad, cfg.lr)
            self.losses.append(loss)
            log.debug("epoch %d: loss %.6f", epoch, loss)

            if not self._is_boundary(epoch):
                continue

            snapshot = encode_and_scale(state, x_smooth, epoch).with_scores(loss=loss)
            snapshots.append(self._save(snapshot, hook))
            log.info(
                "epoch %d: loss %.4f, r_pos %d, r_neg %d, generation %d",
                epoch,
                loss,
                sched.r_pos,
                sched.r_neg,
                generation,
            )
            if epoch == cfg.max_iter:
                break

            if cfg.update_thresholds and not sched.exhausted:
                sched = update_thresholds(sched)
            if cfg.reselect:
                generation += 1
                training = self._select(
                    similarity(snapshot.z), sched, generation, rng
                )

        self.schedule = sched
        self.state = state
        return snapshots


def train_age(
    g: Graph, config: RunConfig, hook: SnapshotHook | None = None
) -> list[EmbeddingSnapshot]:
    """Run the adaptive encoder with ``config`` and return its snapshots."""
    return AdaptiveEncoder(config).train(g, hook)
