"""
Laplacian smoothing followed by an encoder that reconstructs the
adjacency matrix (with self-loops) through an inner product decoder.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import expit

from pyage.common import make_rng
from pyage.encoder import EncoderState, adam_step, encode_and_scale
from pyage.errors import DomainError
from pyage.graph import laplacians

from .base import BaseVariant

if TYPE_CHECKING:
    import scipy.sparse as sp

    from pyage.common import FloatMatrix
    from pyage.config import RunConfig
    from pyage.encoder import EmbeddingSnapshot
    from pyage.graph import Graph

    from .base import SnapshotHook

log = logging.getLogger(__file__)

__all__ = (
    "AdjacencyReconstruction",
    "adjacency_loss_and_gradient",
    "positive_weight",
    "train_ls_ra",
)


def positive_weight(a_tilde: sp.spmatrix | np.ndarray) -> float:
    """(n^2 - nnz) / nnz, the weight balancing edges against non-edges."""
    n = a_tilde.shape[0]
    if isinstance(a_tilde, np.ndarray):
        nnz = int(np.count_nonzero(a_tilde))
    else:
        nnz = a_tilde.nnz
    if nnz == 0:
        raise DomainError("adjacency has no entries to reconstruct")
    return (n * n - nnz) / nnz


def adjacency_loss_and_gradient(
    w: FloatMatrix,
    x_smooth: FloatMatrix,
    a_tilde: sp.spmatrix | np.ndarray,
    pos_weight: float,
) -> tuple[float, FloatMatrix]:
    """
    Weighted cross-entropy between sigmoid(Z Z^T) and A~, and its gradient.

    Z = X~ W. The loss is averaged over all n^2 entries; entries of A~
    equal to 1 are weighted by ``pos_weight``.
    """
    target = a_tilde.toarray() if hasattr(a_tilde, "toarray") else np.asarray(a_tilde)
    n = target.shape[0]
    z = x_smooth @ w
    logits = z @ z.T

    # -log(sigmoid(l)) = logaddexp(0, -l), -log(1 - sigmoid(l)) = logaddexp(0, l)
    per_entry = pos_weight * target * np.logaddexp(0.0, -logits) + (
        1.0 - target
    ) * np.logaddexp(0.0, logits)
    loss = float(per_entry.sum()) / (n * n)

    p = expit(logits)
    d_logits = ((1.0 - target) * p - pos_weight * target * (1.0 - p)) / (n * n)
    # d_logits is symmetric, so d(Z Z^T) pulls back to 2 * d_logits @ Z
    grad_z = 2.0 * (d_logits @ z)
    return loss, x_smooth.T @ grad_z


class AdjacencyReconstruction(BaseVariant):
    """Linear graph autoencoder on the smoothed features (LS+RA)."""

    name = "ls_ra"

    def _fit(
        self, g: Graph, x_smooth: FloatMatrix, hook: SnapshotHook | None
    ) -> list[EmbeddingSnapshot]:
        cfg = self.config
        a_tilde = laplacians(g).a_tilde
        pos_weight = positive_weight(a_tilde)
        state = EncoderState.initialize(x_smooth.shape[1], cfg.h, make_rng(cfg.seed))

        snapshots: list[EmbeddingSnapshot] = []
        for epoch in range(1, cfg.max_iter + 1):
            loss, grad = adjacency_loss_and_gradient(
                state.w, x_smooth, a_tilde, pos_weight
            )
            state = adam_step(state, grad, cfg.lr)
            self.losses.append(loss)
            log.debug("epoch %d: loss %.6f", epoch, loss)
            if self._is_boundary(epoch):
                snapshot = encode_and_scale(state, x_smooth, epoch)
                snapshots.append(self._save(snapshot.with_scores(loss=loss), hook))
                log.info("epoch %d: loss %.4f", epoch, loss)
        return snapshots


def train_ls_ra(
    g: Graph, config: RunConfig, hook: SnapshotHook | None = None
) -> list[EmbeddingSnapshot]:
    return AdjacencyReconstruction(config).train(g, hook)
