"""
Laplacian smoothing followed by a linear autoencoder that reconstructs
the node features.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np

from pyage.common import make_rng
from pyage.encoder import EncoderState, adam_step, encode_and_scale
from pyage.errors import DomainError

from .base import BaseVariant

if TYPE_CHECKING:
    from pyage.common import FloatMatrix
    from pyage.config import RunConfig
    from pyage.encoder import EmbeddingSnapshot
    from pyage.graph import Graph

    from .base import SnapshotHook

log = logging.getLogger(__file__)

__all__ = ("FeatureReconstruction", "feature_loss_and_gradient", "train_ls_rx")


def feature_loss_and_gradient(
    w: FloatMatrix,
    v: FloatMatrix,
    x_smooth: FloatMatrix,
    target: FloatMatrix,
) -> tuple[float, FloatMatrix, FloatMatrix]:
    """
    Mean squared error of X~ W V against ``target``.

    Returns:
        the loss, its gradient with respect to the encoder W (d x h) and
        with respect to the decoder V (h x d').
    """
    if target.shape != (x_smooth.shape[0], v.shape[1]):
        raise DomainError(
            f"target shape {target.shape} does not match the decoder output "
            f"{(x_smooth.shape[0], v.shape[1])}"
        )
    z = x_smooth @ w
    residual = z @ v - target
    loss = float(np.mean(residual * residual))

    d_out = 2.0 * residual / residual.size
    grad_v = z.T @ d_out
    grad_w = x_smooth.T @ (d_out @ v.T)
    return loss, grad_w, grad_v


class FeatureReconstruction(BaseVariant):
    """
    Linear encoder plus linear decoder (LS+RX).

    The target is the raw feature matrix, or the smoothed one when
    ``reconstruct_smoothed`` is set.
    """

    name = "ls_rx"

    def __init__(self, config: RunConfig) -> None:
        super().__init__(config)
        self.decoder: EncoderState | None = None

    def _fit(
        self, g: Graph, x_smooth: FloatMatrix, hook: SnapshotHook | None
    ) -> list[EmbeddingSnapshot]:
        cfg = self.config
        target = x_smooth if cfg.reconstruct_smoothed else g.features
        rng = make_rng(cfg.seed)
        encoder = EncoderState.initialize(x_smooth.shape[1], cfg.h, rng)
        decoder = EncoderState.initialize(cfg.h, target.shape[1], rng)

        snapshots: list[EmbeddingSnapshot] = []
        for epoch in range(1, cfg.max_iter + 1):
            loss, grad_w, grad_v = feature_loss_and_gradient(
                encoder.w, decoder.w, x_smooth, target
            )
            encoder = adam_step(encoder, grad_w, cfg.lr)
            decoder = adam_step(decoder, grad_v, cfg.lr)
            self.losses.append(loss)
            log.debug("epoch %d: loss %.6f", epoch, loss)
            if self._is_boundary(epoch):
                snapshot = encode_and_scale(encoder, x_smooth, epoch)
                snapshots.append(self._save(snapshot.with_scores(loss=loss), hook))
                log.info("epoch %d: loss %.4f", epoch, loss)

        self.decoder = decoder
        return snapshots


def train_ls_rx(
    g: Graph, config: RunConfig, hook: SnapshotHook | None = None
) -> list[EmbeddingSnapshot]:
    return FeatureReconstruction(config).train(g, hook)
