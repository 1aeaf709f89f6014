from __future__ import annotations

from typing import TYPE_CHECKING

from pyage.encoder import EmbeddingSnapshot, minmax_scale

from .base import BaseVariant, smoothed_features

if TYPE_CHECKING:
    from pyage.common import FloatMatrix
    from pyage.config import RunConfig
    from pyage.graph import Graph

    from .base import SnapshotHook

__all__ = ("LaplacianSmoothing", "ls_embedding")


class LaplacianSmoothing(BaseVariant):
    """Smoothed features used directly as embeddings; nothing is trained."""

    name = "ls"

    def _fit(
        self, g: Graph, x_smooth: FloatMatrix, hook: SnapshotHook | None
    ) -> list[EmbeddingSnapshot]:
        z, _, _ = minmax_scale(x_smooth)
        return [self._save(EmbeddingSnapshot(z=z, epoch=0), hook)]


def ls_embedding(g: Graph, config: RunConfig) -> EmbeddingSnapshot:
    """
    Column-scaled H^t X as an epoch-0 snapshot.

    With t = 0 this is the scaled raw feature matrix.
    """
    _, x_smooth = smoothed_features(g, config)
    z, _, _ = minmax_scale(x_smooth)
    return EmbeddingSnapshot(z=z, epoch=0)
