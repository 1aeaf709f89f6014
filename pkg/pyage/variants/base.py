from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, ClassVar

from pyage.graph import laplacians, normalize_rows
from pyage.smoothing import build_filter, smooth_features

if TYPE_CHECKING:
    from collections.abc import Callable

    from pyage.common import FloatMatrix
    from pyage.config import RunConfig
    from pyage.encoder import EmbeddingSnapshot
    from pyage.graph import Graph
    from pyage.smoothing import FilterSpec

    SnapshotHook = Callable[[EmbeddingSnapshot], EmbeddingSnapshot]

log = logging.getLogger(__file__)

__all__ = ("BaseVariant", "smoothed_features")


def smoothed_features(g: Graph, config: RunConfig) -> tuple[FilterSpec, FloatMatrix]:
    """
    Filter and smoothed features of a graph under a run configuration.

    Every trainer goes through here, so they all see the same X~.
    """
    x = normalize_rows(g.features) if config.normalize_features else g.features
    spec = build_filter(
        laplacians(g),
        config.k,
        config.t,
        tol=config.power_tol,
        max_iter=config.power_max_iter,
        seed=config.seed,
    )
    return spec, smooth_features(spec, x)


class BaseVariant(ABC):
    """
    Trainer turning a graph into a sequence of embedding snapshots.

    Subclasses implement ``_fit``; ``train`` smooths the features first and
    clears the loss history of the previous run.
    """

    name: ClassVar[str]

    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.losses: list[float] = []
        self.filter: FilterSpec | None = None

    def train(
        self, g: Graph, hook: SnapshotHook | None = None
    ) -> list[EmbeddingSnapshot]:
        """
        Train on a graph.

        Args:
            g: input graph.
            hook: called with every snapshot as it is saved; its return
                value replaces the snapshot (used to attach validation AUC).
        """
        self.losses = []
        self.filter, x_smooth = smoothed_features(g, self.config)
        snapshots = self._fit(g, x_smooth, hook)
        log.info("%s produced %d snapshots", self.name, len(snapshots))
        return snapshots

    def _save(
        self, snapshot: EmbeddingSnapshot, hook: SnapshotHook | None
    ) -> EmbeddingSnapshot:
        return hook(snapshot) if hook is not None else snapshot

    def _is_boundary(self, epoch: int) -> bool:
        return epoch % self.config.update_every == 0

    @abstractmethod
    def _fit(
        self, g: Graph, x_smooth: FloatMatrix, hook: SnapshotHook | None
    ) -> list[EmbeddingSnapshot]:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}(variant={self.name!r}, seed={self.config.seed})"
