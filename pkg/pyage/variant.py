from __future__ import annotations

from typing import TYPE_CHECKING

from pyage.errors import ConfigurationError

from .variants.age import AdaptiveEncoder
from .variants.base import BaseVariant
from .variants.ls import LaplacianSmoothing
from .variants.ls_ra import AdjacencyReconstruction
from .variants.ls_rx import FeatureReconstruction

if TYPE_CHECKING:
    from pyage.config import RunConfig

__all__ = [
    "BaseVariant",
    "AdaptiveEncoder",
    "LaplacianSmoothing",
    "AdjacencyReconstruction",
    "FeatureReconstruction",
    "VARIANT_CLASSES",
    "make_variant",
]

VARIANT_CLASSES: dict[str, type[BaseVariant]] = {
    cls.name: cls
    for cls in (
        AdaptiveEncoder,
        LaplacianSmoothing,
        AdjacencyReconstruction,
        FeatureReconstruction,
    )
}


def make_variant(config: RunConfig) -> BaseVariant:
    """Trainer for ``config.variant``."""
    try:
        cls = VARIANT_CLASSES[config.variant]
    except KeyError:
        raise ConfigurationError(f"unknown variant {config.variant!r}") from None
    return cls(config)
