from .age import AdaptiveEncoder, train_age
from .base import BaseVariant, smoothed_features
from .ls import LaplacianSmoothing, ls_embedding
from .ls_ra import AdjacencyReconstruction, adjacency_loss_and_gradient, train_ls_ra
from .ls_rx import FeatureReconstruction, feature_loss_and_gradient, train_ls_rx

__all__ = [
    "BaseVariant",
    "AdaptiveEncoder",
    "LaplacianSmoothing",
    "AdjacencyReconstruction",
    "FeatureReconstruction",
    "smoothed_features",
    "train_age",
    "ls_embedding",
    "train_ls_ra",
    "train_ls_rx",
    "adjacency_loss_and_gradient",
    "feature_loss_and_gradient",
]
