from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Literal

import numpy as np

from pyage.errors import DomainError
from pyage.spectral import lambda_max_power_iteration

if TYPE_CHECKING:
    import scipy.sparse as sp

    from pyage.common import FloatMatrix, Seed
    from pyage.graph import LaplacianBundle

log = logging.getLogger(__file__)

__all__ = (
    "FilterSpec",
    "KMode",
    "build_filter",
    "smooth_features",
    "frequency_response",
)

KMode = float | Literal["auto"]


@dataclass(frozen=True)
class FilterSpec:
    """
    Generalized Laplacian smoothing filter H = I - k * L_sym, stacked t times.

    Attributes:
        k: filter coefficient, k > 0.
        t: number of stacked layers, t >= 0.
        lambda_max: largest eigenvalue estimate used to derive k, if any.
        l_sym: the renormalized Laplacian the filter is built on.
        auto: True when k was derived as 1 / lambda_max.
    """

    k: float
    t: int
    lambda_max: float | None
    l_sym: sp.csr_matrix = field(repr=False)
    auto: bool = False

    def __post_init__(self) -> None:
        if not self.k > 0:
            raise DomainError(f"filter coefficient k must be positive, got {self.k}")
        if self.t < 0:
            raise DomainError(f"layer count t must be non-negative, got {self.t}")

    @property
    def n(self) -> int:
        return self.l_sym.shape[0]


def build_filter(
    bundle: LaplacianBundle,
    k: KMode = "auto",
    t: int = 1,
    *,
    tol: float = 1e-8,
    max_iter: int = 1000,
    seed: Seed = 0,
) -> FilterSpec:
    """
    Build the smoothing filter for a graph.

    With ``k="auto"`` the coefficient is 1 / lambda_max of the renormalized
    Laplacian, estimated once by power iteration and cached on the spec.
    A fixed k of 1 gives the GCN filter.
    """
    if t < 0:
        raise DomainError(f"layer count t must be non-negative, got {t}")

    if k == "auto":
        estimate = lambda_max_power_iteration(
            bundle.l_sym, tol=tol, max_iter=max_iter, seed=seed
        )
        if estimate.value <= 0.0:
            # edgeless graph: L_sym = 0, every coefficient filters nothing
            log.warning("lambda_max is zero; using k = 1")
            return FilterSpec(1.0, t, 0.0, bundle.l_sym, auto=True)
        log.info(
            "lambda_max = %.6f (%d iterations), k = %.6f",
            estimate.value,
            estimate.iterations,
            1.0 / estimate.value,
        )
        return FilterSpec(1.0 / estimate.value, t, estimate.value, bundle.l_sym, True)

    k_value = float(k)
    if not k_value > 0:
        raise DomainError(f"filter coefficient k must be positive, got {k}")
    return FilterSpec(k_value, t, None, bundle.l_sym, auto=False)


def smooth_features(spec: FilterSpec, x: FloatMatrix) -> FloatMatrix:
    """
    Return H^t X as t successive sparse products X <- X - k * (L_sym X).

    H is never formed densely. t = 0 returns a copy of X.
    """
    out = np.array(x, dtype=np.float64)
    squeeze = out.ndim == 1
    if squeeze:
        out = out[:, None]
    if out.shape[0] != spec.n:
        raise DomainError(
            f"feature matrix has {out.shape[0]} rows, graph has {spec.n} nodes"
        )

    for _ in range(spec.t):
        out = out - spec.k * (spec.l_sym @ out)

    return out[:, 0] if squeeze else out


def frequency_response(spec: FilterSpec, lam: float | np.ndarray) -> float | np.ndarray:
    """(1 - k * lambda) ** t, the gain applied to the eigencomponent at lambda."""
    if np.ndim(lam):
        return (1.0 - spec.k * np.asarray(lam, dtype=np.float64)) ** spec.t
    return float((1.0 - spec.k * float(lam)) ** spec.t)
