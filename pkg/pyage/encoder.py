"""
Linear encoder, min-max scaling, cosine similarity and the pairwise
cross-entropy objective, plus the Adam update used to train it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse as sp

from pyage.common import make_rng
from pyage.errors import DomainError

if TYPE_CHECKING:
    from collections.abc import Iterator

    from pyage.common import FloatMatrix, Seed
    from pyage.sampling import PairBatch

log = logging.getLogger(__file__)

__all__ = (
    "LOG_EPS",
    "EncoderState",
    "EmbeddingSnapshot",
    "SimilarityState",
    "minmax_scale",
    "encode_and_scale",
    "similarity",
    "init_similarity",
    "loss_and_gradient",
    "adam_step",
)

LOG_EPS = 1e-7


@dataclass(frozen=True)
class EncoderState:
    """
    Trainable weight matrix plus its Adam moments.

    Attributes:
        w: d x h weight matrix.
        adam_m: first moment estimate, same shape as w.
        adam_v: second moment estimate, same shape as w.
        step: number of Adam updates applied so far.
    """

    w: np.ndarray
    adam_m: np.ndarray
    adam_v: np.ndarray
    step: int = 0

    def __post_init__(self) -> None:
        if not (self.w.shape == self.adam_m.shape == self.adam_v.shape):
            raise DomainError("weight and moment matrices must share one shape")
        if self.step < 0:
            raise DomainError("step must be non-negative")

    @classmethod
    def initialize(cls, d: int, h: int, seed: Seed = 0) -> EncoderState:
        """Uniform fan-based init in [-a, a], a = sqrt(6 / (d + h))."""
        bound = np.sqrt(6.0 / (d + h))
        w = make_rng(seed).uniform(-bound, bound, size=(d, h))
        return cls(w, np.zeros_like(w), np.zeros_like(w))

    @classmethod
    def from_weights(cls, w: np.ndarray) -> EncoderState:
        w = np.array(w, dtype=np.float64)
        return cls(w, np.zeros_like(w), np.zeros_like(w))


@dataclass(frozen=True)
class EmbeddingSnapshot:
    """
    Scaled node embeddings saved during training.

    Attributes:
        z: n x h embedding matrix, entries in [0, 1].
        epoch: training step that produced it (0 for untrained embeddings).
        dbi: Davies-Bouldin index once evaluated.
        val_auc: validation AUC once evaluated.
        loss: training loss at the step that produced it.
    """

    z: np.ndarray
    epoch: int
    dbi: float | None = None
    val_auc: float | None = None
    loss: float | None = None

    def with_scores(self, **scores: float | None) -> EmbeddingSnapshot:
        return replace(self, **scores)


class SimilarityState:
    """
    Pairwise cosine similarities of node embeddings.

    Holds either the full n x n matrix or the row-normalized embeddings
    from which row blocks are computed on demand; the full matrix is only
    materialized when asked for.
    """

    def __init__(
        self,
        s: np.ndarray | None = None,
        unit_rows: np.ndarray | None = None,
        lower: float = 0.0,
    ) -> None:
        if (s is None) == (unit_rows is None):
            raise DomainError("give exactly one of a similarity matrix or unit rows")
        self._unit_rows = unit_rows
        self._lower = lower
        if s is not None:
            s = np.asarray(s, dtype=np.float64)
            if s.ndim != 2 or s.shape[0] != s.shape[1]:
                raise DomainError(f"similarity matrix must be square, got {s.shape}")
            self.__dict__["s"] = s

    @property
    def n(self) -> int:
        if self._unit_rows is not None:
            return self._unit_rows.shape[0]
        return self.s.shape[0]

    @cached_property
    def s(self) -> np.ndarray:
        return self.block(0, self.n)

    def block(self, start: int, stop: int) -> np.ndarray:
        """Rows start..stop of S."""
        if "s" in self.__dict__:
            return self.__dict__["s"][start:stop]
        assert self._unit_rows is not None
        rows = self._unit_rows[start:stop] @ self._unit_rows.T
        np.clip(rows, self._lower, 1.0, out=rows)
        idx = np.arange(start, min(stop, self.n))
        rows[idx - start, idx] = 1.0
        return rows

    def pair_values(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Similarities of the pairs (rows[k], cols[k])."""
        if "s" in self.__dict__:
            return self.__dict__["s"][rows, cols]
        assert self._unit_rows is not None
        u = self._unit_rows
        values = np.clip(np.einsum("ij,ij->i", u[rows], u[cols]), self._lower, 1.0)
        values[rows == cols] = 1.0
        return values

    def row_blocks(self, block_rows: int) -> Iterator[tuple[int, np.ndarray]]:
        for start in range(0, self.n, block_rows):
            yield start, self.block(start, start + block_rows)

    def __repr__(self) -> str:
        return f"SimilarityState(n={self.n})"


def minmax_scale(z: FloatMatrix) -> tuple[FloatMatrix, np.ndarray, np.ndarray]:
    """
    Map every column to [0, 1]; constant columns map to 0.5.

    Returns:
        the scaled matrix, the column minima and the column ranges
        (zero for constant columns).
    """
    z = np.asarray(z, dtype=np.float64)
    col_min = z.min(axis=0)
    col_range = z.max(axis=0) - col_min
    return _apply_scaler(z, col_min, col_range), col_min, col_range


def _apply_scaler(
    z: FloatMatrix, col_min: np.ndarray, col_range: np.ndarray
) -> FloatMatrix:
    constant = col_range == 0
    safe = np.where(constant, 1.0, col_range)
    scaled = (z - col_min) / safe
    scaled[:, constant] = 0.5
    return scaled


def encode_and_scale(
    state: EncoderState, x_smooth: FloatMatrix, epoch: int = 0
) -> EmbeddingSnapshot:
    """Z = minmax(X~ W), one snapshot of the current encoder."""
    if x_smooth.shape[1] != state.w.shape[0]:
        raise DomainError(
            f"features have {x_smooth.shape[1]} columns, encoder expects "
            f"{state.w.shape[0]}"
        )
    z, _, _ = minmax_scale(x_smooth @ state.w)
    return EmbeddingSnapshot(z=z, epoch=epoch)


def _unit_rows(x: FloatMatrix) -> FloatMatrix:
    x = np.asarray(x, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise DomainError(f"row {int(zero[0])} has zero norm; cosine is undefined")
    return x / norms[:, None]


def similarity(z: FloatMatrix) -> SimilarityState:
    """Cosine similarity of scaled embeddings, entries in [0, 1]."""
    return SimilarityState(unit_rows=_unit_rows(z), lower=0.0)


def init_similarity(x_smooth: FloatMatrix) -> SimilarityState:
    """
    Cosine similarity of the smoothed features, used before any training.

    Smoothed features may carry negative entries, so values are only
    clipped to [-1, 1].
    """
    return SimilarityState(unit_rows=_unit_rows(x_smooth), lower=-1.0)


def loss_and_gradient(
    state: EncoderState,
    x_smooth: FloatMatrix,
    batch: PairBatch,
    scaler: tuple[np.ndarray, np.ndarray] | None = None,
    eps: float = LOG_EPS,
) -> tuple[float, FloatMatrix]:
    """
    Cross-entropy over the balanced batch and its gradient with respect to W.

    Only the batch pairs are scored. The min-max statistics of the scaler
    are constants for the gradient; pass ``scaler=(col_min, col_range)`` to
    freeze them explicitly, otherwise they are taken from the current W.

    Args:
        state: encoder to evaluate.
        x_smooth: n x d smoothed features.
        batch: labeled node pairs.
        scaler: frozen column minima and ranges.
        eps: similarities are clamped to [eps, 1 - eps] before the log.
    """
    if len(batch) == 0:
        raise DomainError("batch is empty")

    z_raw = x_smooth @ state.w
    if scaler is None:
        col_min = z_raw.min(axis=0)
        col_range = z_raw.max(axis=0) - col_min
    else:
        col_min, col_range = scaler
    z = _apply_scaler(z_raw, col_min, col_range)

    i, j = batch.pairs[:, 0], batch.pairs[:, 1]
    labels = batch.labels
    u, v = z[i], z[j]
    nu = np.maximum(np.linalg.norm(u, axis=1), np.finfo(np.float64).tiny)
    nv = np.maximum(np.linalg.norm(v, axis=1), np.finfo(np.float64).tiny)
    s = np.einsum("ij,ij->i", u, v) / (nu * nv)

    clamped = np.clip(s, eps, 1.0 - eps)
    loss = float(
        np.sum(-labels * np.log(clamped) - (1.0 - labels) * np.log(1.0 - clamped))
    )

    # clamping cuts the gradient outside [eps, 1 - eps]
    active = (s > eps) & (s < 1.0 - eps)
    d_s = np.where(active, -labels / clamped + (1.0 - labels) / (1.0 - clamped), 0.0)

    inv = d_s / (nu * nv)
    grad_u = inv[:, None] * v - (d_s * s / nu**2)[:, None] * u
    grad_v = inv[:, None] * u - (d_s * s / nv**2)[:, None] * v

    n, b = z.shape[0], len(batch)
    cols = np.arange(b)
    ones = np.ones(b)
    scatter_i = sp.csr_matrix((ones, (i, cols)), shape=(n, b))
    scatter_j = sp.csr_matrix((ones, (j, cols)), shape=(n, b))
    grad_z = scatter_i @ grad_u + scatter_j @ grad_v

    inv_range = np.divide(
        1.0, col_range, out=np.zeros_like(col_range), where=col_range != 0
    )
    grad_w = x_smooth.T @ (grad_z * inv_range)
    return loss, grad_w


def adam_step(
    state: EncoderState,
    grad_w: FloatMatrix,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> EncoderState:
    """One bias-corrected Adam update; returns a new state."""
    if grad_w.shape != state.w.shape:
        raise DomainError(
            f"gradient shape {grad_w.shape} does not match weights {state.w.shape}"
        )
    step = state.step + 1
    m = beta1 * state.adam_m + (1.0 - beta1) * grad_w
    v = beta2 * state.adam_v + (1.0 - beta2) * (grad_w * grad_w)

    m_hat = m / (1.0 - beta1**step)
    v_hat = v / (1.0 - beta2**step)
    w = state.w - lr * m_hat / (np.sqrt(v_hat) + eps)
    return EncoderState(w, m, v, step)
