"""
Training-sample selection for the adaptive encoder.

Node pairs are ranked by similarity over all n^2 ordered pairs, diagonal
included. The top r_pos pairs are positives, pairs ranked below r_neg are
negatives, and the thresholds move linearly towards their end values as
training goes on.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np

from pyage.common import make_rng
from pyage.errors import ConfigurationError, StateError

if TYPE_CHECKING:
    from pyage.common import IntPairs, Seed
    from pyage.encoder import SimilarityState

log = logging.getLogger(__file__)

__all__ = (
    "DEFAULT_PAIR_BUDGET",
    "DEFAULT_QUANTILE_SAMPLES",
    "ThresholdSchedule",
    "TrainingSet",
    "PairBatch",
    "select_samples",
    "balanced_batch",
    "update_thresholds",
)

DEFAULT_PAIR_BUDGET = 10**8
DEFAULT_QUANTILE_SAMPLES = 10**6

# rows of S scored at once during streaming passes
_BLOCK_ROWS = 512


@dataclass(frozen=True)
class ThresholdSchedule:
    """
    Curriculum thresholds on the similarity rank.

    r_pos shrinks from r_pos_st to r_pos_ed and r_neg grows from r_neg_st to
    r_neg_ed in ``total_updates`` equal steps. Current values are derived
    from the exact fraction of progress and rounded on access, so the end
    values are reached exactly.
    """

    r_pos_st: int
    r_pos_ed: int
    r_neg_st: int
    r_neg_ed: int
    total_updates: int
    updates_done: int = 0

    def __post_init__(self) -> None:
        if self.r_pos_ed > self.r_pos_st:
            raise ConfigurationError("r_pos must not grow: r_pos_ed > r_pos_st")
        if self.r_neg_ed < self.r_neg_st:
            raise ConfigurationError("r_neg must not shrink: r_neg_ed < r_neg_st")
        if self.r_pos_st > self.r_neg_st:
            raise ConfigurationError(
                f"r_pos_st ({self.r_pos_st}) exceeds r_neg_st ({self.r_neg_st})"
            )
        if self.r_pos_ed < 1:
            raise ConfigurationError("r_pos must stay at least 1")
        if self.total_updates < 0 or not 0 <= self.updates_done <= self.total_updates:
            raise ConfigurationError(
                f"invalid update count {self.updates_done}/{self.total_updates}"
            )

    @classmethod
    def from_ratios(
        cls,
        n: int,
        r_pos_st_ratio: float,
        r_pos_ed_ratio: float,
        r_neg_st_ratio: float,
        r_neg_ed_ratio: float,
        total_updates: int,
    ) -> ThresholdSchedule:
        """Thresholds given as fractions of the n^2 ordered pairs."""
        pairs = n * n
        return cls(
            r_pos_st=max(1, round(r_pos_st_ratio * pairs)),
            r_pos_ed=max(1, round(r_pos_ed_ratio * pairs)),
            r_neg_st=round(r_neg_st_ratio * pairs),
            r_neg_ed=round(r_neg_ed_ratio * pairs),
            total_updates=total_updates,
        )

    def _interpolate(self, start: int, end: int) -> int:
        if self.total_updates == 0:
            return start
        progress = Fraction(self.updates_done, self.total_updates)
        return round(start + (end - start) * progress)

    @property
    def r_pos(self) -> int:
        return self._interpolate(self.r_pos_st, self.r_pos_ed)

    @property
    def r_neg(self) -> int:
        return self._interpolate(self.r_neg_st, self.r_neg_ed)

    @property
    def exhausted(self) -> bool:
        return self.updates_done >= self.total_updates


@dataclass(frozen=True)
class TrainingSet:
    """
    Positive and negative ordered node pairs selected from one ranking.

    Attributes:
        positives: (r_pos, 2) array of (i, j).
        negatives: (n^2 - r_neg, 2) array of (i, j).
        generation: how many threshold updates preceded the ranking.
    """

    positives: IntPairs
    negatives: IntPairs
    generation: int = 0


@dataclass(frozen=True)
class PairBatch:
    """Labeled pairs for one gradient step: label 1.0 positive, 0.0 negative."""

    pairs: IntPairs
    labels: np.ndarray

    def __len__(self) -> int:
        return self.pairs.shape[0]


def update_thresholds(sched: ThresholdSchedule) -> ThresholdSchedule:
    """Advance the schedule by one step."""
    if sched.exhausted:
        raise StateError(
            f"thresholds already updated {sched.updates_done} of "
            f"{sched.total_updates} times"
        )
    return replace(sched, updates_done=sched.updates_done + 1)


def _flat_to_pairs(flat: np.ndarray, n: int) -> IntPairs:
    return np.column_stack(np.divmod(flat.astype(np.int64), n))


def _rank_order(values: np.ndarray, flat_idx: np.ndarray) -> np.ndarray:
    """Descending similarity, ties by ascending flat (i, j) index."""
    return np.lexsort((flat_idx, -values))


def _select_exact(
    s: SimilarityState, r_pos: int, r_neg: int
) -> tuple[IntPairs, IntPairs]:
    n = s.n
    flat = s.s.ravel()
    order = np.argsort(-flat, kind="stable")
    return _flat_to_pairs(order[:r_pos], n), _flat_to_pairs(order[r_neg:], n)


def _harvest(
    s: SimilarityState, cutoff: float, above: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Stream S by row blocks, keeping pairs on one side of the cutoff."""
    n = s.n
    values: list[np.ndarray] = []
    indices: list[np.ndarray] = []
    for start, rows in s.row_blocks(_BLOCK_ROWS):
        keep = rows >= cutoff if above else rows <= cutoff
        r, c = np.nonzero(keep)
        values.append(rows[r, c])
        indices.append((r + start).astype(np.int64) * n + c)
    if not values:
        return np.empty(0), np.empty(0, dtype=np.int64)
    return np.concatenate(values), np.concatenate(indices)


def _select_by_quantiles(
    s: SimilarityState,
    r_pos: int,
    r_neg: int,
    samples: int,
    rng: np.random.Generator,
) -> tuple[IntPairs, IntPairs]:
    """
    Thresholds turned into similarity cutoffs from a uniform pair sample.

    Cutoffs are loosened by a few standard errors, every pair past them is
    harvested in one streaming pass, and the exact top r_pos / bottom
    n^2 - r_neg are cut from the candidates. A cutoff that still proves too
    tight is loosened again and the pass repeated.
    """
    n = s.n
    total = n * n
    flat = rng.integers(0, total, size=samples)
    rows, cols = np.divmod(flat, n)
    sample = np.sort(s.pair_values(rows, cols))

    def cutoff(fraction_above: float, widen: float) -> float:
        spread = max(fraction_above * (1 - fraction_above), 1.0 / samples)
        se = np.sqrt(spread / samples)
        q = 1.0 - fraction_above + widen * se
        if q >= 1.0:
            return np.inf
        if q <= 0.0:
            return -np.inf
        return float(np.quantile(sample, q))

    need_neg = total - r_neg
    widen = 4.0
    while True:
        pos_vals, pos_idx = _harvest(s, cutoff(r_pos / total, -widen), above=True)
        if pos_vals.size >= r_pos:
            break
        widen *= 2
        log.debug("positive cutoff too tight, widening to %.1f standard errors", widen)
    widen = 4.0
    while True:
        neg_vals, neg_idx = (
            _harvest(s, cutoff(r_neg / total, widen), above=False)
            if need_neg
            else (np.empty(0), np.empty(0, dtype=np.int64))
        )
        if neg_vals.size >= need_neg:
            break
        widen *= 2
        log.debug("negative cutoff too tight, widening to %.1f standard errors", widen)

    pos_order = _rank_order(pos_vals, pos_idx)[:r_pos]
    # the bottom of the ranking: reverse of the descending order
    neg_order = _rank_order(neg_vals, neg_idx)
    neg_order = neg_order[neg_order.size - need_neg :]
    return _flat_to_pairs(pos_idx[pos_order], n), _flat_to_pairs(neg_idx[neg_order], n)


def select_samples(
    s: SimilarityState,
    sched: ThresholdSchedule,
    *,
    generation: int | None = None,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    quantile_samples: int = DEFAULT_QUANTILE_SAMPLES,
    seed: Seed = 0,
) -> TrainingSet:
    """
    Label node pairs by their similarity rank.

    Pairs ranked 1..r_pos are positives, pairs ranked after r_neg are
    negatives, the rest are left out. Ties are ranked by ascending (i, j).
    Above ``pair_budget`` ordered pairs the ranking is replaced by sampled
    similarity cutoffs and a streaming pass.
    """
    n = s.n
    total = n * n
    r_pos, r_neg = sched.r_pos, sched.r_neg
    if r_pos > r_neg:
        raise ConfigurationError(f"r_pos ({r_pos}) exceeds r_neg ({r_neg})")
    if r_pos < 1:
        raise ConfigurationError("r_pos must be at least 1")
    if r_neg > total:
        raise ConfigurationError(f"r_neg ({r_neg}) exceeds the {total} node pairs")

    if total <= pair_budget:
        positives, negatives = _select_exact(s, r_pos, r_neg)
    else:
        log.info("ranking %d pairs by sampled cutoffs", total)
        positives, negatives = _select_by_quantiles(
            s, r_pos, r_neg, quantile_samples, make_rng(seed)
        )

    gen = sched.updates_done if generation is None else generation
    log.debug(
        "generation %d: %d positives, %d negatives", gen, len(positives), len(negatives)
    )
    return TrainingSet(positives, negatives, gen)


def balanced_batch(ts: TrainingSet, seed: Seed = 0) -> PairBatch:
    """
    All positives plus as many uniformly drawn negatives.

    Negatives are drawn without replacement unless the pool is smaller than
    the positive set.
    """
    pool = ts.negatives.shape[0]
    if pool == 0:
        raise ConfigurationError("no negative pairs to sample from")
    count = ts.positives.shape[0]
    picked = make_rng(seed).choice(pool, size=count, replace=pool < count)
    pairs = np.concatenate((ts.positives, ts.negatives[picked]))
    labels = np.concatenate((np.ones(count), np.zeros(count)))
    return PairBatch(pairs, labels)
