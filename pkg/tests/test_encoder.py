import math

import numpy as np
import pytest

from pyage.encoder import (
    LOG_EPS,
    EmbeddingSnapshot,
    EncoderState,
    SimilarityState,
    adam_step,
    encode_and_scale,
    init_similarity,
    loss_and_gradient,
    minmax_scale,
    similarity,
)
from pyage.errors import DomainError
from pyage.sampling import PairBatch


def _batch(pairs, labels):
    return PairBatch(np.array(pairs, dtype=np.int64), np.array(labels, dtype=float))


def test_initialize_respects_fan_bound():
    state = EncoderState.initialize(30, 20, seed=1)
    bound = math.sqrt(6.0 / 50)
    assert state.w.shape == (30, 20)
    assert np.all(np.abs(state.w) <= bound)
    assert not state.adam_m.any() and not state.adam_v.any()
    assert state.step == 0


def test_initialize_is_seeded():
    first = EncoderState.initialize(5, 4, seed=7)
    second = EncoderState.initialize(5, 4, seed=7)
    assert np.array_equal(first.w, second.w)


def test_state_rejects_mismatched_moments():
    with pytest.raises(DomainError):
        EncoderState(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))


@pytest.mark.parametrize(
    "column, expected",
    [
        pytest.param([2.0, 4.0, 6.0], [0.0, 0.5, 1.0], id="affine"),
        pytest.param([5.0, 5.0, 5.0], [0.5, 0.5, 0.5], id="constant"),
    ],
)
def test_minmax_scale(column, expected):
    scaled, col_min, col_range = minmax_scale(np.array(column)[:, None])
    assert np.allclose(scaled[:, 0], expected)
    assert col_min[0] == min(column)
    assert col_range[0] == max(column) - min(column)


def test_encode_with_identity_is_a_fixed_point():
    x = np.array([[0.0, 1.0], [0.25, 0.0], [1.0, 0.5]])
    snapshot = encode_and_scale(EncoderState.from_weights(np.eye(2)), x, epoch=3)
    assert np.array_equal(snapshot.z, x)
    assert snapshot.epoch == 3


def test_encode_rejects_width_mismatch():
    with pytest.raises(DomainError):
        encode_and_scale(EncoderState.from_weights(np.eye(3)), np.ones((4, 2)))


def test_snapshot_scores_are_copied():
    snapshot = EmbeddingSnapshot(np.zeros((2, 2)), epoch=1)
    scored = snapshot.with_scores(dbi=0.5)
    assert scored.dbi == 0.5
    assert snapshot.dbi is None


@pytest.mark.parametrize(
    "u, v, expected",
    [
        pytest.param([1.0, 0.0], [1.0, 0.0], 1.0, id="identical"),
        pytest.param([1.0, 0.0], [0.0, 1.0], 0.0, id="orthogonal"),
        pytest.param([1.0, 0.0], [1.0, 1.0], 1 / math.sqrt(2), id="diagonal"),
    ],
)
def test_similarity_examples(u, v, expected):
    s = similarity(np.array([u, v])).s
    assert s[0, 1] == pytest.approx(expected, abs=1e-12)


def test_similarity_properties():
    z = np.random.default_rng(0).random((30, 6))
    s = similarity(z).s
    assert np.array_equal(np.diag(s), np.ones(30))
    assert np.allclose(s, s.T)
    assert s.min() >= 0.0 and s.max() <= 1.0


def test_similarity_rejects_zero_rows():
    with pytest.raises(DomainError, match="row 1"):
        similarity(np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_init_similarity_examples():
    assert np.allclose(init_similarity(np.ones((3, 2))).s, 1.0)
    assert np.allclose(init_similarity(np.eye(3)).s, np.eye(3))
    # smoothed features may point in opposite directions
    s = init_similarity(np.array([[1.0, 0.0], [-1.0, 0.0]])).s
    assert s[0, 1] == pytest.approx(-1.0)


def test_similarity_state_blocks_match_full_matrix():
    z = np.random.default_rng(3).random((25, 4))
    state = similarity(z)
    full = state.s
    blocks = np.vstack([rows for _, rows in state.row_blocks(7)])
    assert np.allclose(blocks, full)

    rows = np.array([0, 3, 24, 5])
    cols = np.array([0, 9, 1, 5])
    assert np.allclose(state.pair_values(rows, cols), full[rows, cols])


def test_similarity_state_from_matrix():
    state = SimilarityState(s=np.array([[1.0, 0.9], [0.9, 1.0]]))
    assert state.n == 2
    assert np.array_equal(state.block(1, 2), [[0.9, 1.0]])
    assert state.pair_values(np.array([0]), np.array([1]))[0] == 0.9


def test_similarity_state_needs_one_source():
    with pytest.raises(DomainError):
        SimilarityState()
    with pytest.raises(DomainError):
        SimilarityState(s=np.ones((2, 3)))


def test_loss_at_half_similarity_is_ln2():
    x = np.array([[1.0, 0.0], [0.5, math.sqrt(3) / 2]])
    state = EncoderState.from_weights(np.eye(2))
    scaler = (np.zeros(2), np.ones(2))

    loss, _ = loss_and_gradient(state, x, _batch([(0, 1)], [1.0]), scaler)
    assert loss == pytest.approx(math.log(2))
    loss, _ = loss_and_gradient(state, x, _batch([(0, 1), (1, 0)], [1.0, 0.0]), scaler)
    assert loss == pytest.approx(2 * math.log(2))


def test_loss_is_clamped_and_self_pairs_are_neutral():
    x = np.array([[1.0, 2.0], [3.0, 1.0]])
    state = EncoderState.from_weights(np.eye(2))
    scaler = (np.zeros(2), np.ones(2))

    loss, grad = loss_and_gradient(state, x, _batch([(0, 0)], [1.0]), scaler)
    assert loss == pytest.approx(-math.log(1 - LOG_EPS))
    assert not grad.any()

    loss, grad = loss_and_gradient(state, x, _batch([(1, 1)], [0.0]), scaler)
    assert loss == pytest.approx(-math.log(LOG_EPS))
    assert not grad.any()


def test_loss_rejects_empty_batch():
    state = EncoderState.from_weights(np.eye(2))
    with pytest.raises(DomainError):
        loss_and_gradient(state, np.eye(2), _batch(np.empty((0, 2)), []))


@pytest.mark.parametrize("instance", range(20))
def test_gradient_matches_finite_differences(instance):
    rng = np.random.default_rng(instance)
    n, d, h = 5, 4, 3
    x = rng.standard_normal((n, d))
    state = EncoderState.initialize(d, h, rng)
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    chosen = rng.choice(len(pairs), size=8, replace=False)
    batch = _batch([pairs[c] for c in chosen], rng.integers(0, 2, size=8))

    z = x @ state.w
    # widened range keeps every scaled entry strictly inside (0, 1)
    scaler = (z.min(axis=0) - 0.5, z.max(axis=0) - z.min(axis=0) + 1.0)
    _, grad = loss_and_gradient(state, x, batch, scaler)

    step = 1e-6
    numeric = np.zeros_like(state.w)
    for idx in np.ndindex(state.w.shape):
        bumped = []
        for sign in (1.0, -1.0):
            w = state.w.copy()
            w[idx] += sign * step
            loss, _ = loss_and_gradient(EncoderState.from_weights(w), x, batch, scaler)
            bumped.append(loss)
        numeric[idx] = (bumped[0] - bumped[1]) / (2 * step)

    error = np.linalg.norm(grad - numeric) / max(np.linalg.norm(numeric), 1e-12)
    assert error < 1e-4


def test_adam_zero_gradient_keeps_weights():
    state = EncoderState.initialize(3, 2, seed=0)
    updated = adam_step(state, np.zeros((3, 2)), lr=0.01)
    assert np.array_equal(updated.w, state.w)
    assert updated.step == 1


def test_adam_first_step_closed_form():
    state = EncoderState.from_weights(np.zeros((1, 1)))
    updated = adam_step(state, np.ones((1, 1)), lr=0.001)
    assert updated.w[0, 0] == pytest.approx(-0.001 / (1 + 1e-8), rel=1e-12)


def test_adam_moves_against_a_constant_gradient():
    state = EncoderState.from_weights(np.zeros((1, 2)))
    grad = np.array([[2.0, -3.0]])
    first = adam_step(state, grad, lr=0.01)
    second = adam_step(first, grad, lr=0.01)
    assert second.w[0, 0] < first.w[0, 0] < 0.0
    assert second.w[0, 1] > first.w[0, 1] > 0.0
    assert second.step == 2


def test_adam_rejects_shape_mismatch():
    with pytest.raises(DomainError):
        adam_step(EncoderState.from_weights(np.zeros((2, 2))), np.zeros((2, 3)), 0.1)
