import math
from itertools import permutations

import numpy as np
import pytest
from sklearn.metrics import (
    average_precision_score,
    davies_bouldin_score,
    roc_auc_score,
)

from pyage.encoder import EmbeddingSnapshot, SimilarityState
from pyage.errors import ConfigurationError, DomainError
from pyage.evaluation import (
    DBI_SENTINEL,
    ClusterResult,
    SelectionContext,
    cluster_embedding,
    clustering_metrics,
    dbi,
    kmeans,
    link_logits,
    link_scores,
    metrics_document,
    ranking_metrics,
    select_snapshot,
    spectral_clustering,
)


def _brute_acc(pred, truth, k):
    best = 0
    for perm in permutations(range(k)):
        mapped = np.array(perm)[pred]
        best = max(best, int(np.sum(mapped == truth)))
    return best / truth.size


def _greedy_acc(pred, truth):
    table = np.zeros((pred.max() + 1, truth.max() + 1), dtype=int)
    np.add.at(table, (pred, truth), 1)
    hits = 0
    while table.size and table.max() > 0:
        i, j = np.unravel_index(np.argmax(table), table.shape)
        hits += table[i, j]
        table[i, :] = -1
        table[:, j] = -1
    return hits / truth.size


def _entropy(labels):
    _, counts = np.unique(labels, return_counts=True)
    p = counts / labels.size
    return -float(np.sum(p * np.log(p)))


def _brute_nmi(pred, truth):
    n = truth.size
    mi = 0.0
    for a in np.unique(pred):
        for b in np.unique(truth):
            joint = np.sum((pred == a) & (truth == b)) / n
            if joint:
                pa, pb = np.mean(pred == a), np.mean(truth == b)
                mi += joint * math.log(joint / (pa * pb))
    return mi / ((_entropy(pred) + _entropy(truth)) / 2)


def _brute_ari(pred, truth):
    n = truth.size
    same_pred = pred[:, None] == pred[None, :]
    same_truth = truth[:, None] == truth[None, :]
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    both = np.sum(same_pred & same_truth & upper)
    a = np.sum(same_pred & upper)
    b = np.sum(same_truth & upper)
    expected = a * b / math.comb(n, 2)
    return (both - expected) / ((a + b) / 2 - expected)


def _brute_auc(pos, neg):
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def _snapshots(**scores):
    key, values = next(iter(scores.items()))
    return [
        EmbeddingSnapshot(np.eye(2), epoch=10 * (i + 1), **{key: value})
        for i, value in enumerate(values)
    ]


def test_kmeans_separates_two_groups():
    result = kmeans(np.array([0.0, 0.1, 10.0, 10.1]), 2, seed=0)
    assignments = result.assignments
    assert assignments[0] == assignments[1] != assignments[2] == assignments[3]


def test_kmeans_with_one_cluster_per_point():
    result = kmeans(np.random.default_rng(0).random((5, 2)), 5)
    assert sorted(result.assignments.tolist()) == [0, 1, 2, 3, 4]
    assert result.inertia == pytest.approx(0.0, abs=1e-12)


def test_kmeans_on_identical_points():
    result = kmeans(np.ones((6, 2)), 2)
    assert result.inertia == pytest.approx(0.0, abs=1e-12)
    assert result.n == 6


@pytest.mark.parametrize("m", [0, 5])
def test_kmeans_rejects_bad_cluster_count(m):
    with pytest.raises(DomainError):
        kmeans(np.zeros((4, 2)), m)


def test_cluster_result_validates_ids():
    with pytest.raises(DomainError):
        ClusterResult(np.array([0, 2]), m=2)


def test_spectral_clustering_recovers_disconnected_blocks():
    s = np.kron(np.eye(2), np.ones((4, 4)))
    result = spectral_clustering(s, 2, seed=0)
    assert clustering_metrics(result, [0] * 4 + [1] * 4).acc == 1.0
    assert not result.degenerate


def test_spectral_clustering_flags_structureless_input():
    result = spectral_clustering(SimilarityState(s=np.ones((6, 6))), 2, seed=0)
    assert result.degenerate
    assert result.n == 6


def test_spectral_clustering_recovers_planted_blocks():
    truth = np.repeat(np.arange(3), 20)
    s = np.where(truth[:, None] == truth[None, :], 0.9, 0.1)
    np.fill_diagonal(s, 1.0)
    result = spectral_clustering(s, 3, seed=1)
    assert clustering_metrics(result, truth).ari >= 0.95


def test_spectral_clustering_rejects_bad_input():
    with pytest.raises(DomainError):
        spectral_clustering(np.eye(3), 1)
    with pytest.raises(DomainError, match="node 1"):
        spectral_clustering(np.array([[1.0, 0.0], [0.0, 0.0]]), 2)


def test_cluster_embedding_on_two_cliques(two_cliques):
    result = cluster_embedding(two_cliques.features + 0.01, 2, seed=0)
    assert clustering_metrics(result, two_cliques.labels).ari == 1.0


@pytest.mark.parametrize(
    "pred, truth, expected",
    [
        pytest.param([0, 0, 1, 1], [1, 1, 0, 0], (1.0, 1.0, 1.0), id="relabelled"),
        pytest.param([0, 1, 2, 2], [0, 1, 2, 2], (1.0, 1.0, 1.0), id="identical"),
    ],
)
def test_clustering_metrics_perfect_matches(pred, truth, expected):
    scores = clustering_metrics(pred, truth)
    assert (scores.acc, scores.nmi, scores.ari) == pytest.approx(expected)


def test_ari_of_crossed_partitions():
    assert clustering_metrics([0, 0, 1, 1], [0, 1, 0, 1]).ari == pytest.approx(-0.5)


def test_clustering_metrics_reject_length_mismatch():
    with pytest.raises(DomainError):
        clustering_metrics([0, 1], [0, 1, 1])


def test_geometric_nmi_is_available():
    pred, truth = [0, 0, 1, 1, 1], [0, 0, 0, 1, 1]
    arithmetic = clustering_metrics(pred, truth).nmi
    geometric = clustering_metrics(pred, truth, nmi_average="geometric").nmi
    assert arithmetic == pytest.approx(geometric)


@pytest.mark.parametrize("case", range(200))
def test_clustering_metrics_match_brute_force(case):
    rng = np.random.default_rng(case)
    k = int(rng.integers(2, 5))
    truth = np.concatenate((np.arange(k), rng.integers(0, k, size=10)))
    pred = np.concatenate((np.arange(k)[::-1], rng.integers(0, k, size=10)))

    scores = clustering_metrics(pred, truth)
    assert scores.acc == pytest.approx(_brute_acc(pred, truth, k), abs=1e-9)
    assert scores.nmi == pytest.approx(_brute_nmi(pred, truth), abs=1e-9)
    assert scores.ari == pytest.approx(_brute_ari(pred, truth), abs=1e-9)
    assert scores.acc >= _greedy_acc(pred, truth) - 1e-12

    shuffled = rng.permutation(k)[pred]
    assert clustering_metrics(shuffled, truth).acc == scores.acc
    swapped = clustering_metrics(truth, pred)
    assert swapped.nmi == pytest.approx(scores.nmi, abs=1e-12)
    assert swapped.ari == pytest.approx(scores.ari, abs=1e-12)


def test_ari_of_independent_partitions_averages_zero():
    rng = np.random.default_rng(0)
    values = [
        clustering_metrics(rng.integers(0, 5, 100), rng.integers(0, 5, 100)).ari
        for _ in range(1000)
    ]
    assert abs(np.mean(values)) < 0.02


def test_dbi_of_two_far_singletons():
    assert dbi(np.array([[0.0, 0.0], [10.0, 10.0]]), [0, 1]) == 0.0


def test_dbi_guards_shared_centroids():
    z = np.array([[-1.0], [1.0], [-2.0], [2.0]])
    assert dbi(z, [0, 0, 1, 1]) == DBI_SENTINEL


def test_dbi_needs_two_clusters():
    with pytest.raises(DomainError):
        dbi(np.ones((3, 2)), [1, 1, 1])


@pytest.mark.parametrize("seed", range(5))
def test_dbi_matches_reference(seed):
    rng = np.random.default_rng(seed)
    z = np.vstack((rng.normal(0.0, 1.0, (30, 2)), rng.normal(10.0, 1.0, (30, 2))))
    labels = np.repeat([0, 1], 30)
    assert dbi(z, labels) == pytest.approx(davies_bouldin_score(z, labels), abs=1e-9)

    three = np.concatenate((labels[:20], np.full(40, 2)))
    three[25:30] = 1
    assert dbi(z, three) == pytest.approx(davies_bouldin_score(z, three), abs=1e-9)


def test_link_scores():
    z = np.array([[1.0, 0.0], [0.0, 1.0], [math.sqrt(10), 0.0]])
    pairs = np.array([[0, 1], [2, 2]])
    assert link_logits(z, pairs) == pytest.approx([0.0, 10.0])
    assert link_scores(z, pairs) == pytest.approx([0.5, 1 / (1 + math.exp(-10))])


@pytest.mark.parametrize(
    "pos, neg, auc, ap",
    [
        pytest.param([0.9, 0.8], [0.2, 0.1], 1.0, 1.0, id="separated"),
        pytest.param([0.8, 0.3], [0.5, 0.1], 0.75, (1 + 2 / 3) / 2, id="one_swap"),
        pytest.param([0.9, 0.4], [0.6, 0.2], 0.75, (1 + 2 / 3) / 2, id="ap_case"),
    ],
)
def test_ranking_metric_examples(pos, neg, auc, ap):
    scores = ranking_metrics(pos, neg)
    assert scores.auc == pytest.approx(auc)
    assert scores.ap == pytest.approx(ap)


def test_ranking_ties_count_half_and_favour_positives():
    scores = ranking_metrics([0.5], [0.5])
    assert scores.auc == 0.5
    assert scores.ap == 1.0


def test_ranking_needs_both_sides():
    with pytest.raises(DomainError):
        ranking_metrics([], [0.1])


@pytest.mark.parametrize("case", range(100))
def test_ranking_metrics_match_references(case):
    rng = np.random.default_rng(case)
    pos = rng.random(int(rng.integers(1, 15)))
    neg = rng.random(int(rng.integers(1, 15)))
    labels = np.concatenate((np.ones(pos.size), np.zeros(neg.size)))
    scores = np.concatenate((pos, neg))

    result = ranking_metrics(pos, neg)
    assert result.auc == pytest.approx(_brute_auc(pos, neg), abs=1e-9)
    assert result.auc == pytest.approx(roc_auc_score(labels, scores), abs=1e-9)
    assert result.ap == pytest.approx(
        average_precision_score(labels, scores), abs=1e-9
    )


def test_select_single_snapshot_is_returned_as_is():
    (only,) = _snapshots(dbi=[None])
    assert select_snapshot([only], "dbi") is only
    assert select_snapshot([only], "val_auc") is only


def test_select_lowest_dbi():
    snapshots = _snapshots(dbi=[0.8, 0.3, 0.5])
    assert select_snapshot(snapshots, "dbi").epoch == 20


def test_select_breaks_ties_by_epoch():
    assert select_snapshot(_snapshots(dbi=[0.4, 0.4]), "dbi").epoch == 10
    assert select_snapshot(_snapshots(val_auc=[0.7, 0.9, 0.9]), "val_auc").epoch == 20


def test_select_scores_missing_values(two_cliques):
    z_good = two_cliques.features + 0.01
    z_blurred = z_good + np.random.default_rng(0).random(z_good.shape)
    snapshots = [
        EmbeddingSnapshot(z_blurred, epoch=10),
        EmbeddingSnapshot(z_good, epoch=20),
    ]
    best = select_snapshot(snapshots, "dbi", SelectionContext(m=2))
    assert best.epoch == 20
    assert best.dbi is not None

    context = SelectionContext(
        val_pos=np.array([[0, 1], [4, 5]]), val_neg=np.array([[0, 4], [1, 5]])
    )
    best = select_snapshot(snapshots, "val_auc", context)
    assert best.val_auc == 1.0


@pytest.mark.parametrize(
    "snapshots, mode, context, error",
    [
        pytest.param([], "dbi", None, DomainError, id="empty"),
        pytest.param(
            _snapshots(dbi=[None, None]), "dbi", None, ConfigurationError, id="no_m"
        ),
        pytest.param(
            _snapshots(val_auc=[None, None]),
            "val_auc",
            None,
            ConfigurationError,
            id="no_pairs",
        ),
        pytest.param(
            _snapshots(dbi=[1.0]), "loss", None, ConfigurationError, id="mode"
        ),
    ],
)
def test_select_errors(snapshots, mode, context, error):
    with pytest.raises(error):
        select_snapshot(snapshots, mode, context)


def test_metrics_document_drops_missing_values():
    assert metrics_document(acc=0.5, dbi=None, epoch=3) == {"acc": 0.5, "epoch": 3}
