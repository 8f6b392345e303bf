import numpy as np
import pytest

from core.errors import DegenerateProjectionError, SelectionFailureError, StructuralError
from core.grid import Curve, Grid, LabeledSample, sup_distance
from core.knn import (
    PLS, SUP, SUP_NORM, KnnConfig, fit_pls_semimetric, knn_classify, knn_predict,
    loo_errors_from_distances, loo_errors_pls, pls_rotations, select_knn_cv, truncate, vote
)


def _brute_force_label(train_values, train_labels, query, k, distance):
    distances = [distance(row, query) for row in train_values]
    order = sorted(range(len(distances)), key=lambda i: (distances[i], i))[:k]
    votes = sum(train_labels[i] for i in order)
    return int(votes / k > 0.5)


def _sup(a, b):
    return float(np.max(np.abs(a - b)))


def test_sup_semimetric_matches_sup_distance(grid50, rng):
    a = Curve(grid50, rng.standard_normal(51))
    b = Curve(grid50, rng.standard_normal(51))
    assert SUP_NORM(a, b) == pytest.approx(sup_distance(a, b))
    assert SUP_NORM(a, a) == 0.0


def test_k_equal_to_sample_size_gives_majority():
    grid = Grid.uniform(4)
    values = np.arange(25, dtype=float).reshape(5, 5)
    train = LabeledSample(grid, values, [0, 1, 1, 0, 1])
    queries = np.random.default_rng(0).standard_normal((6, 5)) * 20
    assert np.all(knn_predict(train, KnnConfig(5), queries) == 1)


def test_nearest_neighbour_toy():
    grid = Grid.uniform(2)
    train = LabeledSample(grid, [[0, 0, 0], [1, 1, 1], [5, 5, 5]], [0, 0, 1])
    assert knn_classify(train, KnnConfig(1), np.array([4.0, 4.0, 4.0])) == 1


def test_vote_tie_rules():
    labels = np.array([1, 0, 1, 0])
    # equal distances: lower index wins
    assert vote(np.array([1.0, 1.0, 2.0, 3.0]), labels, 1) == 1
    # half-half goes to 0
    assert vote(np.array([1.0, 2.0, 3.0, 4.0]), labels, 2) == 0


def test_knn_matches_brute_force(rng):
    grid = Grid.uniform(10)
    train = LabeledSample(grid, rng.standard_normal((20, 11)), rng.integers(0, 2, 20))
    queries = rng.standard_normal((50, 11))

    predicted = knn_predict(train, KnnConfig(5), queries)
    expected = [_brute_force_label(train.values, train.labels, q, 5, _sup) for q in queries]
    assert list(predicted) == expected


@pytest.mark.parametrize("k", [1, 3, 5, 7])
def test_knn_ignores_training_order(k, rng):
    grid = Grid.uniform(10)
    train = LabeledSample(grid, rng.standard_normal((25, 11)), rng.integers(0, 2, 25))
    order = rng.permutation(25)
    shuffled = LabeledSample(grid, train.values[order], train.labels[order])
    queries = rng.standard_normal((40, 11))

    assert np.array_equal(knn_predict(train, KnnConfig(k), queries), knn_predict(shuffled, KnnConfig(k), queries))


@pytest.mark.parametrize("k", [1, 3, 5])
def test_duplicating_an_agreeing_nearest_neighbour_keeps_the_label(k, rng):
    grid = Grid.uniform(10)
    train = LabeledSample(grid, rng.standard_normal((20, 11)), rng.integers(0, 2, 20))

    checked = 0
    for query in rng.standard_normal((60, 11)):
        label = knn_classify(train, KnnConfig(k), query)
        nearest = int(np.argmin(SUP_NORM.pairwise(query, train.values)[0]))
        if train.labels[nearest] != label:
            continue

        grown = LabeledSample(
            grid,
            np.vstack([train.values, train.values[nearest]]),
            np.append(train.labels, train.labels[nearest]),
        )
        assert knn_classify(grown, KnnConfig(k), query) == label
        checked += 1

    assert checked > 0


def test_k_above_sample_size_rejected(small_sample):
    with pytest.raises(StructuralError):
        knn_predict(small_sample, KnnConfig(13), small_sample.values)
    with pytest.raises(StructuralError):
        KnnConfig(0)


def test_pls_first_direction_maximizes_covariance(rng):
    values = rng.standard_normal((15, 8))
    labels = (values[:, 2] + 0.5 * rng.standard_normal(15) > 0).astype(int)

    _, rotations, notes = pls_rotations(values, labels, 1)
    centered = values - values.mean(axis=0)
    target = labels - labels.mean()

    direction = centered.T @ target
    direction /= np.linalg.norm(direction)
    assert notes == []
    assert np.allclose(rotations[:, 0], direction)

    best = abs(target @ centered @ direction)
    for _ in range(500):
        trial = rng.standard_normal(8)
        trial /= np.linalg.norm(trial)
        assert abs(target @ centered @ trial) <= best + 1e-12


def test_pls_hand_computable_instance():
    grid = Grid.uniform(2)
    train = LabeledSample(grid, [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 2.0, 0.0]], [0, 0, 1])
    metric = fit_pls_semimetric(train, 1)

    assert np.allclose(np.abs(metric.rotations[:, 0]), [0.0, 1.0, 0.0])
    assert metric(np.array([0.0, 0.0, 0.0]), np.array([7.0, 2.0, -3.0])) == pytest.approx(2.0)


def test_pls_semimetric_axioms(small_sample, rng):
    metric = fit_pls_semimetric(small_sample, 2)
    x, y = rng.standard_normal((2, 11))
    assert metric(x, x) == 0.0
    assert metric(x, y) == pytest.approx(metric(y, x))
    assert metric(x, y) >= 0.0


def test_pls_nested_scores(small_sample):
    metric = fit_pls_semimetric(small_sample, 3)
    first = truncate(metric, 1)
    assert first.directions == 1
    assert np.allclose(first.scores(small_sample.values)[:, 0], metric.scores(small_sample.values)[:, 0])


def test_pls_constant_labels_degenerate(small_sample):
    with pytest.raises(DegenerateProjectionError):
        fit_pls_semimetric(small_sample.with_labels(np.zeros(12)), 1)


def test_pls_direction_limit(small_sample):
    with pytest.raises(StructuralError):
        fit_pls_semimetric(small_sample, 12)


def test_pls_stops_early_on_rank_one_data():
    grid = Grid.uniform(10)
    generator = np.random.default_rng(4)
    values = np.outer(generator.standard_normal(10), np.sin(np.linspace(0, 3, 11)))
    train = LabeledSample(grid, values, [0, 1] * 5)

    metric = fit_pls_semimetric(train, 3)
    assert metric.directions == 1
    assert metric.requested_directions == 3
    assert metric.notes


def test_select_single_candidate(small_sample):
    assert select_knn_cv(small_sample, k_candidates=[3]).k == 3


def test_select_separable_prefers_k1(small_sample):
    cfg = select_knn_cv(small_sample, k_candidates=range(1, 6))
    assert cfg.k == 1
    assert cfg.semimetric.kind == SUP


def test_select_without_usable_k(small_sample):
    with pytest.raises(SelectionFailureError):
        select_knn_cv(small_sample, k_candidates=[20])


def test_loo_errors_match_brute_force(small_sample, rng):
    train = small_sample.with_labels(rng.integers(0, 2, 12))
    ks = [1, 3, 5]
    table = SUP_NORM.pairwise(train.values, train.values)
    errors = loo_errors_from_distances(table, train.labels, ks)

    for position, k in enumerate(ks):
        mistakes = 0
        for i in range(len(train)):
            reduced = train.without(i)
            label = _brute_force_label(reduced.values, reduced.labels, train.values[i], k, _sup)
            mistakes += label != train.labels[i]
        assert errors[position] == mistakes / len(train)


def test_pls_loo_errors_match_brute_force(rng):
    grid = Grid.uniform(10)
    values = rng.standard_normal((12, 11))
    labels = (values[:, 4] + 0.8 * rng.standard_normal(12) > 0).astype(int)
    train = LabeledSample(grid, values, labels)
    ks, ds = [1, 3], [1, 2]

    table = loo_errors_pls(train, ks, ds)

    for di, d in enumerate(ds):
        for ki, k in enumerate(ks):
            mistakes = 0
            for i in range(len(train)):
                reduced = train.without(i)
                metric = fit_pls_semimetric(reduced, d)
                predicted = knn_predict(reduced, KnnConfig(k, metric), values[i])[0]
                mistakes += predicted != labels[i]
            assert table[di, ki] == mistakes / len(train)


def test_select_pls_returns_fitted_semimetric(small_sample):
    cfg = select_knn_cv(small_sample, k_candidates=[1, 3], d_candidates=[1, 2], kind=PLS)
    assert cfg.semimetric.kind == PLS
    assert cfg.semimetric.directions in (1, 2)
    assert cfg.k in (1, 3)


def test_unknown_semimetric_kind(small_sample):
    with pytest.raises(StructuralError):
        select_knn_cv(small_sample, kind='cosine')
