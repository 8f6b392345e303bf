import numpy as np
import pytest

import core.nonparam as nonparam
from core.errors import (
    FuncGaussError, InsufficientDataError, RegimeError,
    SelectionFailureError, SingularityError, StructuralError
)
from core.grid import Grid, LabeledSample, trapezoid
from core.nonparam import (
    REGIME_POSITIVE, REGIME_ZERO, CovarianceEstimate, SmoothingParams, cov_hat,
    default_delta_n, detect_regime, estimate_class_spec, estimate_v_positive,
    estimate_v_zero, fd_first, fd_second, loo_errors_nonparam, mean_hat,
    nonparam_plugin_classifier, select_h_cv, snap_delta_n
)
from core.simulate import BrownianModel, OUModel, StartKind, make_rng, sample_labeled


def _covariance_table(u, v):
    index = np.arange(u.size)
    low = np.minimum.outer(index, index)
    high = np.maximum.outer(index, index)
    return u[low] * v[high]


def test_mean_hat_examples(rng):
    x = rng.standard_normal(11)
    assert np.array_equal(mean_hat(x), x)
    assert np.allclose(mean_hat(np.vstack([x, -x])), 0.0)

    with pytest.raises(StructuralError):
        mean_hat(np.empty((0, 11)))


def test_fd_first_exact_cases(grid50):
    t = grid50.points
    assert fd_first(t ** 2, grid50, 0.04)[25] == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(fd_first(np.full(51, 3.0), grid50, 0.04), 0.0)

    interior = slice(2, 49)
    error = 3 * t[interior] ** 2 - fd_first(t ** 3, grid50, 0.04)[interior]
    assert np.allclose(np.abs(error), 0.04 ** 2, atol=1e-12)


def test_fd_second_exact_cases(grid50):
    t = grid50.points
    assert np.allclose(fd_second(t ** 2, grid50, 0.04)[2:49], 2.0, atol=1e-9)
    assert np.allclose(fd_second(1.0 + 2.0 * t, grid50, 0.04), 0.0, atol=1e-9)


def test_fd_second_sine_error():
    grid = Grid.uniform(100)
    t = grid.points
    estimate = fd_second(np.sin(2 * np.pi * t), grid, 0.02)
    exact = -(2 * np.pi) ** 2 * np.sin(2 * np.pi * t)
    assert np.max(np.abs(estimate - exact)[2:99]) <= (2 * np.pi) ** 4 * 0.02 ** 2 / 12


def test_fd_rejects_off_grid_bandwidth(grid50):
    with pytest.raises(StructuralError):
        fd_first(grid50.points, grid50, 0.03)
    with pytest.raises(StructuralError):
        fd_second(grid50.points, grid50, 0.5)


def test_cov_hat_examples(rng):
    identical = np.tile(rng.standard_normal(11), (5, 1))
    assert np.allclose(cov_hat(identical).table, 0.0)

    g = rng.standard_normal(11)
    assert np.allclose(cov_hat(np.vstack([g, -g])).table, np.outer(g, g))

    with pytest.raises(InsufficientDataError):
        cov_hat(g)


def test_cov_hat_symmetric_and_shift_invariant(rng):
    values = rng.standard_normal((30, 21))
    table = cov_hat(values).table
    assert np.array_equal(table, table.T)
    assert np.all(np.diag(table) >= 0)

    shift = rng.standard_normal(21)
    assert np.allclose(cov_hat(values + shift).table, table)
    assert np.allclose(mean_hat(values + shift), mean_hat(values) + shift)


def test_cov_hat_brownian_large_sample():
    grid = Grid.uniform(20)
    values = BrownianModel(0.0, 1.0).sample_paths(grid, 10_000, make_rng(8))
    expected = np.minimum.outer(grid.points, grid.points)
    assert np.max(np.abs(cov_hat(values).table - expected)) <= 0.1


def test_v_positive_constant_section(grid50):
    estimate = CovarianceEstimate(np.full((51, 51), 2.0))
    v, dv, d2v = estimate_v_positive(estimate, grid50, 0.04)
    assert np.allclose(v, 1.0)
    assert np.allclose(dv, 0.0)
    assert np.allclose(d2v, 0.0)


def test_v_positive_exact_ou_random(grid50):
    spec = OUModel(1.0, 0.0, 1.0, StartKind.RANDOM).triangular_spec(grid50)
    estimate = CovarianceEstimate(_covariance_table(spec.u, spec.v))
    v, dv, _ = estimate_v_positive(estimate, grid50, 0.04)

    assert np.allclose(v, spec.v, rtol=1e-12)
    assert np.allclose(dv, spec.dv, rtol=0.05)


def test_v_positive_rejects_zero_start(grid50):
    spec = BrownianModel(0.0, 1.0).triangular_spec(grid50)
    with pytest.raises(RegimeError):
        estimate_v_positive(CovarianceEstimate(_covariance_table(spec.u, spec.v)), grid50, 0.04)


def test_v_zero_exact_brownian(grid50):
    t = grid50.points
    parts = (t, np.ones_like(t), np.zeros_like(t))
    v, dv, d2v = estimate_v_zero(parts, parts, grid50, 0.1)

    assert np.allclose(v, 1.0)
    assert np.allclose(dv, 0.0)
    assert np.allclose(d2v, 0.0)


def test_v_zero_exact_ou_det(grid50):
    spec = OUModel(1.0, 0.0, 1.0).triangular_spec(grid50)
    u_parts = (spec.u, spec.du, spec.d2u)
    variance_parts = (
        spec.u * spec.v,
        spec.du * spec.v + spec.u * spec.dv,
        spec.d2u * spec.v + 2 * spec.du * spec.dv + spec.u * spec.d2v,
    )
    v, dv, d2v = estimate_v_zero(u_parts, variance_parts, grid50, 0.1)
    cut = snap_delta_n(0.1, grid50)

    assert np.allclose(v[cut:], spec.v[cut:], rtol=1e-10)
    assert np.allclose(dv[cut:], spec.dv[cut:], rtol=1e-8)

    offset = grid50.points[:cut] - grid50.points[cut]
    assert np.allclose(v[:cut], v[cut] + offset * dv[cut] + 0.5 * offset ** 2 * d2v[cut])
    assert np.allclose(d2v[:cut], d2v[cut])


def test_v_zero_singular_when_u_vanishes(grid50):
    zeros = np.zeros(51)
    with pytest.raises(SingularityError):
        estimate_v_zero((zeros, zeros, zeros), (zeros, zeros, zeros), grid50, 0.1)


def test_smoothing_params():
    with pytest.raises(StructuralError):
        SmoothingParams(0.6)
    assert SmoothingParams(0.04).resolve_delta_n(100) == pytest.approx(default_delta_n(0.04, 100))
    assert default_delta_n(0.04, 100) == pytest.approx(0.8318, abs=1e-4)
    assert default_delta_n(0.45, 100) == pytest.approx(0.9)
    assert SmoothingParams(0.04, 0.2).resolve_delta_n(100) == 0.2


def test_snap_delta_n(grid50):
    assert snap_delta_n(0.1, grid50) == 5
    assert snap_delta_n(0.101, grid50) == 6
    assert snap_delta_n(0.001, grid50) == 1
    with pytest.raises(StructuralError):
        snap_delta_n(0.999, grid50)


def test_detect_regime():
    assert detect_regime(np.linspace(0.0, 1.0, 11)) == REGIME_ZERO
    assert detect_regime(np.linspace(1.0, 2.0, 11)) == REGIME_POSITIVE


def test_class_spec_brownian_random_v_near_one(grid50):
    model = BrownianModel(0.0, 1.0, theta=1.0)
    close = 0
    for seed in range(20):
        values = model.sample_paths(grid50, 100, make_rng(seed))
        estimate = estimate_class_spec(values, grid50, SmoothingParams(0.1))
        assert estimate.regime == REGIME_POSITIVE
        assert estimate.spec.v[-1] == pytest.approx(1.0)
        close += np.sqrt(trapezoid((estimate.spec.v - 1.0) ** 2, grid50)) <= 0.2
    assert close >= 18


def test_class_spec_detects_zero_start(grid50):
    values = BrownianModel(1.5, 1.0).sample_paths(grid50, 400, make_rng(4))
    estimate = estimate_class_spec(values, grid50, SmoothingParams(0.1, delta_n=0.2))
    assert estimate.regime == REGIME_ZERO
    assert estimate.delta_n == 0.2
    assert estimate.spec.u_zero_at_start


def test_plugin_without_signal_is_a_coin_flip(grid50):
    model = BrownianModel(0.0, 1.0, theta=1.0)
    train = sample_labeled(model, model, 150, 150, 0.5, grid50, 1)
    test = sample_labeled(model, model, 500, 500, 0.5, grid50, 2)

    plugin = nonparam_plugin_classifier(train, 0.2)
    accuracy = np.mean(plugin.predict(test.values) == test.labels)
    assert abs(accuracy - 0.5) <= 0.08


def test_plugin_separates_strong_drift(grid50):
    model0 = BrownianModel(3.0, 1.0, theta=1.0)
    model1 = BrownianModel(3.0, 1.0, theta=1.0, with_drift=False)
    train = sample_labeled(model0, model1, 150, 150, 0.5, grid50, 5)
    test = sample_labeled(model0, model1, 200, 200, 0.5, grid50, 6)

    plugin = nonparam_plugin_classifier(train, 0.2)
    assert plugin.left_cut == 0.2
    assert plugin.evaluator.start == 10
    assert np.mean(plugin.predict(test.values) == test.labels) > 0.65


def test_plugin_needs_two_curves_per_class(grid50):
    train = LabeledSample(grid50, np.zeros((3, 51)), [0, 0, 1])
    with pytest.raises(InsufficientDataError):
        nonparam_plugin_classifier(train, 0.1)


def _brute_force_loo(train, h):
    mistakes = 0
    for i in range(len(train)):
        try:
            plugin = nonparam_plugin_classifier(train.without(i), h)
            mistakes += int(plugin.predict(train.values[i])[0] != train.labels[i])
        except FuncGaussError:
            mistakes += 1
    return mistakes / len(train)


def test_loo_matches_brute_force():
    grid = Grid.uniform(20)
    model0 = BrownianModel(1.5, 0.5, theta=2.0)
    model1 = BrownianModel(1.5, 0.5, theta=2.0, with_drift=False)
    train = sample_labeled(model0, model1, 5, 5, 0.5, grid, 13)

    assert loo_errors_nonparam(train, 0.1) == _brute_force_loo(train, 0.1)


def test_select_h_single_candidate_returned(brownian_sample):
    assert select_h_cv(brownian_sample, [0.08]) == 0.08


def test_select_h_prefers_lower_error(monkeypatch, brownian_sample):
    errors = {0.04: 0.30, 0.08: 0.25, 0.12: 0.25}
    monkeypatch.setattr(nonparam, 'loo_errors_nonparam', lambda train, h, delta_n=None: errors[h])
    assert select_h_cv(brownian_sample, [0.12, 0.04, 0.08]) == 0.08


def test_select_h_all_candidates_fail(brownian_sample):
    with pytest.raises(SelectionFailureError):
        select_h_cv(brownian_sample, [0.6, 0.7])


@pytest.mark.slow
def test_mean_estimate_error_follows_root_n(grid50):
    model = BrownianModel(1.5, 1.0)
    truth = model.mean(grid50)

    def median_error(n):
        errors = [
            np.sqrt(trapezoid((mean_hat(model.sample_paths(grid50, n, make_rng([n, seed]))) - truth) ** 2, grid50))
            for seed in range(50)
        ]
        return np.median(errors)

    assert 0.35 <= median_error(400) / median_error(100) <= 0.75


def test_loo_refits_the_estimated_prior():
    grid = Grid.uniform(20)
    model0 = BrownianModel(1.5, 0.5, theta=2.0)
    model1 = BrownianModel(1.5, 0.5, theta=2.0, with_drift=False)
    drawn = sample_labeled(model0, model1, 4, 7, 0.5, grid, 21)
    train = LabeledSample(grid, drawn.values, drawn.labels)

    assert train.prior_p is None
    assert loo_errors_nonparam(train, 0.1) == _brute_force_loo(train, 0.1)


@pytest.mark.slow
def test_v_second_derivative_error_shrinks_with_n(grid50):
    model = BrownianModel(1.5, 1.0)
    truth = model.triangular_spec(grid50).d2v

    def median_error(n):
        steps = round(n ** (-9 / 50) / grid50.delta)
        params = SmoothingParams(steps * grid50.delta, n ** (-1 / 25))
        errors = []
        for seed in range(40):
            values = model.sample_paths(grid50, n, make_rng([n, seed, 1]))
            try:
                estimate = estimate_class_spec(values, grid50, params)
            except FuncGaussError:
                continue
            assert estimate.regime == REGIME_ZERO
            errors.append(np.sqrt(trapezoid((estimate.spec.d2v - truth) ** 2, grid50)))
        assert len(errors) >= 20
        return np.median(errors)

    medians = [median_error(n) for n in (100, 400, 1600)]
    assert medians[0] > medians[1] > medians[2]
