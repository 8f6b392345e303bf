import numpy as np
import pytest

from core.classifiers.base import create_classifier
from core.classifiers.bayes import (
    BROWNIAN_DET, BROWNIAN_RANDOM, OU_DET, OU_RANDOM, BayesClassifier, closed_form_kind
)
from core.classifiers.knn import KnnClassifier
from core.classifiers.plugin import NonparamPluginClassifier, ParametricPluginClassifier
from core.config import CVGrids
from core.errors import StructuralError
from core.grid import Grid
from core.scenarios import get_scenario
from core.simulate import BrownianModel, OUModel, sample_labeled


@pytest.mark.parametrize("scenario_id,kind", [
    ('brownian-det-1', BROWNIAN_DET),
    ('brownian-rand-1', BROWNIAN_RANDOM),
    ('ou-det-1', OU_DET),
    ('ou-rand-2', OU_RANDOM),
])
def test_closed_form_matches_chain(scenario_id, kind, grid50):
    scenario = get_scenario(scenario_id)
    sample = sample_labeled(scenario.model0, scenario.model1, 30, 30, 0.5, grid50, 8)

    closed = BayesClassifier(scenario.model0, scenario.model1).fit(sample)
    chain = BayesClassifier(scenario.model0, scenario.model1, use_closed_form=False).fit(sample)

    assert closed.kind == kind
    assert chain.hyperparameters() == {'rule': 'log-rn-chain'}
    assert np.allclose(closed.log_rn(sample.values), chain.log_rn(sample.values), atol=1e-6)
    assert np.array_equal(closed.predict(sample.values), chain.predict(sample.values))


def test_closed_form_kind_needs_matching_shape():
    assert closed_form_kind(BrownianModel(1.0, 1.0), BrownianModel(1.0, 1.0)) is None
    assert closed_form_kind(BrownianModel(1.0, 1.0), OUModel(1.0, 0.0, 1.0)) is None
    assert closed_form_kind(OUModel(1.0, 0.0, 1.0, c0=1.0), OUModel(1.0, 1.0, 1.0)) is None


def test_bayes_accuracy_for_identical_models(grid50):
    model = OUModel(1.0, 0.0, 1.0)
    sample = sample_labeled(model, model, 20, 20, 0.5, grid50, 3)
    classifier = BayesClassifier(model, model).fit(sample)
    assert classifier.accuracy(sample) == 0.5


@pytest.mark.parametrize("name,cls", [
    ('bayes', BayesClassifier),
    ('param-plugin', ParametricPluginClassifier),
    ('nonparam-plugin', NonparamPluginClassifier),
    ('knn-sup', KnnClassifier),
    ('KNN-PLS', KnnClassifier),
])
def test_factory(name, cls):
    scenario = get_scenario('ou-det-1')
    classifier = create_classifier(name, scenario.model0, scenario.model1, 0.5)
    assert isinstance(classifier, cls)
    assert classifier.name == name.lower()


def test_factory_errors():
    with pytest.raises(StructuralError):
        create_classifier('svm')
    with pytest.raises(StructuralError):
        create_classifier('bayes')
    with pytest.raises(StructuralError):
        create_classifier('param-plugin', BrownianModel(1.0, 1.0), OUModel(1.0, 0.0, 1.0))


def test_accuracy_checks_grid(brownian_sample, small_sample):
    classifier = create_classifier('knn-sup', cv=CVGrids(k=(1, 3)))
    with pytest.raises(StructuralError):
        classifier.accuracy(brownian_sample)

    classifier.fit(brownian_sample)
    with pytest.raises(StructuralError):
        classifier.accuracy(small_sample)


def test_knn_hyperparameters_and_metrics(small_sample):
    sup = create_classifier('knn-sup', cv=CVGrids(k=(1, 3, 5))).fit(small_sample)
    assert sup.hyperparameters() == {'k': 1}
    assert sup.accuracy(small_sample) == 1.0

    metrics = sup.get_metrics()
    assert metrics['name'] == 'knn-sup'
    assert metrics['fits'] == 1

    pls = create_classifier('knn-pls', cv=CVGrids(k=(1, 3), d=(1, 2))).fit(small_sample)
    assert set(pls.hyperparameters()) == {'k', 'd'}


def test_parametric_plugin_reports_fit(brownian_sample):
    scenario = get_scenario('brownian-det-1')
    classifier = create_classifier('param-plugin', scenario.model0, scenario.model1).fit(brownian_sample)

    chosen = classifier.hyperparameters()
    assert set(chosen) == {'c', 'sigma2'}
    assert abs(chosen['c'] - 1.5) < 1.0


def test_nonparam_plugin_records_bandwidth(grid50):
    model0 = BrownianModel(3.0, 1.0, theta=1.0)
    model1 = BrownianModel(3.0, 1.0, theta=1.0, with_drift=False)
    train = sample_labeled(model0, model1, 150, 150, 0.5, grid50, 5)

    classifier = create_classifier('nonparam-plugin', cv=CVGrids(h_steps=(10,))).fit(train)
    assert classifier.hyperparameters() == {'h': pytest.approx(0.2)}
    assert set(np.unique(classifier.predict(train.values[:20]))) <= {0, 1}


def test_nonparam_plugin_needs_small_bandwidth():
    grid = Grid.uniform(10)
    model = BrownianModel(1.0, 1.0)
    train = sample_labeled(model, BrownianModel(1.0, 1.0, with_drift=False), 5, 5, 0.5, grid, 0)

    with pytest.raises(StructuralError):
        NonparamPluginClassifier(CVGrids(h_steps=(5, 6))).fit(train)


def test_metrics_accumulate_over_refits(small_sample):
    classifier = create_classifier('knn-sup', cv=CVGrids(k=(1, 3)))
    classifier.fit(small_sample)
    classifier.fit(small_sample)

    metrics = classifier.get_metrics()
    assert metrics['fits'] == 2
    assert metrics['total_latency'] >= metrics['avg_latency'] >= 0.0
    assert not hasattr(classifier, 'reset_metrics')
