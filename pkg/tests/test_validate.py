import pytest

from core.config import CVGrids, ExperimentConfig, RealDataConfig
from core.errors import ConfigError
from core.simulate import BrownianModel, OUModel, StartKind
from core.validate import validate_experiment_config, validate_model_pair, validate_real_data_config


def test_registered_scenarios_validate_cleanly():
    for scenario_id in ('brownian-det-1', 'brownian-rand-1', 'ou-det-2', 'ou-rand-2'):
        result = validate_experiment_config(ExperimentConfig.from_scenario(scenario_id))
        assert result['roster'] == ExperimentConfig.from_scenario(scenario_id).roster
        assert result['warnings'] == []


def test_brownian_sigma_mismatch_is_singular():
    with pytest.raises(ConfigError, match='mutually singular'):
        validate_model_pair(BrownianModel(1.0, 1.0), BrownianModel(1.0, 2.0, with_drift=False))


def test_brownian_mixed_starts_rejected():
    with pytest.raises(ConfigError):
        validate_model_pair(BrownianModel(1.0, 1.0, 0.0), BrownianModel(1.0, 1.0, 0.5, with_drift=False))


def test_ou_kappa_mismatch_is_singular():
    with pytest.raises(ConfigError, match='mutually singular'):
        validate_model_pair(OUModel(1.0, 0.0, 1.0), OUModel(2.0, 1.0, 1.0))


def test_ou_rules():
    with pytest.raises(ConfigError):
        validate_model_pair(OUModel(1.0, 0.0, 1.0), OUModel(1.0, 1.0, 1.0, StartKind.RANDOM))
    with pytest.raises(ConfigError, match='c0 = 0'):
        validate_model_pair(OUModel(1.0, 0.0, 1.0, c0=1.0), OUModel(1.0, 1.0, 1.0))


def test_drift_layout_warning():
    warnings = validate_model_pair(BrownianModel(1.0, 1.0, with_drift=False), BrownianModel(1.0, 1.0))
    assert len(warnings) == 1


def test_mixed_families_drop_param_plugin():
    cfg = ExperimentConfig(BrownianModel(1.0, 1.0), OUModel(1.0, 0.0, 1.0))
    result = validate_experiment_config(cfg)

    assert 'param-plugin' not in result['roster']
    assert 'bayes' in result['roster']
    assert any('different families' in w for w in result['warnings'])
    assert any('general log-RN' in w for w in result['warnings'])


@pytest.mark.parametrize("overrides", [
    {'runs': 0},
    {'n_train': 1},
    {'n_test': 0},
    {'n_intervals': 1},
    {'prior_p': 1.0},
    {'roster': ()},
    {'roster': ('bayes', 'svm')},
    {'cv': CVGrids(h_steps=(30, 40))},
    {'cv': CVGrids(k=(0, 1))},
    {'cv': CVGrids(delta_n=1.5)},
])
def test_invalid_experiment_configs(overrides):
    cfg = ExperimentConfig.from_scenario('brownian-det-1', **overrides)
    with pytest.raises(ConfigError):
        validate_experiment_config(cfg)


def test_duplicate_roster_entries_collapse():
    cfg = ExperimentConfig.from_scenario('brownian-det-1', roster=('bayes', 'knn-sup', 'bayes'))
    assert validate_experiment_config(cfg)['roster'] == ('bayes', 'knn-sup')


def test_real_data_drops_model_based_rules(tmp_path):
    cfg = RealDataConfig(tmp_path / 'curves.csv', roster=('bayes', 'knn-sup', 'param-plugin'))
    result = validate_real_data_config(cfg)
    assert result['roster'] == ('knn-sup',)
    assert len(result['warnings']) == 2


@pytest.mark.parametrize("kwargs", [
    {'roster': ('bayes',)},
    {'trim': -1},
    {'transform': 'sqrt'},
    {'transform': 'log-offset'},
])
def test_invalid_real_data_configs(tmp_path, kwargs):
    with pytest.raises(ConfigError):
        validate_real_data_config(RealDataConfig(tmp_path / 'curves.csv', **kwargs))
