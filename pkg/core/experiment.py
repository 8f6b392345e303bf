"""
Experiment orchestration: the Monte Carlo protocol on simulated class pairs
and leave-one-out evaluation of real curve files.
"""

import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from core import __version__
from core.aggregate import ExperimentReport, aggregate_runs
from core.classifiers.base import create_classifier
from core.config import ExperimentConfig, RealDataConfig, env_workers
from core.errors import ConfigError
from core.grid import Grid, LabeledSample
from core.ingest import apply_transform, read_curve_csv, to_labeled_sample, trim_start
from core.scenarios import SCENARIOS
from core.simulate import sample_labeled
from core.validate import validate_experiment_config, validate_real_data_config
from utils.parallel import ProgressCallback, run_replications


logger = logging.getLogger(__name__)


def _fit_and_score(classifier, train: LabeledSample, test: LabeledSample, outcome: Dict[str, Any]) -> None:
    name = classifier.name
    try:
        classifier.fit(train)
        outcome['accuracies'][name] = classifier.accuracy(test)
        outcome['hyperparameters'][name] = classifier.hyperparameters()
    except Exception as e:
        # One classifier failing must not abort the run
        logger.warning("Run %d: %s failed: %s", outcome['run'], name, e)
        outcome['errors'][name] = f"{type(e).__name__}: {e}"
    finally:
        outcome['metrics'][name] = classifier.get_metrics()
        outcome['warnings'].extend(f"Run {outcome['run']}: {name}: {w}" for w in classifier.warnings)


def draw_run_samples(cfg: ExperimentConfig, run: int):
    """Training and test samples of one run from the stream seeded by (seed, run)."""
    rng = np.random.default_rng([cfg.seed, run])
    grid = Grid.uniform(cfg.n_intervals)

    train = sample_labeled(cfg.model0, cfg.model1, cfg.n_train, cfg.n_train, cfg.prior_p, grid, rng)
    test = sample_labeled(cfg.model0, cfg.model1, cfg.n_test, cfg.n_test, cfg.prior_p, grid, rng)
    return train, test


def run_single(cfg: ExperimentConfig, run: int, roster: Sequence[str]) -> Dict[str, Any]:
    """
    One Monte Carlo run: fresh train/test draw, CV on train, accuracy on test.
    """
    train, test = draw_run_samples(cfg, run)
    outcome = {
        'run': run, 'success': True, 'accuracies': {}, 'errors': {},
        'hyperparameters': {}, 'metrics': {}, 'warnings': [],
    }

    for name in roster:
        classifier = create_classifier(name, cfg.model0, cfg.model1, cfg.prior_p, cfg.cv)
        _fit_and_score(classifier, train, test, outcome)

    return outcome


def provenance_for(cfg, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    data = {
        'config_sha256': cfg.config_hash(),
        'version': __version__,
    }
    data.update(extra or {})
    return data


def run_experiment(
    cfg: ExperimentConfig,
    max_workers: Optional[int] = None,
    progress_callback: Optional[ProgressCallback] = None
) -> ExperimentReport:
    """
    Run the Monte Carlo protocol.

    Args:
        cfg: Experiment configuration
        max_workers: Parallel runs (default from FUNCGAUSS_WORKERS)
        progress_callback: Called with (completed, total)

    Returns:
        ExperimentReport, identical for identical configurations

    Raises:
        ConfigError: On an invalid configuration
    """
    checked = validate_experiment_config(cfg)
    roster = checked['roster']
    workers = max_workers or env_workers()

    logger.info(
        "Starting experiment %s: %d runs, roster %s, %d workers",
        cfg.scenario_id or 'custom', cfg.runs, ', '.join(roster), workers
    )

    results = run_replications(
        cfg.runs,
        lambda run: run_single(cfg, run, roster),
        max_workers=workers,
        progress_callback=progress_callback,
    )

    published = SCENARIOS[cfg.scenario_id].published if cfg.scenario_id in SCENARIOS else {}
    report = aggregate_runs(
        results,
        roster,
        provenance=provenance_for(cfg, {
            'scenario': cfg.scenario_id, 'seed': cfg.seed, 'runs': cfg.runs,
        }),
        warnings=checked['warnings'],
        published=published,
    )

    for row in report.summary.itertuples():
        logger.info("%s: mean %.4f sd %.4f (%d runs)", row.classifier, row.mean, row.sd, row.runs_ok)

    return report


def load_real_sample(cfg: RealDataConfig) -> LabeledSample:
    """Read, trim and transform the curve file; the prior comes from the class counts."""
    table = read_curve_csv(cfg.input_path, cfg.label_column)
    table = trim_start(table, cfg.trim)
    table = apply_transform(table, cfg.transform, cfg.offset)
    return to_labeled_sample(table)


def _loo_fold(sample: LabeledSample, index: int, roster: Sequence[str], cfg: RealDataConfig) -> Dict[str, Any]:
    train = sample.without(index)
    test = LabeledSample(sample.grid, sample.values[index:index + 1], sample.labels[index:index + 1])

    outcome = {
        'run': index, 'success': True, 'accuracies': {}, 'errors': {},
        'hyperparameters': {}, 'metrics': {}, 'warnings': [],
    }
    for name in roster:
        classifier = create_classifier(name, cv=cfg.cv)
        _fit_and_score(classifier, train, test, outcome)

    return outcome


def run_real_data(
    cfg: RealDataConfig,
    max_workers: Optional[int] = None,
    progress_callback: Optional[ProgressCallback] = None
) -> ExperimentReport:
    """
    Nested leave-one-out over a real curve file.

    Every held-out curve is classified by rules trained (with their own
    cross-validation) on the remaining curves. A fold that fails counts as
    a misclassification.

    Raises:
        ConfigError: On an invalid configuration
        IngestionError: On malformed input or an offset violation
    """
    checked = validate_real_data_config(cfg)
    roster = checked['roster']
    warnings: List[str] = list(checked['warnings'])

    sample = load_real_sample(cfg)
    if min(sample.class_count(0), sample.class_count(1)) < 3:
        raise ConfigError("Each class needs at least three curves for nested leave-one-out")

    workers = max_workers or env_workers()
    logger.info("Real-data leave-one-out over %d curves, roster %s", len(sample), ', '.join(roster))

    folds = run_replications(
        len(sample),
        lambda index: _loo_fold(sample, index, roster, cfg),
        max_workers=workers,
        progress_callback=progress_callback,
    )

    accuracies = {}
    failures = {}
    for name in roster:
        correct = 0
        failures[name] = 0
        for fold in folds:
            if fold.get('success', True) and name in fold['accuracies']:
                correct += fold['accuracies'][name]
            else:
                failures[name] += 1
        accuracies[name] = correct / len(sample)
        if failures[name]:
            warnings.append(f"{name}: {failures[name]} fold(s) failed and were counted as errors")

    summary_run = {
        'run': 0, 'success': True, 'accuracies': accuracies, 'errors': {},
        'hyperparameters': {}, 'metrics': _merge_metrics(folds, roster), 'warnings': [],
    }

    return aggregate_runs(
        [summary_run],
        roster,
        provenance=provenance_for(cfg, {
            'input': str(cfg.input_path), 'curves': len(sample), 'runs': 1,
        }),
        warnings=warnings,
    )


def _merge_metrics(folds: List[Dict[str, Any]], roster: Sequence[str]) -> Dict[str, Dict[str, Any]]:
    merged = {}
    for name in roster:
        metrics = [f['metrics'][name] for f in folds if name in f.get('metrics', {})]
        merged[name] = {
            'name': name,
            'fits': sum(m['fits'] for m in metrics),
            'total_latency': sum(m['total_latency'] for m in metrics),
        }
    return merged
