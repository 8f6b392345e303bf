import numpy as np
import pytest

from core.aggregate import (
    SUMMARY_COLUMNS, aggregate_runs, create_timing_summary, get_report_summary_text,
    summarize_accuracies
)

ROSTER = ('bayes', 'knn-sup')


def _run(index, bayes, knn, errors=None):
    accuracies = {'bayes': bayes, 'knn-sup': knn}
    return {
        'run': index,
        'success': True,
        'accuracies': {k: v for k, v in accuracies.items() if v is not None},
        'errors': errors or {},
        'hyperparameters': {'knn-sup': {'k': 3}},
        'metrics': {
            'bayes': {'name': 'bayes', 'fits': 1, 'total_latency': 0.01, 'avg_latency': 0.01},
            'knn-sup': {'name': 'knn-sup', 'fits': 1, 'total_latency': 0.5, 'avg_latency': 0.5},
        },
    }


def test_summarize_uses_sample_sd():
    mean, sd, count = summarize_accuracies([0.6, 0.8, 0.7])
    assert mean == pytest.approx(0.7)
    assert sd == pytest.approx(0.1)
    assert count == 3


def test_summarize_single_and_empty():
    assert summarize_accuracies([0.75]) == (0.75, 0.0, 1)

    mean, sd, count = summarize_accuracies([np.nan, None])
    assert np.isnan(mean) and np.isnan(sd) and count == 0


def test_aggregate_orders_runs_and_excludes_errors():
    results = [
        _run(2, 0.9, None, errors={'knn-sup': 'SelectionFailureError: nothing usable'}),
        _run(0, 0.7, 0.6),
        _run(1, 0.8, 0.7),
    ]
    report = aggregate_runs(results, ROSTER, provenance={'seed': 3})

    assert list(report.summary.columns) == SUMMARY_COLUMNS
    assert list(report.per_run['run']) == [0, 1, 2]
    assert report.classifiers == list(ROSTER)

    knn = report.row('knn-sup')
    assert knn['mean'] == pytest.approx(0.65)
    assert knn['runs_ok'] == 2
    assert report.row('bayes')['sd'] == pytest.approx(0.1)

    assert report.errors == [{'run': 2, 'classifier': 'knn-sup', 'error': 'SelectionFailureError: nothing usable'}]
    assert any('knn-sup: 1 run(s) errored' in w for w in report.warnings)


def test_aggregate_is_independent_of_completion_order():
    results = [_run(i, 0.5 + 0.01 * i, 0.6) for i in range(6)]
    forward = aggregate_runs(results, ROSTER)
    backward = aggregate_runs(list(reversed(results)), ROSTER)
    assert forward.summary.equals(backward.summary)


def test_failed_run_counts_against_every_classifier():
    results = [_run(0, 0.7, 0.6), {'run': 1, 'success': False, 'error': 'boom'}]
    report = aggregate_runs(results, ROSTER)

    assert len(report.errors) == 2
    assert report.row('bayes')['runs_ok'] == 1
    assert report.row('bayes')['sd'] == 0.0


def test_row_unknown_classifier():
    report = aggregate_runs([_run(0, 0.7, 0.6)], ROSTER)
    with pytest.raises(KeyError):
        report.row('knn-pls')


def test_timing_summary():
    timing = create_timing_summary({
        'bayes': [{'fits': 1, 'total_latency': 0.2}, {'fits': 1, 'total_latency': 0.4}],
        'knn-sup': [],
    })
    bayes = timing[timing['classifier'] == 'bayes'].iloc[0]
    assert bayes['fits'] == 2
    assert bayes['avg_latency'] == pytest.approx(0.3)
    assert timing[timing['classifier'] == 'knn-sup'].iloc[0]['avg_latency'] == 0.0


def test_summary_text():
    report = aggregate_runs([_run(0, 0.9, 0.6)], ROSTER, provenance={'scenario': 'ou-det-1', 'runs': 1})
    text = get_report_summary_text(report)
    assert 'Scenario: ou-det-1' in text
    assert 'Best: bayes (0.90)' in text
