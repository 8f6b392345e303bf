"""
Aggregation of per-run classifier accuracies into an experiment report.
Runs are reduced in run-index order, so the report does not depend on the
order in which parallel runs finished.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd


logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ['classifier', 'mean', 'sd', 'runs_ok']


@dataclass
class ExperimentReport:
    """
    Summary per classifier plus the per-run accuracy table.

    per_run has one row per run and one column per classifier; errored
    (run, classifier) cells are NaN.
    """

    summary: pd.DataFrame
    per_run: pd.DataFrame
    errors: List[Dict[str, Any]] = field(default_factory=list)
    hyperparameters: List[Dict[str, Any]] = field(default_factory=list)
    timing: pd.DataFrame = field(default_factory=pd.DataFrame)
    provenance: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    published: Dict[str, Tuple[float, float]] = field(default_factory=dict)

    @property
    def classifiers(self) -> List[str]:
        return list(self.summary['classifier'])

    def row(self, classifier: str) -> Dict[str, Any]:
        match = self.summary[self.summary['classifier'] == classifier]
        if match.empty:
            raise KeyError(classifier)
        return match.iloc[0].to_dict()


def summarize_accuracies(accuracies: Sequence[float]) -> Tuple[float, float, int]:
    """
    Mean, SD (ddof=1, 0 for a single run) and count of the finite values.
    """
    values = np.asarray([a for a in accuracies if a is not None and np.isfinite(a)], dtype=float)

    if values.size == 0:
        return float('nan'), float('nan'), 0
    if values.size == 1:
        return float(values[0]), 0.0, 1

    return float(values.mean()), float(values.std(ddof=1)), int(values.size)


def aggregate_runs(
    run_results: List[Dict[str, Any]],
    roster: Sequence[str],
    provenance: Optional[Dict[str, Any]] = None,
    warnings: Optional[List[str]] = None,
    published: Optional[Dict[str, Tuple[float, float]]] = None
) -> ExperimentReport:
    """
    Reduce run results to a report.

    Args:
        run_results: One dict per run with keys run, accuracies, errors,
            hyperparameters and metrics (a failed run carries success=False
            and error instead)
        roster: Classifier names, in report order
        provenance: Config hash, seed and code version
        warnings: Messages collected before the runs
        published: Reference (mean, sd) per classifier

    Returns:
        ExperimentReport
    """
    ordered = sorted(run_results, key=lambda r: r['run'])
    warnings = list(warnings or [])

    accuracy_rows = []
    errors = []
    hyperparameters = []
    latency = {name: [] for name in roster}

    for result in ordered:
        run = result['run']
        row = {'run': run}

        if not result.get('success', True):
            for name in roster:
                row[name] = np.nan
                errors.append({'run': run, 'classifier': name, 'error': result.get('error', '')})
            accuracy_rows.append(row)
            continue

        for name in roster:
            row[name] = result['accuracies'].get(name, np.nan)
            if name in result.get('errors', {}):
                errors.append({'run': run, 'classifier': name, 'error': result['errors'][name]})
            if name in result.get('metrics', {}):
                latency[name].append(result['metrics'][name])

        hyperparameters.append({'run': run, **{
            name: chosen for name, chosen in result.get('hyperparameters', {}).items()
        }})
        warnings.extend(result.get('warnings', []))
        accuracy_rows.append(row)

    per_run = pd.DataFrame(accuracy_rows, columns=['run', *roster])

    summary_rows = []
    for name in roster:
        mean, sd, runs_ok = summarize_accuracies(per_run[name].tolist())
        summary_rows.append({'classifier': name, 'mean': mean, 'sd': sd, 'runs_ok': runs_ok})

    summary = pd.DataFrame(summary_rows, columns=SUMMARY_COLUMNS)
    summary['runs_ok'] = summary['runs_ok'].astype(int)

    error_counts = {name: sum(1 for e in errors if e['classifier'] == name) for name in roster}
    for name, count in error_counts.items():
        if count:
            message = f"{name}: {count} run(s) errored and were excluded"
            logger.warning(message)
            warnings.append(message)

    timing = create_timing_summary(latency)

    return ExperimentReport(
        summary=summary,
        per_run=per_run,
        errors=errors,
        hyperparameters=hyperparameters,
        timing=timing,
        provenance=dict(provenance or {}),
        warnings=warnings,
        published=dict(published or {}),
    )


def create_timing_summary(latency: Dict[str, List[Dict[str, Any]]]) -> pd.DataFrame:
    """Fit count and mean fit latency per classifier over all runs."""
    rows = []
    for name, metrics in latency.items():
        fits = sum(m['fits'] for m in metrics)
        total = sum(m['total_latency'] for m in metrics)
        rows.append({
            'classifier': name,
            'fits': fits,
            'total_latency': round(total, 3),
            'avg_latency': round(total / fits, 4) if fits else 0.0,
        })
    return pd.DataFrame(rows, columns=['classifier', 'fits', 'total_latency', 'avg_latency'])


def get_report_summary_text(report: ExperimentReport) -> str:
    """
    Short text summary of a report.
    """
    provenance = report.provenance
    lines = []

    if provenance.get('scenario'):
        lines.append(f"Scenario: {provenance['scenario']}")
    lines.append(f"Runs: {provenance.get('runs', len(report.per_run))}")
    lines.append(f"Errored classifier runs: {len(report.errors)}")

    best = report.summary.dropna(subset=['mean'])
    if not best.empty:
        top = best.loc[best['mean'].idxmax()]
        lines.append(f"Best: {top['classifier']} ({top['mean']:.2f})")

    return "\n".join(lines)
