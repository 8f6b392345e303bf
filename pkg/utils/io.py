"""
Report output: text table, CSV and XLSX export with proper formatting.
"""

import io
from typing import List

import pandas as pd

from core.aggregate import SUMMARY_COLUMNS, ExperimentReport
from core.errors import IngestionError


def _float_repr(value: float) -> str:
    return repr(float(value))


def summary_to_csv(summary: pd.DataFrame) -> str:
    """Summary rows as CSV, floats at full (round-trip) precision."""
    return summary[SUMMARY_COLUMNS].to_csv(
        index=False, lineterminator='\n', float_format=_float_repr
    )


def parse_report_csv(text: str) -> pd.DataFrame:
    """
    Read a summary CSV written by emit_report.

    Raises:
        IngestionError: If the columns differ from the report layout
    """
    frame = pd.read_csv(io.StringIO(text), float_precision='round_trip')

    if list(frame.columns) != SUMMARY_COLUMNS:
        raise IngestionError(
            f"Report columns {list(frame.columns)} do not match {SUMMARY_COLUMNS}"
        )

    frame['classifier'] = frame['classifier'].astype(str)
    frame['runs_ok'] = frame['runs_ok'].astype(int)
    return frame


def _provenance_line(report: ExperimentReport) -> str:
    provenance = report.provenance
    parts = []
    for key in ('scenario', 'input', 'seed', 'runs', 'curves', 'version'):
        if provenance.get(key) is not None:
            parts.append(f"{key}: {provenance[key]}")
    if provenance.get('config_sha256'):
        parts.append(f"config: {provenance['config_sha256'][:12]}")
    return "# " + "  ".join(parts)


def emit_report(report: ExperimentReport, format: str = 'table') -> str:
    """
    Render a report.

    Args:
        report: Experiment report
        format: 'table' (2 decimals, with provenance and error counts)
            or 'csv' (summary columns at full precision)

    Returns:
        Report text
    """
    if format == 'csv':
        return summary_to_csv(report.summary)

    if format != 'table':
        raise ValueError(f"Unknown report format: {format}")

    table = report.summary.copy()
    table['errors'] = [
        sum(1 for e in report.errors if e['classifier'] == name) for name in table['classifier']
    ]
    formatters = {'mean': '{:.2f}'.format, 'sd': '{:.2f}'.format}

    if report.published:
        table['published'] = [
            f"{report.published[name][0]:.2f} ({report.published[name][1]:.2f})"
            if name in report.published else ''
            for name in table['classifier']
        ]

    lines = [_provenance_line(report), table.to_string(index=False, formatters=formatters)]
    if report.warnings:
        lines.append(create_warnings_text(report.warnings))

    return "\n".join(lines) + "\n"


def create_warnings_text(warnings: List[str]) -> str:
    """
    Numbered list of report warnings.
    """
    if not warnings:
        return "No warnings"

    report = "Warnings:\n"
    for i, warning in enumerate(warnings, 1):
        report += f"{i}. {warning}\n"

    return report.rstrip("\n")


def report_to_xlsx(report: ExperimentReport) -> bytes:
    """
    Create an XLSX workbook with three sheets:
    - Summary: mean, sd and runs_ok per classifier
    - Runs: accuracy per run and classifier
    - Timing: fit counts and latencies

    Returns:
        XLSX file as bytes
    """
    output = io.BytesIO()

    with pd.ExcelWriter(output, engine='xlsxwriter') as writer:
        workbook = writer.book

        header_format = workbook.add_format({
            'bold': True,
            'bg_color': '#4472C4',
            'font_color': 'white',
            'border': 1
        })
        accuracy_format = workbook.add_format({'num_format': '0.0000'})

        sheets = [
            ('Summary', report.summary),
            ('Runs', report.per_run),
            ('Timing', report.timing),
        ]

        for sheet_name, frame in sheets:
            frame.to_excel(writer, index=False, sheet_name=sheet_name)
            worksheet = writer.sheets[sheet_name]

            for col_num, value in enumerate(frame.columns.values):
                worksheet.write(0, col_num, value, header_format)

            for i, col in enumerate(frame.columns):
                width = max(len(str(col)), 10) + 2
                if sheet_name == 'Runs' and col != 'run':
                    worksheet.set_column(i, i, width, accuracy_format)
                else:
                    worksheet.set_column(i, i, width)

    output.seek(0)
    return output.getvalue()
