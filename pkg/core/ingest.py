"""
Curve CSV ingestion: parsing, row/column diagnostics, trimming and the
value transform applied before classification.

Format: header 'label,<t0>,<t1>,...,<tN>' with the sampling times, then one
row per curve with the label followed by N+1 values.
"""

import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd

from core.errors import IngestionError
from core.grid import Grid, LabeledSample


logger = logging.getLogger(__name__)

TIME_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class CurveTable:
    """Raw curves as read from a CSV, before mapping onto [0, 1]."""

    times: np.ndarray
    values: np.ndarray
    labels: np.ndarray
    label_values: List[object]

    def __len__(self) -> int:
        return self.labels.size


def _parse_times(columns: List[str]) -> np.ndarray:
    try:
        return np.array([float(c) for c in columns])
    except ValueError:
        # Headers like t0, t1, ... carry no times; assume a uniform axis
        return np.arange(len(columns), dtype=float)


def read_curve_csv(
    source: Union[str, Path, io.StringIO],
    label_column: str = 'label'
) -> CurveTable:
    """
    Read a curve CSV.

    Args:
        source: Path or text buffer
        label_column: Name of the label column

    Returns:
        CurveTable with labels mapped to 0/1 (sorted label values)

    Raises:
        IngestionError: On unreadable input, ragged rows, non-numeric cells
            or a label column without exactly two values
    """
    try:
        frame = pd.read_csv(source, dtype=str, keep_default_na=False)
    except pd.errors.ParserError as e:
        raise IngestionError(f"Curve matrix is not rectangular: {e}") from e
    except (OSError, UnicodeDecodeError) as e:
        raise IngestionError(f"Cannot read curve file: {e}") from e

    if label_column not in frame.columns:
        raise IngestionError(f"Label column '{label_column}' not found", column=label_column)

    value_columns = [c for c in frame.columns if c != label_column]
    if len(value_columns) < 3:
        raise IngestionError("Curves need at least three sampling times")
    if frame.empty:
        raise IngestionError("The curve file contains no rows")

    values = np.empty((len(frame), len(value_columns)))
    for row_index, (_, row) in enumerate(frame.iterrows(), start=1):
        for col_index, column in enumerate(value_columns):
            cell = row[column]
            if not isinstance(cell, str) or not cell.strip():
                raise IngestionError("Missing value", row=row_index, column=column)
            cell = cell.strip()
            try:
                values[row_index - 1, col_index] = float(cell)
            except ValueError:
                raise IngestionError(f"Non-numeric value '{cell}'", row=row_index, column=column) from None

    raw_labels = frame[label_column].str.strip()
    label_values = sorted(raw_labels.unique(), key=_label_sort_key)
    if len(label_values) != 2:
        raise IngestionError(
            f"Expected exactly two label values, found {len(label_values)}: {label_values}",
            column=label_column
        )

    labels = (raw_labels == label_values[1]).astype(int).to_numpy()
    times = _parse_times(value_columns)

    if np.any(np.diff(times) <= 0):
        raise IngestionError("Sampling times in the header must increase")

    logger.info("Read %d curves with %d samples each", len(frame), len(value_columns))
    return CurveTable(times, values, labels, label_values)


def _label_sort_key(value: str):
    try:
        return (0, float(value), value)
    except ValueError:
        return (1, 0.0, value)


def trim_start(table: CurveTable, count: int) -> CurveTable:
    """
    Drop the first `count` samples of every curve.

    Raises:
        IngestionError: If fewer than three samples would remain
    """
    if count == 0:
        return table
    if table.times.size - count < 3:
        raise IngestionError(
            f"Trimming {count} samples leaves {table.times.size - count}; at least 3 are needed"
        )
    return CurveTable(table.times[count:], table.values[:, count:], table.labels, table.label_values)


def apply_transform(table: CurveTable, transform: str, offset: Optional[float] = None) -> CurveTable:
    """
    'identity' passes values through; 'log-offset' maps x to log(x - offset).

    Raises:
        IngestionError: If offset is not below every value
    """
    if transform == 'identity':
        return table

    if transform != 'log-offset' or offset is None:
        raise IngestionError(f"Unknown transform '{transform}'")

    row, col = np.unravel_index(np.argmin(table.values), table.values.shape)
    smallest = table.values[row, col]
    if offset >= smallest:
        raise IngestionError(
            f"Offset {offset} must be below every value; minimum is {smallest}",
            row=int(row) + 1,
            column=_format_time(table.times[col])
        )

    return CurveTable(table.times, np.log(table.values - offset), table.labels, table.label_values)


def to_labeled_sample(table: CurveTable, prior_p: Optional[float] = None) -> LabeledSample:
    """
    Map the (uniform) sampling times onto the grid on [0, 1].

    Raises:
        IngestionError: If the sampling times are not equally spaced
    """
    steps = np.diff(table.times)
    if np.max(np.abs(steps - steps.mean())) > TIME_TOLERANCE * max(1.0, abs(steps.mean())):
        raise IngestionError("Sampling times must be equally spaced")

    grid = Grid.uniform(table.times.size - 1)
    return LabeledSample(grid, table.values, table.labels, prior_p)


def _format_time(value: float) -> str:
    return repr(float(value))


def write_curve_csv(
    sample: LabeledSample,
    target: Union[str, Path, io.StringIO, None] = None,
    times: Optional[np.ndarray] = None
) -> str:
    """
    Write curves in the CSV format read by read_curve_csv.

    Returns:
        The CSV text (also written to target when given)
    """
    times = sample.grid.points if times is None else np.asarray(times, dtype=float)
    columns = ['label'] + [_format_time(t) for t in times]

    frame = pd.DataFrame(sample.values, columns=columns[1:])
    frame.insert(0, 'label', sample.labels)

    text = frame.to_csv(index=False, lineterminator='\n', float_format=lambda v: repr(float(v)))
    if target is not None:
        if isinstance(target, io.StringIO):
            target.write(text)
        else:
            Path(target).write_text(text, encoding='utf-8')

    return text
