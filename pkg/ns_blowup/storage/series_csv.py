"""CSV tables with full-precision decimal floats."""

import csv
import io

import numpy as np

from ns_blowup.config import CSV_FLOAT_FORMAT
from ns_blowup.utils import format_float


def _cell(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return format_float(value, CSV_FLOAT_FORMAT)
    return str(value)


def render_table(header, rows):
    """CSV text with '\\n' line endings; floats in round-trippable form."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def write_table(path, header, rows):
    """Write a CSV table to ``path`` (or to a text stream)."""
    text = render_table(header, rows)
    if hasattr(path, 'write'):
        path.write(text)
        return len(text)
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(text)
    return len(text)


def series_rows(series):
    """Header and rows of a NormSeries: ``t`` followed by its columns."""
    header = ['t', *series.column_names]
    rows = []
    for index, t in enumerate(series.times):
        rows.append([float(t)] + [float(series.columns[name][index]) for name in series.column_names])
    return header, rows


def write_series(path, series):
    header, rows = series_rows(series)
    return write_table(path, header, rows)


def read_series(path):
    """Read a series CSV written by ``write_series``.

    Returns:
        (times, {column: ndarray})
    """
    with open(path, encoding='utf-8', newline='') as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if not header or header[0] != 't':
            raise ValueError(f"{path}: first column must be 't'")
        values = np.array([[float(v) for v in row] for row in reader if row], dtype=np.float64)
    if values.size == 0:
        values = values.reshape(0, len(header))
    return values[:, 0], {name: values[:, i] for i, name in enumerate(header[1:], start=1)}
