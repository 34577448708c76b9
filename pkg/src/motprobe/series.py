"""Sampled signals and their CSV form.

A CSV file has two header lines, column names then units, followed by one
``x,value`` row per sample. Floats are written with ``repr`` so a file
re-parses to exactly the same values.
"""
from dataclasses import dataclass, field
import csv
import io
import math

import numpy as np

from .errors import OutputError, ValidationError


@dataclass
class TimeSeries:
    x_name: str
    x_unit: str
    value_name: str
    value_unit: str
    xs: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.xs.shape != self.values.shape or self.xs.ndim != 1:
            raise ValidationError("xs and values must be 1-D and the same length")
        if np.any(np.diff(self.xs) <= 0):
            raise ValidationError("xs must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("values must be finite")

    def __len__(self):
        return self.xs.size

    def to_csv_text(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([self.x_name, self.value_name])
        writer.writerow([self.x_unit, self.value_unit])
        for x, v in zip(self.xs.tolist(), self.values.tolist()):
            writer.writerow([repr(x), repr(v)])
        return buf.getvalue()

    def write_csv(self, path):
        try:
            with open(path, "w", newline="") as fh:
                fh.write(self.to_csv_text())
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc}") from exc

    def write_plot_file(self, path):
        """Headerless whitespace-separated two-column file for plotting tools."""
        try:
            with open(path, "w") as fh:
                for x, v in zip(self.xs.tolist(), self.values.tolist()):
                    fh.write(f"{x!r} {v!r}\n")
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc}") from exc


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) < 2 or len(rows[0]) != 2 or len(rows[1]) != 2:
        raise ValidationError("CSV needs a names line and a units line with two columns")
    try:
        data = [(float(a), float(b)) for a, b in rows[2:] if (a, b) != ("", "")]
    except ValueError as exc:
        raise ValidationError(f"malformed CSV row: {exc}") from exc
    if any(not math.isfinite(x) for pair in data for x in pair):
        raise ValidationError("CSV contains non-finite values")
    xs = [d[0] for d in data]
    values = [d[1] for d in data]
    (x_name, value_name), (x_unit, value_unit) = rows[0], rows[1]
    return TimeSeries(x_name, x_unit, value_name, value_unit, xs, values)


def read_csv(path):
    try:
        with open(path, newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc
    return parse_csv(text)
