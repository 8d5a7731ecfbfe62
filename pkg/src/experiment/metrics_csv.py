"""Metrics series <-> CSV."""

import csv
import numbers
from typing import List, Sequence

from ..utils.errors import DataError
from ..utils.metrics import METRIC_COLUMNS, MetricsReport


def _format(value) -> str:
    # repr gives the shortest round-tripping decimal with a '.' in every locale.
    return str(int(value)) if isinstance(value, numbers.Integral) else repr(float(value))


def write_metrics_csv(series: Sequence[MetricsReport], path: str) -> None:
    """
    Write one row per evaluation point under the fixed header.

    Raises:
        ValueError: If the series is empty
        OSError: If the path is not writable
    """
    if not series:
        raise ValueError("cannot write an empty metrics series")
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(METRIC_COLUMNS)
        for report in series:
            row = report.to_dict()
            writer.writerow([_format(row[column]) for column in METRIC_COLUMNS])


def read_metrics_csv(path: str) -> List[MetricsReport]:
    """
    Parse a file written by ``write_metrics_csv``.

    Raises:
        DataError: If the header differs or a row is malformed
    """
    with open(path, "r", newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != METRIC_COLUMNS:
            raise DataError(f"{path}: unexpected header {header}")
        series = []
        for line, row in enumerate(reader, start=2):
            if len(row) != len(METRIC_COLUMNS):
                raise DataError(f"{path}:{line}: expected {len(METRIC_COLUMNS)} fields")
            try:
                series.append(
                    MetricsReport(
                        iteration=int(row[0]),
                        acc_test=float(row[1]),
                        acc_noisy=float(row[2]),
                        acc_adv=float(row[3]),
                        r_sigmoid=float(row[4]),
                        r_softmax=float(row[5]),
                    )
                )
            except ValueError as e:
                raise DataError(f"{path}:{line}: {e}") from None
    return series
