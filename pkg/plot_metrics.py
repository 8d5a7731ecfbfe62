#!/usr/bin/env python3

"""Plot metrics CSVs of one or more runs against iteration."""

import argparse
import os
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from src.experiment.metrics_csv import read_metrics_csv  # noqa: E402
from src.utils.metrics import METRIC_COLUMNS, MetricsReport  # noqa: E402

YLABELS = {
    "acc_test": "Accuracy on test data",
    "acc_noisy": "Accuracy on noisy test data",
    "acc_adv": "Accuracy on adversarial examples",
    "sigmoid_rate": "Sigmoid rate (noise / data)",
    "softmax_rate": "Softmax rate (noise / data)",
}


def load_runs(paths: List[str]) -> Dict[str, List[MetricsReport]]:
    """
    Read every CSV, labelled by its run directory name.

    Args:
        paths: Metrics CSV files

    Returns:
        Mapping of run label to its evaluation series
    """
    runs = {}
    for path in paths:
        label = os.path.basename(os.path.dirname(os.path.abspath(path))) or path
        runs[label] = read_metrics_csv(path)
    return runs


def plot_results(runs: Dict[str, List[MetricsReport]], output_dir: str) -> None:
    """Save one figure per metric column with a line per run."""
    os.makedirs(output_dir, exist_ok=True)
    for column in METRIC_COLUMNS[1:]:
        plt.figure(figsize=(10, 6))
        for label, series in runs.items():
            rows = [report.to_dict() for report in series]
            plt.plot(
                [row["iteration"] for row in rows], [row[column] for row in rows], "-o", label=label
            )
        plt.xlabel("Iteration")
        plt.ylabel(YLABELS[column])
        plt.title(YLABELS[column])
        plt.legend()
        plt.grid(True)
        plt.savefig(os.path.join(output_dir, f"{column}.png"))
        plt.close()


def main() -> None:
    parser = argparse.ArgumentParser(description="Plot metrics CSVs written by main.py train")
    parser.add_argument("csv", nargs="+", help="metrics.csv files")
    parser.add_argument("--output", default="output", help="directory for the figures")
    args = parser.parse_args()

    runs = load_runs(args.csv)
    for label, series in runs.items():
        best = max(series, key=lambda report: report.acc_test)
        print(
            f"{label}: best acc_test {best.acc_test:.4f} at iteration {best.iteration}, "
            f"acc_adv {best.acc_adv:.4f}"
        )
    plot_results(runs, args.output)
    print(f"Figures saved to {args.output}/")


if __name__ == "__main__":
    main()
