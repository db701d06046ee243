"""
Training curves of one run.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

from src.schemas import MetricsReport


def training_frame(report: MetricsReport) -> pd.DataFrame:
    """One row per epoch, indexed by epoch number."""
    if not report.epochs:
        raise ValueError("report has no epochs to plot")
    return pd.DataFrame([record.model_dump() for record in report.epochs]).set_index("epoch")


def plot_training_curves(report: MetricsReport, path: str | Path) -> Path:
    frame = training_frame(report)

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 8), sharex=True)
    fig.suptitle(f"{report.config.variant} model", fontsize=12)

    ax1.plot(frame.index, frame["train_loss"], label="total", marker="o")
    ax1.plot(frame.index, frame["rating_loss"], label="rating")
    ax1.plot(frame.index, frame["trace_loss"], label="trace")
    ax1.set_ylabel("loss")
    ax1.legend()
    ax1.grid(True)

    ax2.plot(frame.index, frame["validation_mae"], label="validation MAE", color="green", marker="o")
    if report.best_epoch:
        ax2.axvline(report.best_epoch, color="grey", linestyle="--", label=f"best epoch {report.best_epoch}")
    ax2.set_xlabel("epoch")
    ax2.set_ylabel("MAE")
    ax2.legend()
    ax2.grid(True)

    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)
