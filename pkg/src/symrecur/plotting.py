"""Static figures for CLI outputs (matplotlib, Agg backend)."""
from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import RecurError  # noqa: E402


def _save(fig, path) -> None:
    try:
        fig.savefig(Path(path), dpi=120, bbox_inches="tight")
    except (OSError, ValueError) as exc:
        raise RecurError(f"cannot write plot {path}: {exc}") from exc
    finally:
        plt.close(fig)


def line_plot(path, xs: Sequence[float], series: dict, xlabel: str, ylabel: str, title: str = "",
              hlines: Optional[dict] = None, logy: bool = False) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, ys in series.items():
        ax.plot(xs, ys, marker=".", label=label)
    for label, y in (hlines or {}).items():
        ax.axhline(y, ls="--", lw=1, color="gray")
        ax.annotate(label, (xs[0] if len(xs) else 0, y), fontsize=8, va="bottom")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend()
    _save(fig, path)


def histogram(path, values: Sequence[float], xlabel: str, marker: Optional[float] = None,
              marker_label: str = "", title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(values, bins=min(30, max(5, len(values) // 4)))
    if marker is not None:
        ax.axvline(marker, color="red", ls="--", label=marker_label)
        ax.legend()
    ax.set_xlabel(xlabel)
    ax.set_ylabel("samples")
    if title:
        ax.set_title(title)
    _save(fig, path)


def scatter_fit(path, xs: Sequence[float], ys: Sequence[float], slope: float, intercept: float,
                xlabel: str, ylabel: str, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, ys, "o")
    if len(xs):
        lo, hi = min(xs), max(xs)
        ax.plot([lo, hi], [slope * lo + intercept, slope * hi + intercept], "-", label=f"slope {slope:.3f}")
        ax.legend()
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    _save(fig, path)
