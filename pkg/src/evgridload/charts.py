"""Static SVG charts of hourly profile files."""

from __future__ import annotations

import calendar
from datetime import date
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
# fixed id salt keeps the SVG bytes reproducible
matplotlib.rcParams["svg.hashsalt"] = "evgridload"
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from .core import DataError, UsageError  # noqa: E402


def read_profile_file(path, column: str | None = None) -> pd.Series:
    """Load one load column (kW) indexed by UTC timestamp.

    Defaults to ``load_kw`` for per-class files and ``total`` for combined ones.
    """
    df = pd.read_csv(path)
    if "timestamp_utc" not in df.columns:
        raise DataError(f"{path}: missing timestamp_utc column")
    if column is None:
        column = "load_kw" if "load_kw" in df.columns else "total"
    if column not in df.columns:
        raise DataError(f"{path}: no column {column!r}")
    index = pd.to_datetime(df["timestamp_utc"], utc=True)
    return pd.Series(df[column].astype(float).to_numpy(), index=index, name=column)


def month_average_days(series: pd.Series) -> pd.DataFrame:
    """Mean 24-hour day for each month present (rows: hour 0-23, columns: month)."""
    frame = pd.DataFrame({"kw": series.to_numpy(), "month": series.index.month, "hour": series.index.hour})
    return frame.pivot_table(index="hour", columns="month", values="kw", aggfunc="mean")


def _finish(ax, peak: float, ylabel: str):
    ax.set_xlabel("hour (UTC)")
    ax.set_ylabel(ylabel)
    ax.set_xlim(0, 23)
    ax.set_xticks(range(0, 24, 3))
    if peak > 0:
        ax.set_ylim(0, peak)
    ax.grid(alpha=0.3)


def plot_month_averages(series: pd.Series, title: str = ""):
    days = month_average_days(series)
    fig, ax = plt.subplots(figsize=(7, 4))
    cmap = plt.get_cmap("twilight", 13)
    for month in days.columns:
        ax.plot(days.index, days[month].to_numpy(), color=cmap(month), label=calendar.month_abbr[month])
    _finish(ax, float(np.nanmax(days.to_numpy())) if days.size else 0.0, "average load (kW)")
    ax.legend(ncol=4, fontsize=7, loc="upper left")
    ax.set_title(title)
    return fig


def plot_single_day(series: pd.Series, day: date, title: str = ""):
    values = series[series.index.date == day]
    if values.empty:
        raise UsageError(f"{day.isoformat()} is not covered by the profile")
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(values.index.hour, values.to_numpy(), drawstyle="steps-post")
    _finish(ax, float(values.max()), "load (kW)")
    ax.set_title(title or day.isoformat())
    return fig


def chart(profile_file, out_file, single_day: str | None = None, column: str | None = None) -> Path:
    """Render the month-average chart, or a single day if ``single_day`` is set."""
    series = read_profile_file(profile_file, column)
    title = Path(profile_file).stem
    if single_day is not None:
        try:
            day = date.fromisoformat(single_day)
        except ValueError:
            raise UsageError(f"bad date {single_day!r}; expected YYYY-MM-DD") from None
        fig = plot_single_day(series, day, title)
    else:
        fig = plot_month_averages(series, title)
    out_file = Path(out_file)
    fig.savefig(out_file, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return out_file
