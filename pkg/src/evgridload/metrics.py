"""Grid-impact metrics of transportation load against BA system load.

Total load is transportation plus non-transportation ("system") load:

* ``m1`` - transportation share of annual energy
* ``m2`` - transportation share of load at the hour of peak total load
* ``m3`` - transportation share of load at the transportation peak hour

Ties in peak hours resolve to the earliest hour.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
import pandas as pd

from .core import DataError, DomainError, GeoId, HourlyProfile, ScenarioKey, ShapeError, hours_in_year
from .downscale import read_table

log = logging.getLogger(__name__)

METRICS_COLUMNS = (
    "ba_code", "year", "pathway", "climate", "m1", "m2", "m3",
    "trans_peak_gw", "trans_peak_hour_utc", "system_peak_hour_utc",
)


def _values(p) -> np.ndarray:
    return np.asarray(p.values if isinstance(p, HourlyProfile) else p, dtype=np.float64)


def _pair(transportation, system) -> tuple[np.ndarray, np.ndarray]:
    t, s = _values(transportation), _values(system)
    if t.shape != s.shape or t.ndim != 1:
        raise ShapeError(f"profile lengths differ: {t.shape} vs {s.shape}")
    if t.size == 0:
        raise ShapeError("empty profiles")
    return t, s


def m1(transportation, system) -> float:
    t, s = _pair(transportation, system)
    # correctly rounded sums: the result does not depend on summation order
    e_trans = math.fsum(t)
    e_total = math.fsum(np.concatenate([t, s]))
    if e_total <= 0:
        raise DomainError("total energy is zero")
    return e_trans / e_total


def _share_at(t, s, hour) -> float:
    total = t[hour] + s[hour]
    if total <= 0:
        raise DomainError(f"total load is zero at hour {hour}")
    return float(t[hour] / total)


def m2(transportation, system) -> float:
    t, s = _pair(transportation, system)
    return _share_at(t, s, int(np.argmax(t + s)))


def m3(transportation, system) -> float:
    t, s = _pair(transportation, system)
    return _share_at(t, s, int(np.argmax(t)))


@dataclass(frozen=True)
class BaLoadPair:
    ba: GeoId
    transportation: HourlyProfile
    system: HourlyProfile
    scenario: ScenarioKey | None = None

    def __post_init__(self):
        if len(self.transportation) != len(self.system) or self.transportation.start != self.system.start:
            raise ShapeError(f"{self.ba}: transportation and system profiles are not aligned")


@dataclass(frozen=True)
class MetricsRow:
    ba: str
    m1: float
    m2: float
    m3: float
    trans_peak_kw: float
    trans_peak_hour: int
    system_peak_hour: int
    scenario: ScenarioKey | None = None

    @property
    def peaks_coincide(self) -> bool:
        return self.trans_peak_hour == self.system_peak_hour


def metrics_row(pair: BaLoadPair) -> MetricsRow:
    t, s = _pair(pair.transportation, pair.system)
    if np.any(s < 0):
        log.warning("%s: negative system load; metrics may fall outside [0, 1]", pair.ba)
    row = MetricsRow(
        ba=str(pair.ba),
        m1=m1(t, s),
        m2=m2(t, s),
        m3=m3(t, s),
        trans_peak_kw=float(t.max()),
        trans_peak_hour=int(np.argmax(t)),
        system_peak_hour=int(np.argmax(t + s)),
        scenario=pair.scenario,
    )
    if row.peaks_coincide:
        log.info("%s: transportation and system peaks coincide at hour %d", pair.ba, row.trans_peak_hour)
    return row


def read_system_load(path, year: int) -> dict[str, HourlyProfile]:
    """Hourly BA loads (``ba_code, timestamp_utc, load_mw``) for one year, in kW."""
    df = read_table(path, ["ba_code", "timestamp_utc", "load_mw"], dtype={"ba_code": str})
    try:
        df["timestamp_utc"] = pd.to_datetime(df["timestamp_utc"], utc=True)
        df["load_mw"] = df["load_mw"].astype(float)
    except (ValueError, TypeError) as exc:
        raise DataError(f"{path}: {exc}") from None
    df = df[df["timestamp_utc"].dt.year == year]
    index = pd.date_range(f"{year}-01-01", periods=hours_in_year(year), freq="h", tz="UTC")
    out = {}
    for ba, group in df.groupby("ba_code"):
        series = group.set_index("timestamp_utc")["load_mw"]
        if series.index.duplicated().any():
            raise DataError(f"{path}: duplicate hours for BA {ba}")
        series = series.reindex(index)
        if series.isna().any():
            first = series.index[series.isna()][0]
            raise DataError(f"{path}: BA {ba} has no load for {first.isoformat()}")
        out[str(ba)] = HourlyProfile.for_year(GeoId.ba(str(ba)), None, year, series.to_numpy() * 1000.0)
    if not out:
        raise DataError(f"{path}: no system load rows for {year}")
    return out


def write_metrics(rows, path, year_start) -> None:
    """Write metrics rows; hour indices become UTC timestamps from ``year_start``."""
    base = pd.Timestamp(year_start)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_COLUMNS)
        for r in rows:
            sc = r.scenario
            writer.writerow([
                r.ba,
                sc.year if sc else "",
                sc.pathway.value if sc else "",
                sc.climate.value if sc else "",
                f"{r.m1:.9f}", f"{r.m2:.9f}", f"{r.m3:.9f}",
                f"{r.trans_peak_kw / 1e6:.9f}",
                (base + pd.Timedelta(hours=r.trans_peak_hour)).strftime("%Y-%m-%dT%H:%M:%SZ"),
                (base + pd.Timedelta(hours=r.system_peak_hour)).strftime("%Y-%m-%dT%H:%M:%SZ"),
            ])


@dataclass
class PathwayResult:
    """Transportation profiles (and optional metrics) for one pathway."""

    label: str
    profiles: Mapping[str, HourlyProfile]
    rows: Mapping[str, MetricsRow] | None = None


@dataclass(frozen=True)
class ComparisonLine:
    ba: str
    peak_ratio: float
    variation_ratio: float
    m1_difference: float | None


@dataclass
class ComparisonReport:
    a_label: str
    b_label: str
    lines: list[ComparisonLine]
    aggregate: ComparisonLine

    def format(self) -> str:
        out = [f"comparison {self.b_label} vs {self.a_label}",
               "ba_code,peak_ratio,variation_ratio,m1_difference"]
        for line in self.lines + [self.aggregate]:
            m1d = "" if line.m1_difference is None else f"{line.m1_difference:.6f}"
            out.append(f"{line.ba},{line.peak_ratio:.6f},{line.variation_ratio:.6f},{m1d}")
        return "\n".join(out) + "\n"


def _ratio(b: float, a: float) -> float:
    if a == 0:
        return 1.0 if b == 0 else float("inf")
    return b / a


def _line(ba, pa: np.ndarray, pb: np.ndarray, m1d) -> ComparisonLine:
    return ComparisonLine(
        ba,
        _ratio(float(pb.max()), float(pa.max())),
        _ratio(float(np.ptp(pb)), float(np.ptp(pa))),
        m1d,
    )


def compare_pathways(a: PathwayResult, b: PathwayResult) -> ComparisonReport:
    """Per-BA and interconnection-wide ratios of ``b`` to ``a``."""
    if set(a.profiles) != set(b.profiles):
        raise DataError("pathway results cover different BAs")
    lines = []
    for ba in sorted(a.profiles):
        pa, pb = _values(a.profiles[ba]), _values(b.profiles[ba])
        if pa.shape != pb.shape:
            raise ShapeError(f"{ba}: profiles of different length")
        m1d = None
        if a.rows is not None and b.rows is not None and ba in a.rows and ba in b.rows:
            m1d = b.rows[ba].m1 - a.rows[ba].m1
        lines.append(_line(ba, pa, pb, m1d))
    total_a = np.sum([_values(a.profiles[ba]) for ba in sorted(a.profiles)], axis=0)
    total_b = np.sum([_values(b.profiles[ba]) for ba in sorted(b.profiles)], axis=0)
    return ComparisonReport(a.label, b.label, lines, _line("ALL", total_a, total_b, None))
