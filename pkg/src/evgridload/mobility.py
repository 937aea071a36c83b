"""Depot mobility ingestion, return-to-base filtering and synthetic fleets.

Input rows follow the Fleet DNA layout (``vid``, ``start_ts``, ``end_ts``,
``distance_total``). Timestamps are depot-local clock time and are used
without any timezone arithmetic.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, replace
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .core import ConfigurationError, FormatError, rng_for

REQUIRED_COLUMNS = ("vid", "start_ts", "end_ts", "distance_total")

VOCATIONS = (
    "delivery_van",
    "delivery_truck",
    "school_bus",
    "transit_bus",
    "bucket_truck",
    "tractor",
    "refuse_truck",
)

# Return-to-base screening thresholds.
MAX_TRIPS_PER_DAY = 4
MAX_TRIP_HOURS = 18.0
MAX_DAILY_MILES = 600.0


@dataclass(frozen=True)
class MobilityRecord:
    vid: str
    start_ts: datetime
    end_ts: datetime
    distance_total: float

    def __post_init__(self):
        if not self.end_ts > self.start_ts:
            raise ValueError("end_ts must be after start_ts")
        if not np.isfinite(self.distance_total) or self.distance_total < 0:
            raise ValueError("distance_total must be a nonnegative number")

    @property
    def day(self) -> date:
        return self.start_ts.date()


@dataclass(frozen=True)
class Reject:
    row: dict
    reason: str


@dataclass(frozen=True)
class Trip:
    depart: float  # hours after local midnight
    arrive: float
    miles: float


@dataclass(frozen=True)
class VehicleDaySchedule:
    """One vehicle's trips for one day, as fractional hours of the day.

    Dwell windows fill the time between trips; the last dwell runs from the
    final arrival to the first departure of the next day (same pattern).
    """

    vid: str
    day: date
    trips: tuple[Trip, ...]
    vocation: str | None = None

    def __post_init__(self):
        trips = tuple(self.trips)
        object.__setattr__(self, "trips", trips)
        if not trips:
            raise ValueError("a schedule needs at least one trip")
        prev_arrive = 0.0
        for trip in trips:
            if trip.depart < prev_arrive or trip.arrive <= trip.depart:
                raise ValueError(f"trips for {self.vid} on {self.day} overlap or are out of order")
            if trip.miles < 0:
                raise ValueError("trip miles must be nonnegative")
            prev_arrive = trip.arrive
        if trips[-1].arrive > 24.0:
            raise ValueError(f"{self.vid} returns after midnight on {self.day}")

    @property
    def total_miles(self) -> float:
        return float(sum(t.miles for t in self.trips))

    def dwell_windows(self) -> list[tuple[float, float]]:
        """Dwell windows in hours; the last one ends after 24."""
        trips = self.trips
        windows = [(trips[i].arrive, trips[i + 1].depart) for i in range(len(trips) - 1)]
        windows.append((trips[-1].arrive, trips[0].depart + 24.0))
        return windows


@dataclass
class MobilityParseResult:
    records: list[MobilityRecord]
    rejects: list[Reject]
    n_rows: int

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


def parse_mobility_file(path) -> MobilityParseResult:
    """Read a mobility CSV; bad rows are collected in ``rejects``, not raised."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        lookup = {name.strip().lower(): name for name in header}
        for col in REQUIRED_COLUMNS:
            if col not in lookup:
                raise FormatError(f"{path}: missing required column {col!r}")
        records, rejects = [], []
        n_rows = 0
        for row in reader:
            n_rows += 1
            clean = {col: (row.get(lookup[col]) or "").strip() for col in REQUIRED_COLUMNS}
            try:
                rec = MobilityRecord(
                    vid=clean["vid"],
                    start_ts=datetime.fromisoformat(clean["start_ts"]),
                    end_ts=datetime.fromisoformat(clean["end_ts"]),
                    distance_total=float(clean["distance_total"]),
                )
                if not rec.vid:
                    raise ValueError("empty vid")
            except (ValueError, TypeError) as exc:
                rejects.append(Reject(clean, str(exc)))
                continue
            records.append(rec)
    return MobilityParseResult(records, rejects, n_rows)


def write_rejects(rejects: Iterable[Reject], path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(REQUIRED_COLUMNS) + ["reason"])
        for rej in rejects:
            writer.writerow([rej.row.get(c, "") for c in REQUIRED_COLUMNS] + [rej.reason])


def _record_row(rec: MobilityRecord) -> dict:
    return {
        "vid": rec.vid,
        "start_ts": rec.start_ts.isoformat(),
        "end_ts": rec.end_ts.isoformat(),
        "distance_total": repr(rec.distance_total),
    }


def _group_vehicle_days(records: Iterable[MobilityRecord]) -> dict:
    groups = defaultdict(list)
    for rec in records:
        groups[(rec.vid, rec.day)].append(rec)
    return groups


def filter_return_to_base(
    records: Iterable[MobilityRecord],
    max_trips: int = MAX_TRIPS_PER_DAY,
    max_trip_hours: float = MAX_TRIP_HOURS,
    max_daily_miles: float = MAX_DAILY_MILES,
    rejects: list | None = None,
) -> list[MobilityRecord]:
    """Keep only vehicle-days that look like depot return-to-base operation.

    A vehicle-day is dropped whole if any trip ends after midnight, or if it
    exceeds the trip-count, trip-length or daily-mileage thresholds.
    """
    records = list(records)
    groups = _group_vehicle_days(records)
    dropped = {}
    for key, recs in groups.items():
        midnight = datetime.combine(key[1], datetime.min.time()) + timedelta(days=1)
        if any(r.end_ts > midnight for r in recs):
            dropped[key] = "returns after midnight"
        elif len(recs) > max_trips:
            dropped[key] = f"more than {max_trips} trips"
        elif any((r.end_ts - r.start_ts) > timedelta(hours=max_trip_hours) for r in recs):
            dropped[key] = f"trip longer than {max_trip_hours:g} h"
        elif sum(r.distance_total for r in recs) > max_daily_miles:
            dropped[key] = f"more than {max_daily_miles:g} miles"
    kept = []
    for rec in records:
        key = (rec.vid, rec.day)
        if key in dropped:
            if rejects is not None:
                rejects.append(Reject(_record_row(rec), dropped[key]))
        else:
            kept.append(rec)
    return kept


def _hour_of_day(ts: datetime, day: date) -> float:
    delta = ts - datetime.combine(day, datetime.min.time())
    return delta.total_seconds() / 3600.0


def build_day_schedules(records: Iterable[MobilityRecord], rejects: list | None = None) -> list[VehicleDaySchedule]:
    """Group filtered records into per-vehicle daily schedules.

    Vehicle-days with overlapping trips (or trips ending after midnight) go
    to ``rejects``. Output is sorted by (vid, day).
    """
    schedules = []
    for (vid, day), recs in sorted(_group_vehicle_days(records).items()):
        recs = sorted(recs, key=lambda r: (r.start_ts, r.end_ts))
        trips = [Trip(_hour_of_day(r.start_ts, day), _hour_of_day(r.end_ts, day), r.distance_total) for r in recs]
        reason = None
        if trips[-1].arrive > 24.0:
            reason = "returns after midnight"
        elif any(trips[i + 1].depart < trips[i].arrive for i in range(len(trips) - 1)):
            reason = "overlapping trips"
        if reason is not None:
            if rejects is not None:
                rejects.extend(Reject(_record_row(r), reason) for r in recs)
            continue
        schedules.append(VehicleDaySchedule(vid, day, tuple(trips)))
    return schedules


@dataclass(frozen=True)
class BoundedNormal:
    mean: float
    std: float
    low: float
    high: float

    def __post_init__(self):
        if self.low > self.high:
            raise ConfigurationError(f"bounded normal has min {self.low} > max {self.high}")
        if self.std < 0:
            raise ConfigurationError("standard deviation must be nonnegative")
        if not self.low <= self.mean <= self.high:
            raise ConfigurationError(f"mean {self.mean} outside [{self.low}, {self.high}]")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Truncated-normal draws by inverse CDF."""
        if self.std == 0 or self.low == self.high:
            return np.full(size, float(self.mean))
        a = ndtr((self.low - self.mean) / self.std)
        b = ndtr((self.high - self.mean) / self.std)
        u = a + (b - a) * rng.random(size)
        return np.clip(self.mean + self.std * ndtri(u), self.low, self.high)


# Assumed operating patterns; every value is overridable.
VOCATION_DEFAULTS = {
    "delivery_van": dict(
        miles=BoundedNormal(60, 20, 10, 150),
        depart=BoundedNormal(8.0, 1.0, 5.0, 11.0),
        arrive=BoundedNormal(17.5, 1.5, 13.0, 23.5),
    ),
    "delivery_truck": dict(
        miles=BoundedNormal(80, 25, 10, 200),
        depart=BoundedNormal(7.0, 1.0, 4.0, 10.0),
        arrive=BoundedNormal(16.5, 1.5, 12.0, 23.0),
    ),
    "school_bus": dict(
        miles=BoundedNormal(70, 20, 20, 140),
        depart=BoundedNormal(6.5, 0.5, 5.0, 8.0),
        arrive=BoundedNormal(16.5, 0.75, 14.5, 19.0),
        break_start=BoundedNormal(9.25, 0.5, 8.5, 10.0),
        break_hours=BoundedNormal(3.75, 0.25, 3.5, 4.0),
    ),
    "transit_bus": dict(
        miles=BoundedNormal(150, 40, 40, 300),
        depart=BoundedNormal(5.5, 0.75, 4.0, 8.0),
        arrive=BoundedNormal(21.0, 1.0, 18.0, 23.75),
    ),
    "bucket_truck": dict(
        miles=BoundedNormal(40, 15, 5, 100),
        depart=BoundedNormal(7.5, 0.75, 5.0, 10.0),
        arrive=BoundedNormal(16.0, 1.0, 12.0, 20.0),
    ),
    "tractor": dict(
        miles=BoundedNormal(250, 60, 50, 450),
        depart=BoundedNormal(6.0, 1.5, 2.0, 10.0),
        arrive=BoundedNormal(18.0, 2.0, 12.0, 23.75),
    ),
    "refuse_truck": dict(
        miles=BoundedNormal(60, 15, 20, 120),
        depart=BoundedNormal(5.5, 0.75, 3.5, 8.0),
        arrive=BoundedNormal(14.5, 1.0, 11.0, 18.0),
    ),
}


@dataclass(frozen=True)
class SyntheticFleetConfig:
    seed: int
    vehicle_count: int
    vocation: str
    miles: BoundedNormal
    depart: BoundedNormal
    arrive: BoundedNormal
    break_start: BoundedNormal | None = None
    break_hours: BoundedNormal | None = None

    def __post_init__(self):
        if self.vocation not in VOCATIONS:
            raise ConfigurationError(f"unknown vocation {self.vocation!r}")
        if self.vehicle_count < 0:
            raise ConfigurationError("vehicle_count must be nonnegative")
        if self.miles.low < 0:
            raise ConfigurationError("daily miles must be nonnegative")
        if self.depart.low < 0 or self.arrive.high > 24.0:
            raise ConfigurationError("departures and arrivals must fall within the day")
        if (self.break_start is None) != (self.break_hours is None):
            raise ConfigurationError("break_start and break_hours go together")
        if self.break_start is None:
            if not self.depart.high < self.arrive.low:
                raise ConfigurationError("latest departure must precede earliest arrival")
        else:
            if not (self.depart.high < self.break_start.low
                    and self.break_start.high + self.break_hours.high < self.arrive.low
                    and self.break_hours.low > 0):
                raise ConfigurationError("midday break bounds overlap the trips")

    @classmethod
    def for_vocation(cls, vocation: str, seed: int, vehicle_count: int, **overrides) -> "SyntheticFleetConfig":
        if vocation not in VOCATION_DEFAULTS:
            raise ConfigurationError(f"unknown vocation {vocation!r}")
        params = dict(VOCATION_DEFAULTS[vocation])
        params.update(overrides)
        return cls(seed=seed, vehicle_count=vehicle_count, vocation=vocation, **params)

    def with_seed(self, seed: int) -> "SyntheticFleetConfig":
        return replace(self, seed=seed)


def generate_synthetic_fleet(
    cfg: SyntheticFleetConfig,
    days: int | Sequence[date],
    start: date = date(2020, 1, 1),
) -> list[VehicleDaySchedule]:
    """Draw independent vehicle-days for ``cfg.vehicle_count`` vehicles.

    ``days`` is either a count of consecutive days from ``start`` or an
    explicit list of dates. Each day has its own random stream, so a given
    date produces the same fleet regardless of which other days are asked for.
    """
    if isinstance(days, int):
        days = [start + timedelta(days=i) for i in range(days)]
    n = cfg.vehicle_count
    out = []
    for day in days:
        if n == 0:
            continue
        rng = rng_for(cfg.seed, "synthetic-fleet", cfg.vocation, day.toordinal())
        depart = cfg.depart.sample(rng, n)
        arrive = cfg.arrive.sample(rng, n)
        miles = cfg.miles.sample(rng, n)
        if cfg.break_start is not None:
            b0 = cfg.break_start.sample(rng, n)
            b1 = b0 + cfg.break_hours.sample(rng, n)
        for i in range(n):
            vid = f"{cfg.vocation}-{i:05d}"
            if cfg.break_start is None:
                trips = (Trip(float(depart[i]), float(arrive[i]), float(miles[i])),)
            else:
                first = b0[i] - depart[i]
                second = arrive[i] - b1[i]
                share = first / (first + second)
                trips = (
                    Trip(float(depart[i]), float(b0[i]), float(miles[i] * share)),
                    Trip(float(b1[i]), float(arrive[i]), float(miles[i] * (1.0 - share))),
                )
            out.append(VehicleDaySchedule(vid, day, trips, cfg.vocation))
    return out
