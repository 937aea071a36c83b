"""Shared domain types, unit conversions and profile arithmetic."""

from __future__ import annotations

import calendar
import re
import zlib
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Sequence

import numpy as np


class EvLoadError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(EvLoadError):
    pass


class ShapeError(EvLoadError):
    pass


class DataError(EvLoadError):
    pass


class FormatError(DataError):
    pass


class DomainError(EvLoadError, ValueError):
    pass


class UsageError(EvLoadError):
    pass


class VehicleClass(str, Enum):
    LDV = "LDV"
    MDV = "MDV"
    HDV = "HDV"
    RAIL = "Rail"
    AVIATION = "Aviation"
    SHIP = "Ship"

    @classmethod
    def parse(cls, value: "str | VehicleClass") -> "VehicleClass":
        if isinstance(value, cls):
            return value
        for member in cls:
            if member.value.lower() == str(value).strip().lower():
                return member
        raise ConfigurationError(f"unknown vehicle class {value!r}")


MHDV_CLASSES = (VehicleClass.MDV, VehicleClass.HDV)
NONROAD_CLASSES = (VehicleClass.RAIL, VehicleClass.AVIATION, VehicleClass.SHIP)


class GeoLevel(str, Enum):
    STATE = "State"
    COUNTY = "County"
    BA = "BA"
    INTERCONNECTION = "Interconnection"


_GEO_PATTERNS = {
    GeoLevel.STATE: re.compile(r"^[A-Z]{2}$"),
    GeoLevel.COUNTY: re.compile(r"^\d{5}$"),
    GeoLevel.BA: re.compile(r"^[A-Z0-9_\-]+$"),
    GeoLevel.INTERCONNECTION: re.compile(r"^\S+$"),
}


@dataclass(frozen=True, order=True)
class GeoId:
    level: GeoLevel
    code: str

    def __post_init__(self):
        object.__setattr__(self, "level", GeoLevel(self.level))
        if not self.code:
            raise ConfigurationError("geography code must be non-empty")
        if not _GEO_PATTERNS[self.level].match(self.code):
            raise ConfigurationError(f"{self.code!r} is not a valid {self.level.value} code")

    @classmethod
    def county(cls, fips) -> "GeoId":
        return cls(GeoLevel.COUNTY, f"{int(fips):05d}")

    @classmethod
    def ba(cls, code: str) -> "GeoId":
        return cls(GeoLevel.BA, str(code))

    @classmethod
    def state(cls, code: str) -> "GeoId":
        return cls(GeoLevel.STATE, str(code).upper())

    def __str__(self):
        return self.code


WESTERN_INTERCONNECTION = GeoId(GeoLevel.INTERCONNECTION, "WECC")


class Pathway(str, Enum):
    BAU = "BAU"
    NZ = "NZ"


class Climate(str, Enum):
    RCP45_COOLER = "rcp45cooler"
    RCP45_HOTTER = "rcp45hotter"
    RCP85_COOLER = "rcp85cooler"
    RCP85_HOTTER = "rcp85hotter"


SCENARIO_YEARS = tuple(range(2020, 2051, 5))


@dataclass(frozen=True, order=True)
class ScenarioKey:
    year: int
    pathway: Pathway
    climate: Climate

    def __post_init__(self):
        if self.year not in SCENARIO_YEARS:
            raise ConfigurationError(f"year {self.year} is not on the 5-year grid 2020..2050")
        try:
            object.__setattr__(self, "pathway", Pathway(self.pathway))
            object.__setattr__(self, "climate", Climate(self.climate))
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None

    @classmethod
    def parse(cls, text: str) -> "ScenarioKey":
        """Parse ``YEAR:PATHWAY:CLIMATE``, e.g. ``2035:NZ:rcp45cooler``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"scenario {text!r} is not of the form YEAR:PATHWAY:CLIMATE")
        year, pathway, climate = parts
        try:
            year = int(year)
        except ValueError:
            raise UsageError(f"scenario year {year!r} is not an integer") from None
        try:
            return cls(year, pathway, climate)
        except ConfigurationError as exc:
            raise UsageError(str(exc)) from None

    @property
    def slug(self) -> str:
        return f"{self.year}_{self.pathway.value}_{self.climate.value}"

    def __str__(self):
        return f"{self.year}:{self.pathway.value}:{self.climate.value}"


def hours_in_year(year: int) -> int:
    return 8784 if calendar.isleap(year) else 8760


# joules per unit
_JOULES = {
    "EJ": 1e18,
    "PJ": 1e15,
    "GWh": 3.6e12,
    "MWh": 3.6e9,
    "kWh": 3.6e6,
    "MJ": 1e6,
}
ENERGY_UNITS = tuple(_JOULES)


def _check_unit(unit: str) -> str:
    if unit not in _JOULES:
        raise ConfigurationError(f"unsupported energy unit {unit!r}; expected one of {ENERGY_UNITS}")
    return unit


@dataclass(frozen=True)
class EnergyQuantity:
    magnitude: float
    unit: str = "kWh"

    def __post_init__(self):
        _check_unit(self.unit)
        if not np.isfinite(self.magnitude) or self.magnitude < 0:
            raise DomainError(f"energy must be finite and nonnegative, got {self.magnitude}")

    def to(self, unit: str) -> "EnergyQuantity":
        return convert_energy(self, unit)

    @property
    def kwh(self) -> float:
        return convert_energy(self, "kWh").magnitude


def convert_energy(q: EnergyQuantity, target_unit: str) -> EnergyQuantity:
    _check_unit(target_unit)
    if q.unit == target_unit:
        return q
    return EnergyQuantity(q.magnitude * _JOULES[q.unit] / _JOULES[target_unit], target_unit)


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HourlyProfile:
    """Average power in kW for consecutive hours starting at ``start`` (UTC).

    Holds either a single average day (24 values) or a whole calendar year.
    ``vclass`` is None for profiles summed over vehicle classes.
    """

    geo: GeoId
    vclass: VehicleClass | None
    start: datetime
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        start = self.start
        if start.tzinfo is None:
            start = start.replace(tzinfo=timezone.utc)
        object.__setattr__(self, "start", start.astimezone(timezone.utc))
        values = _frozen_array(self.values)
        object.__setattr__(self, "values", values)
        if values.ndim != 1:
            raise ShapeError("profile values must be one-dimensional")
        n = values.size
        if n != 24 and n != hours_in_year(self.start.year):
            raise ShapeError(
                f"profile length {n} is neither 24 nor the {hours_in_year(self.start.year)} hours of {self.start.year}"
            )
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ShapeError("profile values must be finite and nonnegative")

    @classmethod
    def for_year(cls, geo, vclass, year: int, values) -> "HourlyProfile":
        return cls(geo, vclass, datetime(year, 1, 1, tzinfo=timezone.utc), values)

    def __len__(self):
        return self.values.size

    @property
    def energy_kwh(self) -> float:
        # one-hour steps, so kW sums to kWh
        return float(np.sum(self.values))

    def timestamps(self):
        import pandas as pd

        return pd.date_range(self.start, periods=len(self), freq="h")

    def replace(self, **changes) -> "HourlyProfile":
        kwargs = dict(geo=self.geo, vclass=self.vclass, start=self.start, values=self.values)
        kwargs.update(changes)
        return HourlyProfile(**kwargs)


@dataclass(frozen=True)
class NormalizedShape:
    """Nonnegative hourly weights over one year that sum to one."""

    values: np.ndarray = field(repr=False)
    year: int | None = None

    def __post_init__(self):
        values = _frozen_array(self.values)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size == 0:
            raise ShapeError("shape must be a non-empty 1-D sequence")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ShapeError("shape weights must be finite and nonnegative")
        total = float(np.sum(values))
        if abs(total - 1.0) > 1e-9:
            raise ShapeError(f"shape weights sum to {total!r}, not 1")
        if self.year is not None and values.size != hours_in_year(self.year):
            raise ShapeError(f"shape has {values.size} hours but {self.year} has {hours_in_year(self.year)}")

    def __len__(self):
        return self.values.size


def combine_profiles(profiles: Sequence[HourlyProfile], weights: Sequence[float],
                     geo: GeoId | None = None, vclass: VehicleClass | None = None) -> HourlyProfile:
    """Weighted elementwise sum of profiles sharing length and start time.

    The result keeps the first profile's geography and class unless overridden.
    """
    if len(profiles) == 0:
        raise ShapeError("no profiles to combine")
    if len(weights) != len(profiles):
        raise ShapeError(f"{len(profiles)} profiles but {len(weights)} weights")
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise DomainError("weights must be finite and nonnegative")
    first = profiles[0]
    for p in profiles[1:]:
        if len(p) != len(first) or p.start != first.start:
            raise ShapeError("profiles differ in length or start time")
    stacked = np.stack([p.values for p in profiles])
    return HourlyProfile(
        geo if geo is not None else first.geo,
        vclass if vclass is not None else first.vclass,
        first.start,
        w @ stacked,
    )


@dataclass(frozen=True)
class PeakStats:
    peak_kw: float
    peak_hour_index: int
    variation_kw: float


def peak_stats(p: HourlyProfile | Sequence[float]) -> PeakStats:
    values = np.asarray(p.values if isinstance(p, HourlyProfile) else p, dtype=np.float64)
    if values.size == 0:
        raise ShapeError("empty profile")
    idx = int(np.argmax(values))  # argmax returns the first maximizer
    return PeakStats(float(values[idx]), idx, float(values.max() - values.min()))


def rng_for(seed: int, *keys: int | str) -> np.random.Generator:
    """Independent generator for one unit of work.

    Streams are keyed by ``(seed, *keys)`` rather than drawn sequentially, so
    results do not depend on evaluation order or thread count.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for key in keys:
        if isinstance(key, str):
            entropy.append(zlib.crc32(key.encode("utf-8")))
        else:
            entropy.append(int(key) & 0xFFFFFFFFFFFFFFFF)
    return np.random.default_rng(np.random.SeedSequence(entropy))
