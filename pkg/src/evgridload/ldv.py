"""County-level light-duty charging profiles from a parametric session model.

Each charging vehicle gets one session per day, at home (overnight) or at
work (daytime), with arrival and departure times drawn from bounded normals.
A session charges either ``min_delay`` (full power on arrival) or
``load_level`` (constant power across the dwell). Daily energy per vehicle
scales with a discrete-temperature factor and a weekend factor. Sessions run
through the depot charging kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Mapping, Sequence

import numpy as np

from .core import ConfigurationError, DataError, DomainError, GeoId, HourlyProfile, VehicleClass, rng_for
from .depotsim import MINUTES_PER_DAY, Strategy, charging_intervals, fold_day, integrate_intervals, minutes_to_hours
from .mobility import BoundedNormal

DEFAULT_TEMPERATURE_SET = (-10.0, 0.0, 10.0, 20.0, 30.0, 40.0)

# extra charging energy relative to a 20 C day
TEMPERATURE_FACTORS = {-10.0: 1.28, 0.0: 1.21, 20.0: 1.00, 40.0: 1.36}

WEEKEND_FACTOR = 0.90


@dataclass(frozen=True)
class SessionModel:
    """Arrival/departure distributions in local hours; departures are next-day for home."""

    home_arrive: BoundedNormal = BoundedNormal(18.0, 2.0, 12.0, 24.0)
    home_depart: BoundedNormal = BoundedNormal(7.0, 1.0, 4.0, 10.0)
    work_arrive: BoundedNormal = BoundedNormal(8.5, 1.0, 5.5, 11.5)
    work_depart: BoundedNormal = BoundedNormal(17.0, 1.0, 14.0, 20.0)

    def __post_init__(self):
        if self.work_arrive.high >= self.work_depart.low:
            raise ConfigurationError("work arrival bounds overlap work departure bounds")
        if self.home_depart.high >= self.home_arrive.low:
            raise ConfigurationError("home departure must fall before the earliest home arrival")


DEFAULT_SESSIONS = SessionModel()


@dataclass(frozen=True)
class LdvFleetSpec:
    county: GeoId
    fleet_size: int
    home_preference: float = 0.60
    home_access: float = 1.00
    home_power_kw: float = 7.2
    work_power_kw: float = 7.2
    base_kwh_per_day: float = 9.6
    weekend_factor: float = WEEKEND_FACTOR
    utc_offset_hours: int = 0
    sessions: SessionModel = field(default=DEFAULT_SESSIONS, repr=False)

    def __post_init__(self):
        if self.fleet_size < 0:
            raise ConfigurationError("fleet_size must be nonnegative")
        for name in ("home_preference", "home_access", "weekend_factor"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigurationError(f"{name} must be in [0, 1]")
        if not (self.home_power_kw > 0 and self.work_power_kw > 0):
            raise ConfigurationError("charger powers must be positive")
        if self.base_kwh_per_day < 0:
            raise ConfigurationError("base_kwh_per_day must be nonnegative")

    @property
    def home_probability(self) -> float:
        # without home access the home-preferring share charges at work
        return self.home_preference * self.home_access


@dataclass(frozen=True)
class TemperatureDay:
    county: GeoId
    day: date
    mean_temp_c: float

    def __post_init__(self):
        if not -60.0 <= self.mean_temp_c <= 60.0:
            raise DomainError(f"implausible daily mean temperature {self.mean_temp_c} C on {self.day}")


@dataclass(frozen=True)
class AdoptionSchedule:
    """Share of home charging using load leveling, linear between anchor years."""

    anchors: Mapping[int, float] = field(default_factory=lambda: {2020: 0.0, 2035: 0.30, 2050: 0.70})

    def __post_init__(self):
        years = sorted(self.anchors)
        if not years:
            raise ConfigurationError("adoption schedule needs at least one anchor")
        shares = [self.anchors[y] for y in years]
        if any(not 0.0 <= s <= 1.0 for s in shares):
            raise ConfigurationError("adoption shares must be in [0, 1]")
        if any(b < a for a, b in zip(shares, shares[1:])):
            raise ConfigurationError("adoption shares must be nondecreasing")

    def __call__(self, year: int) -> float:
        years = sorted(self.anchors)
        return float(np.interp(year, years, [self.anchors[y] for y in years]))


def estimate_fleet_size(annual_energy_pj: float, mj_per_vkm: float, avg_annual_km: float) -> int:
    """Vehicles implied by annual energy, energy intensity and annual distance."""
    if mj_per_vkm <= 0 or avg_annual_km <= 0:
        raise DomainError("energy intensity and annual distance must be positive")
    if annual_energy_pj < 0:
        raise DomainError("annual energy must be nonnegative")
    return int(math.floor(annual_energy_pj * 1e9 / (mj_per_vkm * avg_annual_km) + 0.5))


def map_temperature_discrete(t: float, allowed: Sequence[float] = DEFAULT_TEMPERATURE_SET) -> float:
    """Nearest allowed temperature; ties go to the value closer to 20 C."""
    if not math.isfinite(t):
        raise DomainError("temperature must be finite")
    return float(min(allowed, key=lambda v: (abs(t - v), abs(v - 20.0))))


def temperature_energy_factor(t_discrete: float, allowed: Sequence[float] = DEFAULT_TEMPERATURE_SET) -> float:
    if float(t_discrete) not in {float(v) for v in allowed}:
        raise DomainError(f"{t_discrete} C is not an allowed discrete temperature")
    anchors = sorted(TEMPERATURE_FACTORS)
    if not anchors[0] <= t_discrete <= anchors[-1]:
        raise DomainError(f"no temperature factor for {t_discrete} C")
    if t_discrete in TEMPERATURE_FACTORS:
        return TEMPERATURE_FACTORS[t_discrete]
    return float(np.interp(t_discrete, anchors, [TEMPERATURE_FACTORS[a] for a in anchors]))


def _day_type(day: date) -> str:
    return "weekend" if day.weekday() >= 5 else "weekday"


def synthesize_county_day(
    spec: LdvFleetSpec,
    temp_day: TemperatureDay | float,
    day_type: str,
    load_level_share: float,
    seed: int,
    n_vehicles: int | None = None,
) -> np.ndarray:
    """Average charging load (24 hourly kW values, local time) for one county-day.

    ``n_vehicles`` simulates a smaller sample and scales it up to the fleet.
    Streams are keyed by county, discrete temperature and day type, so days
    with the same conditions give identical profiles.
    """
    if day_type not in ("weekday", "weekend"):
        raise ConfigurationError(f"day_type must be 'weekday' or 'weekend', got {day_type!r}")
    if not 0.0 <= load_level_share <= 1.0:
        raise ConfigurationError("load_level_share must be in [0, 1]")
    temp_c = temp_day.mean_temp_c if isinstance(temp_day, TemperatureDay) else float(temp_day)
    t_disc = map_temperature_discrete(temp_c)
    n = spec.fleet_size if n_vehicles is None else min(n_vehicles, spec.fleet_size)
    if n == 0:
        return np.zeros(24)

    rng = rng_for(seed, "ldv", spec.county.code, int(t_disc), day_type)
    at_home = rng.random(n) < spec.home_probability
    s = spec.sessions
    home_arr = s.home_arrive.sample(rng, n)
    home_dep = s.home_depart.sample(rng, n) + 24.0
    work_arr = s.work_arrive.sample(rng, n)
    work_dep = s.work_depart.sample(rng, n)
    leveling = rng.random(n) < load_level_share

    daily_kwh = spec.base_kwh_per_day * temperature_energy_factor(t_disc)
    if day_type == "weekend":
        daily_kwh *= spec.weekend_factor
    start = np.where(at_home, home_arr, work_arr) * 60.0
    end = np.where(at_home, home_dep, work_dep) * 60.0
    power = np.where(at_home, spec.home_power_kw, spec.work_power_kw)
    strategy = np.where(leveling, Strategy.MIN_POWER, Strategy.IMMEDIATE)
    a, b, p, _, _ = charging_intervals(start, end, power, daily_kwh, strategy)
    trace = fold_day(integrate_intervals(a, b, p, 2 * MINUTES_PER_DAY))
    return minutes_to_hours(trace) * (spec.fleet_size / n)


def _temperature_lookup(temps) -> dict:
    if isinstance(temps, Mapping):
        return {d: (t.mean_temp_c if isinstance(t, TemperatureDay) else float(t)) for d, t in temps.items()}
    return {t.day: t.mean_temp_c for t in temps}


def build_ldv_county_year(
    spec: LdvFleetSpec,
    temps,
    year: int,
    load_level_share: float,
    seed: int,
    n_vehicles: int | None = None,
) -> HourlyProfile:
    """Concatenate county-days over a calendar year and shift to UTC.

    ``temps`` is a sequence of TemperatureDay or a mapping date -> deg C and
    must cover every day of ``year``.
    """
    lookup = _temperature_lookup(temps)
    day = date(year, 1, 1)
    cache = {}
    days = []
    while day.year == year:
        if day not in lookup:
            raise DataError(f"no temperature for county {spec.county.code} on {day.isoformat()}")
        key = (map_temperature_discrete(lookup[day]), _day_type(day))
        if key not in cache:
            cache[key] = synthesize_county_day(spec, key[0], key[1], load_level_share, seed, n_vehicles)
        days.append(cache[key])
        day += timedelta(days=1)
    local = np.concatenate(days)
    return HourlyProfile.for_year(spec.county, VehicleClass.LDV, year, np.roll(local, -int(spec.utc_offset_hours)))
