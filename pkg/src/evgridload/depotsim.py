"""Depot charging under immediate, delayed and minimum-power strategies.

Vehicle-days are simulated on a two-day minute axis (the overnight dwell
runs past midnight) and folded back onto a single 1440-minute day. Charging
intervals are integrated exactly into minute bins, so start and stop times
need not be minute-aligned.
"""

from __future__ import annotations

import calendar
from collections import Counter
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Mapping, Sequence

import numpy as np

from .core import ConfigurationError, DataError, DomainError, NormalizedShape, ShapeError, VehicleClass, rng_for
from .mobility import VehicleDaySchedule

MINUTES_PER_DAY = 1440


class Strategy(IntEnum):
    IMMEDIATE = 0
    DELAYED = 1
    MIN_POWER = 2


@dataclass(frozen=True)
class ChargerSpec:
    power_kw: float
    efficiency: float = 1.0

    def __post_init__(self):
        if not self.power_kw > 0:
            raise ConfigurationError(f"charger power must be positive, got {self.power_kw}")
        if not 0 < self.efficiency <= 1:
            raise ConfigurationError(f"charger efficiency must be in (0, 1], got {self.efficiency}")


def _check_weights(weights, what: str) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ConfigurationError(f"{what} weights must be nonnegative")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ConfigurationError(f"{what} weights sum to {w.sum()!r}, not 1")
    return w


@dataclass(frozen=True)
class StrategyMix:
    immediate: float
    delayed: float
    min_power: float

    def __post_init__(self):
        _check_weights(self.weights, "strategy mix")

    @property
    def weights(self) -> np.ndarray:
        # index order matches Strategy
        return np.array([self.immediate, self.delayed, self.min_power], dtype=np.float64)

    @classmethod
    def pure(cls, strategy: Strategy) -> "StrategyMix":
        w = [0.0, 0.0, 0.0]
        w[Strategy(strategy)] = 1.0
        return cls(*w)


@dataclass(frozen=True)
class ChargerMix:
    chargers: tuple[ChargerSpec, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "chargers", tuple(self.chargers))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.chargers) == 0 or len(self.chargers) != len(self.weights):
            raise ConfigurationError("charger mix needs one weight per charger")
        _check_weights(self.weights, "charger mix")

    @classmethod
    def from_powers(cls, mix: Mapping[float, float], efficiency: float = 1.0) -> "ChargerMix":
        items = sorted(mix.items())
        return cls(tuple(ChargerSpec(float(p), efficiency) for p, _ in items), tuple(w for _, w in items))

    @classmethod
    def single(cls, charger: ChargerSpec | float) -> "ChargerMix":
        if not isinstance(charger, ChargerSpec):
            charger = ChargerSpec(float(charger))
        return cls((charger,), (1.0,))


# 40% immediate, 10% delayed, 50% constant minimum power
DEFAULT_STRATEGY_MIX = StrategyMix(0.4, 0.1, 0.5)
DEFAULT_CHARGER_MIX = ChargerMix.from_powers({50: 0.05, 125: 0.05, 250: 0.10, 350: 0.40, 500: 0.40})


@dataclass(frozen=True)
class FleetSampleConfig:
    fleet_size: int
    n_samples: int
    seed: int = 0

    def __post_init__(self):
        if self.fleet_size < 1 or self.n_samples < 1:
            raise ConfigurationError("fleet_size and n_samples must be at least 1")


@dataclass(frozen=True)
class UnitEnergyUse:
    """Energy use per mile (kWh/mi) by weight class."""

    mdv: float = 1.2
    hdv: float = 2.0

    def __post_init__(self):
        if not (self.mdv > 0 and self.hdv > 0):
            raise ConfigurationError("unit energy use must be positive")

    def for_class(self, vclass: VehicleClass) -> float:
        vclass = VehicleClass.parse(vclass)
        if vclass is VehicleClass.MDV:
            return self.mdv
        if vclass is VehicleClass.HDV:
            return self.hdv
        raise ConfigurationError(f"no unit energy use for {vclass.value}")


def energy_required(miles: float, kwh_per_mile: float) -> float:
    if miles < 0:
        raise DomainError(f"miles must be nonnegative, got {miles}")
    if kwh_per_mile < 0:
        raise DomainError(f"unit energy use must be nonnegative, got {kwh_per_mile}")
    return float(miles) * float(kwh_per_mile)


def dwell_needs(sched: VehicleDaySchedule, kwh_per_mile: float) -> list[float]:
    """Energy to replace at each dwell: the consumption of the trip just finished."""
    return [energy_required(t.miles, kwh_per_mile) for t in sched.trips]


def integrate_intervals(starts, ends, powers, n_minutes: int) -> np.ndarray:
    """Average power per minute bin from constant-power intervals ``[start, end)``.

    Times are in minutes and may be fractional; each interval contributes its
    exact overlap with every bin.
    """
    a = np.asarray(starts, dtype=np.float64)
    b = np.asarray(ends, dtype=np.float64)
    p = np.asarray(powers, dtype=np.float64)
    keep = (b > a) & (p != 0)
    a, b, p = a[keep], b[keep], p[keep]
    if a.size and (a.min() < 0 or b.max() > n_minutes):
        raise ValueError("interval outside the simulation horizon")
    ia = np.floor(a).astype(np.int64)
    ib = np.floor(b).astype(np.int64)
    partial = np.zeros(n_minutes + 1)
    diff = np.zeros(n_minutes + 2)
    same = ia == ib
    np.add.at(partial, ia[same], p[same] * (b[same] - a[same]))
    multi = ~same
    am, bm, pm, iam, ibm = a[multi], b[multi], p[multi], ia[multi], ib[multi]
    np.add.at(partial, iam, pm * (iam + 1 - am))
    np.add.at(partial, ibm, pm * (bm - ibm))
    np.add.at(diff, iam + 1, pm)
    np.add.at(diff, ibm, -pm)
    out = np.cumsum(diff)[:n_minutes] + partial[:n_minutes]
    # the running sum leaves roundoff-sized negatives where intervals close
    return np.maximum(out, 0.0) if p.size == 0 or p.min() >= 0 else out


def fold_day(trace: np.ndarray) -> np.ndarray:
    """Wrap a two-day minute trace onto one day."""
    return trace[:MINUTES_PER_DAY] + trace[MINUTES_PER_DAY:2 * MINUTES_PER_DAY]


def minutes_to_hours(trace: np.ndarray) -> np.ndarray:
    return np.asarray(trace, dtype=np.float64).reshape(-1, 60).mean(axis=1)


def charging_intervals(win_start, win_end, power_kw, need_kwh, strategy):
    """Vectorised kernel shared by every strategy.

    All arguments broadcast; times in minutes, need is grid-side kWh.
    Returns ``(start, end, power, delivered_kwh, shortfall_kwh)``.
    """
    s = np.asarray(win_start, dtype=np.float64)
    e = np.asarray(win_end, dtype=np.float64)
    p = np.asarray(power_kw, dtype=np.float64)
    need = np.asarray(need_kwh, dtype=np.float64)
    strat = np.asarray(strategy)
    s, e, p, need, strat = np.broadcast_arrays(s, e, p, need, strat)
    dwell_h = np.maximum(e - s, 0.0) / 60.0
    delivered = np.minimum(need, p * dwell_h)
    shortfall = need - delivered
    with np.errstate(divide="ignore", invalid="ignore"):
        full_minutes = np.where(p > 0, delivered / p * 60.0, 0.0)
        flat = np.where(dwell_h > 0, delivered / dwell_h, 0.0)
    start = np.where(strat == Strategy.DELAYED, e - full_minutes, s)
    end = np.where(strat == Strategy.IMMEDIATE, s + full_minutes, e)
    power = np.where(strat == Strategy.MIN_POWER, flat, p)
    # exact end points where the charger runs the whole dwell
    saturated = delivered >= p * dwell_h
    start = np.where(saturated, s, start)
    end = np.where(saturated, e, end)
    return start, end, power, delivered, shortfall


@dataclass
class ChargeResult:
    trace: np.ndarray  # kW per minute of the day, grid side
    delivered_kwh: float  # battery side
    shortfall_kwh: float
    need_kwh: float

    @property
    def hourly(self) -> np.ndarray:
        return minutes_to_hours(self.trace)

    @property
    def feasible(self) -> bool:
        return self.shortfall_kwh <= 1e-9


def _simulate(sched: VehicleDaySchedule, charger: ChargerSpec, need, strategy: Strategy) -> ChargeResult:
    windows = sched.dwell_windows()
    needs = np.atleast_1d(np.asarray(need, dtype=np.float64))
    if needs.size == 1 and len(windows) > 1:
        raise ValueError(f"schedule has {len(windows)} dwell windows; give one need per window")
    if needs.size != len(windows):
        raise ValueError(f"{needs.size} needs for {len(windows)} dwell windows")
    if np.any(needs < 0):
        raise DomainError("energy need must be nonnegative")
    ws = np.array([w[0] for w in windows]) * 60.0
    we = np.array([w[1] for w in windows]) * 60.0
    grid_need = needs / charger.efficiency
    a, b, p, delivered, shortfall = charging_intervals(ws, we, charger.power_kw, grid_need, strategy)
    trace = fold_day(integrate_intervals(a, b, p, 2 * MINUTES_PER_DAY))
    eff = charger.efficiency
    return ChargeResult(trace, float(delivered.sum() * eff), float(shortfall.sum() * eff), float(needs.sum()))


def simulate_immediate(sched, charger, need) -> ChargeResult:
    """Full power from arrival until the need is met or the dwell ends."""
    return _simulate(sched, charger, need, Strategy.IMMEDIATE)


def simulate_delayed(sched, charger, need) -> ChargeResult:
    """Full power over the last part of each dwell, finishing at departure."""
    return _simulate(sched, charger, need, Strategy.DELAYED)


def simulate_min_power(sched, charger, need) -> ChargeResult:
    """Constant lowest power that completes the need across the whole dwell."""
    return _simulate(sched, charger, need, Strategy.MIN_POWER)


SIMULATORS = {
    Strategy.IMMEDIATE: simulate_immediate,
    Strategy.DELAYED: simulate_delayed,
    Strategy.MIN_POWER: simulate_min_power,
}


@dataclass
class FleetDiagnostics:
    """Running totals over every fleet aggregation it is passed to."""

    vehicle_days: int = 0
    need_kwh: float = 0.0
    delivered_kwh: float = 0.0
    shortfall_kwh: float = 0.0
    infeasible_dwells: int = 0
    strategy_counts: Counter = field(default_factory=Counter)
    charger_counts: Counter = field(default_factory=Counter)

    def report_lines(self, label: str = "") -> list[str]:
        prefix = f"{label} " if label else ""
        lines = [
            f"{prefix}vehicle_days={self.vehicle_days}",
            f"{prefix}need_kwh={self.need_kwh:.6f}",
            f"{prefix}delivered_kwh={self.delivered_kwh:.6f}",
            f"{prefix}shortfall_kwh={self.shortfall_kwh:.6f}",
            f"{prefix}infeasible_dwells={self.infeasible_dwells}",
        ]
        for strat in Strategy:
            lines.append(f"{prefix}strategy.{strat.name.lower()}={self.strategy_counts.get(strat.name.lower(), 0)}")
        for power in sorted(self.charger_counts):
            lines.append(f"{prefix}charger.{power:g}kW={self.charger_counts[power]}")
        return lines


@dataclass
class _Pool:
    win_start: np.ndarray
    win_end: np.ndarray
    need: np.ndarray
    offsets: np.ndarray
    counts: np.ndarray

    @classmethod
    def build(cls, schedules: Sequence[VehicleDaySchedule], kwh_per_mile: float) -> "_Pool":
        ws, we, need, counts = [], [], [], []
        for sched in schedules:
            windows = sched.dwell_windows()
            ws.extend(w[0] * 60.0 for w in windows)
            we.extend(w[1] * 60.0 for w in windows)
            need.extend(dwell_needs(sched, kwh_per_mile))
            counts.append(len(windows))
        counts = np.array(counts, dtype=np.int64)
        offsets = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
        return cls(np.array(ws), np.array(we), np.array(need), offsets, counts)

    def expand(self, vehicles: np.ndarray) -> np.ndarray:
        """Window row indices for a sequence of drawn schedules."""
        n = self.counts[vehicles]
        starts = np.repeat(self.offsets[vehicles], n)
        within = np.arange(n.sum()) - np.repeat(np.cumsum(n) - n, n)
        return starts + within


def aggregate_fleet_day(
    schedules: Sequence[VehicleDaySchedule],
    strategy_mix: StrategyMix,
    charger_mix: ChargerMix,
    unit_energy: float,
    cfg: FleetSampleConfig,
    month: int | None = None,
    utc_offset_hours: int = 0,
    diagnostics: FleetDiagnostics | None = None,
) -> np.ndarray:
    """Average-day fleet charging load (24 hourly kW values) for one month.

    Each of ``cfg.n_samples`` fleets draws ``cfg.fleet_size`` vehicle-days
    with replacement from the month's pool; each vehicle-day independently
    draws a strategy and a charger from the mixes. The result is the mean
    fleet load across samples, hour-averaged and shifted from depot-local
    time to UTC by ``utc_offset_hours`` (e.g. -7 for PDT).
    """
    pool = [s for s in schedules if month is None or s.day.month == month]
    if not pool:
        raise DataError(f"no vehicle-day schedules for month {month}")
    if unit_energy <= 0:
        raise DomainError("unit energy use must be positive")
    rows = _Pool.build(pool, unit_energy)
    strat_w = strategy_mix.weights
    charger_w = np.asarray(charger_mix.weights)
    powers = np.array([c.power_kw for c in charger_mix.chargers])
    effs = np.array([c.efficiency for c in charger_mix.chargers])

    trace = np.zeros(2 * MINUTES_PER_DAY)
    for k in range(cfg.n_samples):
        rng = rng_for(cfg.seed, "fleet-sample", -1 if month is None else month, k)
        vehicles = rng.integers(0, len(pool), size=cfg.fleet_size)
        strategies = rng.choice(3, size=cfg.fleet_size, p=strat_w)
        chargers = rng.choice(len(powers), size=cfg.fleet_size, p=charger_w)
        idx = rows.expand(vehicles)
        per_window = np.repeat(np.arange(cfg.fleet_size), rows.counts[vehicles])
        ch = chargers[per_window]
        grid_need = rows.need[idx] / effs[ch]
        a, b, p, delivered, shortfall = charging_intervals(
            rows.win_start[idx], rows.win_end[idx], powers[ch], grid_need, strategies[per_window]
        )
        trace += integrate_intervals(a, b, p, 2 * MINUTES_PER_DAY)
        if diagnostics is not None:
            diagnostics.vehicle_days += cfg.fleet_size
            diagnostics.need_kwh += float(rows.need[idx].sum())
            diagnostics.delivered_kwh += float((delivered * effs[ch]).sum())
            diagnostics.shortfall_kwh += float((shortfall * effs[ch]).sum())
            diagnostics.infeasible_dwells += int(np.count_nonzero(shortfall > 1e-9))
            for code, count in zip(*np.unique(strategies, return_counts=True)):
                diagnostics.strategy_counts[Strategy(int(code)).name.lower()] += int(count)
            for code, count in zip(*np.unique(chargers, return_counts=True)):
                diagnostics.charger_counts[float(powers[code])] += int(count)
    hourly = minutes_to_hours(fold_day(trace / cfg.n_samples))
    return np.roll(hourly, -int(utc_offset_hours))


def build_yearly_shape(monthly_avg_days, year: int) -> NormalizedShape:
    """Tile each month's average day over its calendar days and normalise."""
    days = np.asarray(monthly_avg_days, dtype=np.float64)
    if days.shape != (12, 24):
        raise ShapeError(f"expected 12 x 24 monthly average days, got {days.shape}")
    if np.any(days < 0) or not np.all(np.isfinite(days)):
        raise ShapeError("monthly profiles must be finite and nonnegative")
    year_values = np.concatenate(
        [np.tile(days[m], calendar.monthrange(year, m + 1)[1]) for m in range(12)]
    )
    total = year_values.sum()
    if total <= 0:
        raise ShapeError("all-zero monthly profiles cannot be normalised")
    return NormalizedShape(year_values / total, year=year)
