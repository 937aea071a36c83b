"""Rail, aviation and shipping loads: activity-based BA shares, flat profiles."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .core import (
    NONROAD_CLASSES,
    ConfigurationError,
    DataError,
    EnergyQuantity,
    FormatError,
    GeoId,
    HourlyProfile,
    VehicleClass,
    hours_in_year,
)
from .downscale import CountyBaMap, read_table

# activity column that apportions each class
ACTIVITY_COLUMNS = {
    VehicleClass.AVIATION: "enplanements",
    VehicleClass.RAIL: "rail_route_miles",
    VehicleClass.SHIP: "shipping_docks",
}


@dataclass
class NonRoadActivityTable:
    """Activity totals per BA: ``activity[vclass][ba]``."""

    activity: dict[VehicleClass, dict[str, float]]

    def __post_init__(self):
        for vclass, per_ba in self.activity.items():
            if any(v < 0 or not np.isfinite(v) for v in per_ba.values()):
                raise DataError(f"negative or non-finite {vclass.value} activity")

    @classmethod
    def from_frame(cls, df: pd.DataFrame, ba_map: CountyBaMap | None = None) -> "NonRoadActivityTable":
        """Aggregate county rows by their ``ba_code``.

        Rows with a blank ``ba_code`` are spread over BAs with ``ba_map``.
        """
        activity = {vc: defaultdict(float) for vc in ACTIVITY_COLUMNS}
        for _, row in df.iterrows():
            ba = row.get("ba_code")
            if isinstance(ba, str) and ba.strip():
                targets = [(ba.strip(), 1.0)]
            elif ba_map is not None:
                fips = f"{int(row['county_fips']):05d}"
                if fips not in ba_map.weights:
                    raise DataError(f"county {fips} has no BA mapping")
                targets = ba_map.weights[fips]
            else:
                raise DataError(f"county {row['county_fips']} has no BA code")
            for vclass, col in ACTIVITY_COLUMNS.items():
                value = float(row[col])
                for target, w in targets:
                    activity[vclass][target] += w * value
        return cls({vc: dict(v) for vc, v in activity.items()})

    @classmethod
    def from_csv(cls, path, ba_map: CountyBaMap | None = None) -> "NonRoadActivityTable":
        df = read_table(path, ["county_fips", "ba_code", *ACTIVITY_COLUMNS.values()],
                        dtype={"county_fips": str, "ba_code": str})
        try:
            return cls.from_frame(df, ba_map)
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{path}: {exc}") from None

    def bas(self) -> list[str]:
        return sorted({ba for per_ba in self.activity.values() for ba in per_ba})

    def total(self, vclass: VehicleClass) -> float:
        return float(sum(self.activity.get(vclass, {}).values()))


def _check_class(vclass) -> VehicleClass:
    vclass = VehicleClass.parse(vclass)
    if vclass not in NONROAD_CLASSES:
        raise ConfigurationError(f"{vclass.value} is not a non-road class")
    return vclass


def ba_shares(table: NonRoadActivityTable, vclass: VehicleClass) -> dict[str, float]:
    vclass = _check_class(vclass)
    per_ba = table.activity.get(vclass, {})
    total = sum(per_ba.values())
    if total <= 0:
        raise DataError(f"no {vclass.value} activity in any BA")
    return {ba: per_ba.get(ba, 0.0) / total for ba in table.bas()}


def ba_share(table: NonRoadActivityTable, ba: str, vclass: VehicleClass) -> float:
    """A BA's share of the interconnection's activity for one class."""
    return ba_shares(table, vclass).get(ba, 0.0)


def constant_profile(annual_energy: EnergyQuantity | float, year: int, geo: GeoId,
                     vclass: VehicleClass) -> HourlyProfile:
    """Flat load delivering ``annual_energy`` (kWh if a bare number) over the year."""
    kwh = annual_energy.kwh if isinstance(annual_energy, EnergyQuantity) else float(annual_energy)
    if kwh < 0:
        raise DataError("annual energy must be nonnegative")
    n = hours_in_year(year)
    return HourlyProfile.for_year(geo, vclass, year, np.full(n, kwh / n))
