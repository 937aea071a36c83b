"""Spatial allocation tables and energy-conserving shape scaling."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
import pandas as pd

from .core import (
    DataError,
    EnergyQuantity,
    FormatError,
    GeoId,
    HourlyProfile,
    NormalizedShape,
    ShapeError,
    VehicleClass,
    combine_profiles,
    convert_energy,
)

log = logging.getLogger(__name__)

SHARE_TOLERANCE = 1e-6


def read_table(path, required, dtype=None) -> pd.DataFrame:
    """Read a CSV and check it carries every required column."""
    path = Path(path)
    try:
        df = pd.read_csv(path, dtype=dtype)
    except FileNotFoundError:
        raise
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from None
    df.columns = [str(c).strip() for c in df.columns]
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise FormatError(f"{path}: missing required column(s) {', '.join(missing)}")
    return df


def _fips(value) -> str:
    return f"{int(value):05d}"


@dataclass
class AllocationTable:
    """Shares of each parent region's energy by child region."""

    shares: dict[str, list[tuple[str, float]]]
    vclass: VehicleClass | None = None
    vintage: str = ""

    @classmethod
    def from_frame(cls, df: pd.DataFrame, parent_col: str, child_col: str, share_col: str = "share",
                   child_fmt=str, **kwargs) -> "AllocationTable":
        shares = defaultdict(list)
        for parent, child, share in zip(df[parent_col], df[child_col], df[share_col]):
            shares[str(parent).strip()].append((child_fmt(child), float(share)))
        return cls(dict(shares), **kwargs)

    @classmethod
    def from_csv(cls, path, parent_col: str = "state", child_col: str = "county_fips", share_col: str = "share",
                 **kwargs) -> "AllocationTable":
        df = read_table(path, [parent_col, child_col, share_col], dtype={parent_col: str, child_col: str})
        child_fmt = _fips if child_col == "county_fips" else str
        try:
            return cls.from_frame(df, parent_col, child_col, share_col, child_fmt=child_fmt, **kwargs)
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{path}: {exc}") from None

    def parents(self) -> list[str]:
        return sorted(self.shares)

    def children(self) -> list[str]:
        return sorted({c for rows in self.shares.values() for c, _ in rows})


@dataclass(frozen=True)
class Violation:
    parent: str
    reason: str

    def __str__(self):
        return f"{self.parent}: {self.reason}"


def validate_allocation(table: AllocationTable, tol: float = SHARE_TOLERANCE) -> list[Violation]:
    """Every parent whose shares are negative or do not sum to one; empty when clean."""
    problems = []
    for parent in table.parents():
        rows = table.shares[parent]
        negatives = [c for c, s in rows if s < 0 or not np.isfinite(s)]
        if negatives:
            problems.append(Violation(parent, f"negative or non-finite share for {', '.join(negatives)}"))
        total = float(np.sum([s for _, s in rows]))
        if abs(total - 1.0) > tol:
            problems.append(Violation(parent, f"shares sum to {total:.9g}, not 1"))
    return problems


def allocate(parent_energy: float, table: AllocationTable, parent: str) -> dict[str, float]:
    """Split a parent's energy over its children.

    The largest-share child takes the rounding residual so the children sum
    back to the parent.
    """
    if parent not in table.shares:
        raise DataError(f"{parent!r} is not in the allocation table")
    rows = table.shares[parent]
    largest = max(range(len(rows)), key=lambda i: (rows[i][1], -i))
    out = {}
    for i, (child, share) in enumerate(rows):
        if i != largest:
            out[child] = out.get(child, 0.0) + parent_energy * share
    big = rows[largest][0]
    others = [v for c, v in out.items() if c != big]
    base = out.get(big, 0.0)
    # exact residual, then nudge by ulps until fsum(children) == parent
    rest = math.fsum([parent_energy, -base, *(-v for v in others)])
    for _ in range(8):
        total = math.fsum([*others, base + rest])
        if total == parent_energy:
            break
        rest = math.nextafter(rest, -math.inf if total > parent_energy else math.inf)
    out[big] = base + rest
    return {child: out[child] for child, _ in rows}


def scale_shape(shape: NormalizedShape | np.ndarray, annual_energy: EnergyQuantity | float, geo: GeoId,
                vclass: VehicleClass | None, year: int) -> HourlyProfile:
    """Hourly kW from a normalised yearly shape and an annual energy (kWh if a bare number)."""
    if not isinstance(shape, NormalizedShape):
        try:
            shape = NormalizedShape(np.asarray(shape, dtype=np.float64))
        except ShapeError as exc:
            raise ShapeError(f"shape is not normalised: {exc}") from None
    kwh = annual_energy.kwh if isinstance(annual_energy, EnergyQuantity) else float(annual_energy)
    return HourlyProfile.for_year(geo, vclass, year, shape.values * kwh)


def normalize_profile(profile: HourlyProfile) -> NormalizedShape:
    total = profile.energy_kwh
    if total <= 0:
        raise ShapeError("cannot normalise a zero-energy profile")
    return NormalizedShape(profile.values / total, year=profile.start.year if len(profile) != 24 else None)


def mhdv_ba_shares(known: Mapping[str, float], ldv_shares: Mapping[str, float]) -> dict[str, float]:
    """Complete a partial map of medium-duty BA shares using light-duty shares.

    Missing BAs get ``ldv_share * k`` with ``k`` the ratio of known MDV share to
    the LDV share of the same BAs; the result is renormalised. The same map is
    used for heavy-duty vehicles.
    """
    unknown = set(known) - set(ldv_shares)
    if unknown:
        raise DataError(f"BA(s) {', '.join(sorted(unknown))} have MDV shares but no LDV share")
    ldv_known = sum(ldv_shares[ba] for ba in known)
    if not known or ldv_known <= 0:
        log.warning("no usable known MDV shares; falling back to LDV shares")
        kappa = 1.0
    else:
        kappa = sum(known.values()) / ldv_known
    raw = {ba: float(known[ba]) if ba in known else ldv_shares[ba] * kappa for ba in ldv_shares}
    total = sum(raw.values())
    if total <= 0:
        raise DataError("BA shares sum to zero")
    return {ba: v / total for ba, v in raw.items()}


@dataclass
class CountyBaMap:
    """County FIPS -> list of (BA code, overlap weight)."""

    weights: dict[str, list[tuple[str, float]]] = field(default_factory=dict)

    @classmethod
    def from_csv(cls, path) -> "CountyBaMap":
        df = read_table(path, ["county_fips", "ba_code"], dtype={"county_fips": str, "ba_code": str})
        # a missing or blank weight means the county lies wholly in that BA
        df["weight"] = df["weight"].fillna(1.0) if "weight" in df.columns else 1.0
        weights = defaultdict(list)
        try:
            for fips, ba, w in zip(df["county_fips"], df["ba_code"], df["weight"]):
                weights[_fips(fips)].append((str(ba).strip(), float(w)))
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{path}: {exc}") from None
        return cls(dict(weights))

    def as_allocation(self) -> AllocationTable:
        return AllocationTable(self.weights)

    def validate(self) -> list[Violation]:
        return validate_allocation(self.as_allocation())

    def bas(self) -> list[str]:
        return sorted({ba for rows in self.weights.values() for ba, _ in rows})

    def ba_totals(self, county_values: Mapping[str, float]) -> dict[str, float]:
        out = defaultdict(float)
        for county, value in county_values.items():
            if county not in self.weights:
                raise DataError(f"county {county} has no BA mapping")
            for ba, w in self.weights[county]:
                out[ba] += w * value
        return dict(out)


def county_to_ba(profiles: Mapping[str, HourlyProfile], ba_map: CountyBaMap) -> dict[str, HourlyProfile]:
    """Sum county profiles into BA profiles using the overlap weights."""
    parts = defaultdict(lambda: ([], []))
    for county, profile in profiles.items():
        if county not in ba_map.weights:
            raise DataError(f"county {county} has no BA mapping")
        for ba, w in ba_map.weights[county]:
            parts[ba][0].append(profile)
            parts[ba][1].append(w)
    return {
        ba: combine_profiles(ps, ws, geo=GeoId.ba(ba), vclass=ps[0].vclass)
        for ba, (ps, ws) in sorted(parts.items())
    }


ENERGY_COLUMNS = ("state", "year", "pathway", "vclass", "energy", "unit")


@dataclass
class AnnualEnergyTable:
    """Annual state energy by year, pathway and vehicle class, held in kWh."""

    frame: pd.DataFrame

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> "AnnualEnergyTable":
        df = df.copy()
        df["state"] = df["state"].astype(str).str.strip().str.upper()
        df["pathway"] = df["pathway"].astype(str).str.strip()
        df["vclass"] = [VehicleClass.parse(v).value for v in df["vclass"]]
        df["year"] = df["year"].astype(int)
        df["kwh"] = [
            convert_energy(EnergyQuantity(float(e), str(u).strip()), "kWh").magnitude
            for e, u in zip(df["energy"], df["unit"])
        ]
        dup = df.duplicated(["state", "year", "pathway", "vclass"], keep=False)
        if dup.any():
            first = df[dup].iloc[0]
            raise DataError(
                f"duplicate energy rows for {first.state} {first.year} {first.pathway} {first.vclass}"
            )
        return cls(df[["state", "year", "pathway", "vclass", "kwh"]].reset_index(drop=True))

    @classmethod
    def from_csv(cls, path) -> "AnnualEnergyTable":
        df = read_table(path, ENERGY_COLUMNS, dtype={"state": str})
        try:
            return cls.from_frame(df)
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{path}: {exc}") from None

    def _select(self, year: int, pathway: str, vclass: VehicleClass) -> pd.DataFrame:
        f = self.frame
        return f[(f.year == year) & (f.pathway == str(getattr(pathway, "value", pathway)))
                 & (f.vclass == VehicleClass.parse(vclass).value)]

    def by_state(self, year: int, pathway: str, vclass: VehicleClass) -> dict[str, float]:
        rows = self._select(year, pathway, vclass)
        return dict(zip(rows.state, rows.kwh.astype(float)))

    def interconnection_total(self, year: int, pathway: str, vclass: VehicleClass) -> float:
        """Sum of the state energies (kWh)."""
        return float(sum(self.by_state(year, pathway, vclass).values()))
