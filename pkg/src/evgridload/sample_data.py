"""Small self-contained input bundle: two states, four counties, three BAs.

All values are synthetic. The bundle exercises every input table and is
small enough to run the whole pipeline in seconds.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from .core import hours_in_year

COUNTIES = {
    # fips: (state, share of state LDV stock, base temperature C)
    "06037": ("CA", 0.7, 18.0),
    "06073": ("CA", 0.3, 17.0),
    "53033": ("WA", 0.8, 11.0),
    "53061": ("WA", 0.2, 10.0),
}

COUNTY_BA = [
    ("06037", "CISO", 0.6),
    ("06037", "LDWP", 0.4),
    ("06073", "CISO", 1.0),
    ("53033", "BPAT", 1.0),
    ("53061", "BPAT", 1.0),
]

# (county, ba, enplanements, rail route miles, shipping docks)
ACTIVITY = [
    ("06037", "CISO", 20_000_000, 300.0, 40),
    ("06037", "LDWP", 21_000_000, 200.0, 25),
    ("06073", "CISO", 12_000_000, 150.0, 10),
    ("53033", "BPAT", 25_000_000, 350.0, 30),
    ("53061", "BPAT", 500_000, 120.0, 5),
]

SYSTEM_BASE_MW = {"CISO": 25_000.0, "LDWP": 3_000.0, "BPAT": 6_000.0}

CLIMATE_OFFSET_C = {"rcp45cooler": 0.0, "rcp45hotter": 1.5, "rcp85cooler": 1.0, "rcp85hotter": 2.5}


def energy_rows(year: int, pathway: str, mhdv_ej: float, ldv_pj: float, nonroad_pj: float) -> list[dict]:
    state_split = {"CA": 0.7, "WA": 0.3}
    rows = []
    for state, frac in state_split.items():
        rows.append(dict(state=state, year=year, pathway=pathway, vclass="LDV", energy=ldv_pj * frac, unit="PJ"))
        rows.append(dict(state=state, year=year, pathway=pathway, vclass="MDV", energy=0.4 * mhdv_ej * frac, unit="EJ"))
        rows.append(dict(state=state, year=year, pathway=pathway, vclass="HDV", energy=0.6 * mhdv_ej * frac, unit="EJ"))
        for vclass, part in (("Rail", 0.4), ("Aviation", 0.3), ("Ship", 0.3)):
            rows.append(dict(state=state, year=year, pathway=pathway, vclass=vclass,
                             energy=nonroad_pj * part * frac, unit="PJ"))
    return rows


def temperature_frame(year: int, climate: str, seed: int = 7) -> pd.DataFrame:
    days = pd.date_range(f"{year}-01-01", f"{year}-12-31", freq="D")
    doy = days.dayofyear.to_numpy()
    rng = np.random.default_rng([seed, year])
    frames = []
    for fips, (_, _, base) in COUNTIES.items():
        seasonal = -9.0 * np.cos(2 * np.pi * (doy - 15) / 365.25)
        noise = rng.normal(0.0, 3.0, days.size)
        temp = base + seasonal + noise + CLIMATE_OFFSET_C[climate]
        frames.append(pd.DataFrame({"county_fips": fips, "date": days.strftime("%Y-%m-%d"),
                                    "mean_temp_c": np.round(temp, 2)}))
    return pd.concat(frames, ignore_index=True)


def system_load_frame(year: int) -> pd.DataFrame:
    n = hours_in_year(year)
    stamps = pd.date_range(f"{year}-01-01", periods=n, freq="h", tz="UTC")
    hour = np.arange(n)
    # demand peaks late afternoon Pacific time (about 00 UTC) and in summer
    daily = 1.0 + 0.2 * np.cos(2 * np.pi * (hour % 24) / 24.0)
    seasonal = 1.0 + 0.15 * np.cos(2 * np.pi * (hour / 24.0 - 200) / 365.25)
    frames = []
    for ba, base in SYSTEM_BASE_MW.items():
        frames.append(pd.DataFrame({
            "ba_code": ba,
            "timestamp_utc": stamps.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "load_mw": np.round(base * daily * seasonal, 3),
        }))
    return pd.concat(frames, ignore_index=True)


def write_sample_bundle(
    directory,
    years=(2035,),
    pathways=("NZ",),
    climates=("rcp45cooler",),
    mhdv_ej: float = 1.0,
    ldv_pj: float = 0.5,
    nonroad_pj: float = 0.1,
    seed: int = 20240101,
    with_system_load: bool = True,
    mhdv: dict | None = None,
    ldv: dict | None = None,
) -> Path:
    """Write every input table plus ``config.yaml``; returns the config path.

    BAU energies are 0.8x the NZ ones so pathway comparisons have something
    to show.
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    rows = []
    for year in years:
        for pathway in pathways:
            scale = 0.8 if pathway == "BAU" else 1.0
            rows += energy_rows(year, pathway, mhdv_ej * scale, ldv_pj * scale, nonroad_pj * scale)
    pd.DataFrame(rows).to_csv(d / "annual_energy.csv", index=False)
    pd.DataFrame(
        [(s, f, share) for f, (s, share, _) in COUNTIES.items()], columns=["state", "county_fips", "share"]
    ).to_csv(d / "county_allocation.csv", index=False)
    pd.DataFrame(COUNTY_BA, columns=["county_fips", "ba_code", "weight"]).to_csv(d / "county_ba_map.csv", index=False)
    pd.DataFrame(
        ACTIVITY, columns=["county_fips", "ba_code", "enplanements", "rail_route_miles", "shipping_docks"]
    ).to_csv(d / "nonroad_activity.csv", index=False)

    temperature = {}
    for climate in climates:
        name = f"temperature_{climate}.csv"
        pd.concat([temperature_frame(y, climate) for y in years]).to_csv(d / name, index=False)
        temperature[climate] = name

    inputs = {
        "annual_energy": "annual_energy.csv",
        "county_allocation": "county_allocation.csv",
        "county_ba_map": "county_ba_map.csv",
        "nonroad_activity": "nonroad_activity.csv",
        "temperature": temperature,
    }
    if with_system_load:
        pd.concat([system_load_frame(y) for y in years]).to_csv(d / "system_load.csv", index=False)
        inputs["system_load"] = "system_load.csv"

    mhdv_section = {
        "strategy_mix": {"immediate": 0.4, "delayed": 0.1, "min_power": 0.5},
        "charger_mix": {50: 0.05, 125: 0.05, 250: 0.10, 350: 0.40, 500: 0.40},
        "unit_energy_kwh_per_mile": {"MDV": 1.2, "HDV": 2.0},
        "fleet_size": 50,
        "n_samples": 10,
        "known_mdv_ba_shares": {"CISO": 0.55},
        "synthetic_vehicles_per_vocation": 10,
        "synthetic_days_per_month": 2,
    }
    mhdv_section.update(mhdv or {})
    ldv_section = {"home_access": 0.75, "max_simulated_vehicles": 5000}
    ldv_section.update(ldv or {})
    config = {
        "seed": seed,
        "output_dir": "out",
        "utc_offset_hours": -8,
        "scenarios": [f"{y}:{p}:{c}" for y in years for p in pathways for c in climates],
        "classes": ["ldv", "mhdv", "nonroad"],
        "inputs": inputs,
        "ldv": ldv_section,
        "mhdv": mhdv_section,
    }
    path = d / "config.yaml"
    path.write_text(yaml.safe_dump(config, sort_keys=False))
    return path
