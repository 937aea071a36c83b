"""Scenario pipeline: annual state energy in, hourly BA profiles out."""

from __future__ import annotations

import hashlib
import json
import logging
import platform
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .config import RunConfig, for_climate
from .core import (
    MHDV_CLASSES,
    NONROAD_CLASSES,
    WESTERN_INTERCONNECTION,
    ConfigurationError,
    DataError,
    EnergyQuantity,
    GeoId,
    HourlyProfile,
    ScenarioKey,
    VehicleClass,
    combine_profiles,
    hours_in_year,
    rng_for,
)
from .depotsim import FleetDiagnostics, FleetSampleConfig, aggregate_fleet_day, build_yearly_shape
from .downscale import (
    AllocationTable,
    AnnualEnergyTable,
    CountyBaMap,
    allocate,
    county_to_ba,
    mhdv_ba_shares,
    normalize_profile,
    read_table,
    scale_shape,
    validate_allocation,
)
from .ldv import LdvFleetSpec, build_ldv_county_year, estimate_fleet_size
from .metrics import BaLoadPair, metrics_row, read_system_load, write_metrics
from .mobility import (
    SyntheticFleetConfig,
    build_day_schedules,
    filter_return_to_base,
    generate_synthetic_fleet,
    parse_mobility_file,
    write_rejects,
)
from .nonroad import NonRoadActivityTable, ba_shares, constant_profile

log = logging.getLogger(__name__)

CLASS_ORDER = [VehicleClass.LDV, *MHDV_CLASSES, *NONROAD_CLASSES]
TIME_FORMAT = "%Y-%m-%dT%H:%M:%SZ"
FLOAT_FORMAT = "%.12g"


@dataclass
class Inputs:
    energy: AnnualEnergyTable
    ba_map: CountyBaMap
    county_allocation: AllocationTable | None
    activity: NonRoadActivityTable | None
    ldv_county: pd.DataFrame | None

    @classmethod
    def load(cls, cfg: RunConfig) -> "Inputs":
        ba_map = CountyBaMap.from_csv(cfg.county_ba_map)
        return cls(
            energy=AnnualEnergyTable.from_csv(cfg.annual_energy),
            ba_map=ba_map,
            county_allocation=AllocationTable.from_csv(cfg.county_allocation) if cfg.county_allocation else None,
            activity=NonRoadActivityTable.from_csv(cfg.nonroad_activity, ba_map) if cfg.nonroad_activity else None,
            ldv_county=read_ldv_county(cfg.ldv_county) if cfg.ldv_county else None,
        )


def read_ldv_county(path) -> pd.DataFrame:
    df = read_table(path, ["state", "county_fips", "year", "pathway"], dtype={"county_fips": str, "state": str})
    if "annual_energy_pj" not in df.columns and "fleet_size" not in df.columns:
        raise DataError(f"{path}: needs an annual_energy_pj or fleet_size column")
    df["county_fips"] = [f"{int(v):05d}" for v in df["county_fips"]]
    return df


def read_temperatures(path, year: int) -> dict[str, dict[date, float]]:
    """Daily mean temperature by county for one year."""
    df = read_table(path, ["county_fips", "date", "mean_temp_c"], dtype={"county_fips": str})
    try:
        days = pd.to_datetime(df["date"]).dt.date
        temps = df["mean_temp_c"].astype(float)
    except (ValueError, TypeError) as exc:
        raise DataError(f"{path}: {exc}") from None
    out = defaultdict(dict)
    for fips, day, t in zip(df["county_fips"], days, temps):
        if day.year == year:
            out[f"{int(fips):05d}"][day] = float(t)
    return dict(out)


@dataclass
class ScenarioResult:
    scenario: ScenarioKey
    classes: tuple[str, ...]
    profiles: dict[tuple[str, VehicleClass], HourlyProfile] = field(default_factory=dict)
    inputs_kwh: dict[VehicleClass, float] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)
    rejects: list = field(default_factory=list)

    def bas(self) -> list[str]:
        return sorted({ba for ba, _ in self.profiles})

    def vclasses(self) -> list[VehicleClass]:
        present = {vc for _, vc in self.profiles}
        return [vc for vc in CLASS_ORDER if vc in present]

    def class_energy(self, vclass: VehicleClass) -> float:
        return float(sum(p.energy_kwh for (_, vc), p in self.profiles.items() if vc is vclass))

    def ba_total(self, ba: str) -> HourlyProfile:
        parts = [self.profiles[(ba, vc)] for vc in self.vclasses() if (ba, vc) in self.profiles]
        return combine_profiles(parts, [1.0] * len(parts), vclass=None)


def _derived_seed(seed: int, *keys) -> int:
    return int(rng_for(seed, *keys).integers(0, 2**62))


def _county_ldv_energy(cfg: RunConfig, inputs: Inputs, sc: ScenarioKey):
    """County targets as {fips: (state, kWh or None, fleet or None)}."""
    out = {}
    if inputs.ldv_county is not None:
        df = inputs.ldv_county
        rows = df[(df["year"].astype(int) == sc.year) & (df["pathway"].astype(str) == sc.pathway.value)]
        for _, row in rows.iterrows():
            energy = row.get("annual_energy_pj")
            if energy is not None and pd.notna(energy):
                out[row["county_fips"]] = (str(row["state"]), EnergyQuantity(float(energy), "PJ").kwh, None)
            else:
                out[row["county_fips"]] = (str(row["state"]), None, int(row["fleet_size"]))
        return out
    by_state = inputs.energy.by_state(sc.year, sc.pathway, VehicleClass.LDV)
    for state, kwh in sorted(by_state.items()):
        for fips, child_kwh in allocate(kwh, inputs.county_allocation, state).items():
            out[fips] = (state, child_kwh, None)
    return out


def _run_ldv(cfg: RunConfig, inputs: Inputs, sc: ScenarioKey, result: ScenarioResult, threads: int):
    targets = _county_ldv_energy(cfg, inputs, sc)
    result.inputs_kwh[VehicleClass.LDV] = float(sum(t[1] or 0.0 for t in targets.values()))
    s = cfg.ldv
    share = s.adoption(sc.year)
    temp_path = for_climate(cfg.temperature, sc.climate.value)
    if temp_path is None:
        raise ConfigurationError(f"no temperature input for climate {sc.climate.value}")
    temps = read_temperatures(temp_path, sc.year)

    def one(fips):
        _, kwh, fleet = targets[fips]
        if fleet is None:
            fleet = estimate_fleet_size(EnergyQuantity(kwh, "kWh").to("PJ").magnitude, s.mj_per_vkm, s.avg_annual_km)
        # the fleet only sets magnitude when an energy target rescales the shape
        sim_fleet = max(fleet, s.min_simulated_vehicles) if kwh is not None else fleet
        spec = LdvFleetSpec(
            GeoId.county(fips), sim_fleet, s.home_preference, s.home_access, s.home_power_kw, s.work_power_kw,
            s.base_kwh_per_day, s.weekend_factor, s.county_utc_offsets.get(fips, cfg.utc_offset_hours),
        )
        if fips not in temps:
            raise DataError(f"{temp_path}: no temperatures for county {fips} in {sc.year}")
        profile = build_ldv_county_year(spec, temps[fips], sc.year, share, _derived_seed(cfg.seed, "ldv", sc.year),
                                        n_vehicles=s.max_simulated_vehicles)
        if kwh is not None:
            profile = scale_shape(normalize_profile(profile), kwh, profile.geo, VehicleClass.LDV, sc.year) \
                if kwh > 0 else profile.replace(values=np.zeros(len(profile)))
        return fips, fleet, min(sim_fleet, s.max_simulated_vehicles), profile

    with ThreadPoolExecutor(max_workers=threads) as pool:
        done = list(pool.map(one, sorted(targets)))
    county_profiles = {}
    for fips, fleet, simulated, profile in done:
        county_profiles[fips] = profile
        result.diagnostics.append(
            f"ldv county={fips} fleet_estimate={fleet} simulated_vehicles={simulated} "
            f"energy_kwh={profile.energy_kwh:.6f}"
        )
    result.diagnostics.append(f"ldv load_level_share={share:.6f}")
    for ba, profile in county_to_ba(county_profiles, inputs.ba_map).items():
        result.profiles[(ba, VehicleClass.LDV)] = profile


def _ldv_ba_shares(cfg: RunConfig, inputs: Inputs, sc: ScenarioKey) -> dict[str, float]:
    targets = _county_ldv_energy(cfg, inputs, sc)
    weights = {fips: (t[1] if t[1] is not None else float(t[2])) for fips, t in targets.items()}
    totals = inputs.ba_map.ba_totals(weights)
    for ba in inputs.ba_map.bas():
        totals.setdefault(ba, 0.0)
    total = sum(totals.values())
    if total <= 0:
        raise DataError("LDV energy is zero everywhere; cannot extrapolate MHDV BA shares")
    return {ba: v / total for ba, v in sorted(totals.items())}


def _mhdv_schedules(cfg: RunConfig, sc: ScenarioKey, result: ScenarioResult) -> dict[VehicleClass, list]:
    pools = defaultdict(list)
    for path, vclass in cfg.mobility:
        parsed = parse_mobility_file(path)
        result.rejects.extend(parsed.rejects)
        kept = filter_return_to_base(parsed.records, rejects=result.rejects)
        pools[vclass].extend(build_day_schedules(kept, rejects=result.rejects))
        result.diagnostics.append(f"mobility file={path.name} rows={parsed.n_rows} kept={len(kept)}")
    days = [date(sc.year, m, d) for m in range(1, 13) for d in range(1, cfg.mhdv.synthetic_days_per_month + 1)]
    for vocation, vc in sorted(cfg.mhdv.vocations.items()):
        vclass = VehicleClass.parse(vc)
        if any(c is vclass for _, c in cfg.mobility):
            continue
        fleet_cfg = SyntheticFleetConfig.for_vocation(
            vocation, _derived_seed(cfg.seed, "vocation", vocation), cfg.mhdv.synthetic_vehicles_per_vocation
        )
        pools[vclass].extend(generate_synthetic_fleet(fleet_cfg, days))
    return pools


def _run_mhdv(cfg: RunConfig, inputs: Inputs, sc: ScenarioKey, result: ScenarioResult, threads: int):
    m = cfg.mhdv
    known = {str(k): float(v) for k, v in m.known_mdv_ba_shares.items()}
    shares = mhdv_ba_shares(known, _ldv_ba_shares(cfg, inputs, sc))
    table = AllocationTable({WESTERN_INTERCONNECTION.code: sorted(shares.items())})
    pools = _mhdv_schedules(cfg, sc, result)

    def one(vclass):
        total = inputs.energy.interconnection_total(sc.year, sc.pathway, vclass)
        diag = FleetDiagnostics()
        if total <= 0:
            return vclass, total, None, diag
        sample_cfg = FleetSampleConfig(m.fleet_size, m.n_samples, _derived_seed(cfg.seed, "mhdv", vclass.value, sc.year))
        monthly = [
            aggregate_fleet_day(pools[vclass], m.strategy_mix, m.charger_mix, m.unit_energy.for_class(vclass),
                                sample_cfg, month, cfg.utc_offset_hours, diag)
            for month in range(1, 13)
        ]
        return vclass, total, build_yearly_shape(monthly, sc.year), diag

    with ThreadPoolExecutor(max_workers=threads) as pool:
        done = list(pool.map(one, MHDV_CLASSES))
    for vclass, total, shape, diag in done:
        result.inputs_kwh[vclass] = total
        ba_kwh = allocate(total, table, WESTERN_INTERCONNECTION.code)
        for ba, kwh in ba_kwh.items():
            geo = GeoId.ba(ba)
            if shape is None:
                result.profiles[(ba, vclass)] = HourlyProfile.for_year(geo, vclass, sc.year, np.zeros(hours_in_year(sc.year)))
            else:
                result.profiles[(ba, vclass)] = scale_shape(shape, kwh, geo, vclass, sc.year)
        result.diagnostics.extend(diag.report_lines(f"mhdv {vclass.value}"))
        result.diagnostics.append(f"mhdv {vclass.value} interconnection_kwh={total:.6f}")


def _run_nonroad(cfg: RunConfig, inputs: Inputs, sc: ScenarioKey, result: ScenarioResult):
    for vclass in NONROAD_CLASSES:
        total = inputs.energy.interconnection_total(sc.year, sc.pathway, vclass)
        result.inputs_kwh[vclass] = total
        if total <= 0:
            continue
        if inputs.activity is None:
            raise ConfigurationError(f"{vclass.value} energy present but no inputs.nonroad_activity")
        shares = ba_shares(inputs.activity, vclass)
        table = AllocationTable({WESTERN_INTERCONNECTION.code: sorted(shares.items())})
        for ba, kwh in allocate(total, table, WESTERN_INTERCONNECTION.code).items():
            result.profiles[(ba, vclass)] = constant_profile(kwh, sc.year, GeoId.ba(ba), vclass)
        result.diagnostics.append(f"nonroad {vclass.value} interconnection_kwh={total:.6f}")


def run_scenario(cfg: RunConfig, sc: ScenarioKey, classes=None, threads: int = 1,
                 inputs: Inputs | None = None) -> ScenarioResult:
    classes = tuple(classes or cfg.classes)
    inputs = inputs or Inputs.load(cfg)
    result = ScenarioResult(sc, classes)
    result.diagnostics.append(f"scenario={sc}")
    if inputs.ldv_county is None:
        result.diagnostics.append("note county EV shares held fixed across years")
    if "ldv" in classes:
        _run_ldv(cfg, inputs, sc, result, threads)
    if "mhdv" in classes:
        _run_mhdv(cfg, inputs, sc, result, threads)
    if "nonroad" in classes:
        _run_nonroad(cfg, inputs, sc, result)
    return result


def _timestamps(year: int) -> list[str]:
    return list(pd.date_range(f"{year}-01-01", periods=hours_in_year(year), freq="h", tz="UTC").strftime(TIME_FORMAT))


def _write_frame(df: pd.DataFrame, path: Path):
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_scenario(result: ScenarioResult, out_dir: Path, system_load: Path | None = None) -> list[Path]:
    """Write per-class and combined profile files for one scenario."""
    sc = result.scenario
    d = Path(out_dir) / sc.slug
    d.mkdir(parents=True, exist_ok=True)
    stamps = _timestamps(sc.year)
    written = []
    vclasses = result.vclasses()
    overall = {vc: np.zeros(len(stamps)) for vc in vclasses}
    for ba in result.bas():
        cols = {"timestamp_utc": stamps}
        for vc in vclasses:
            if (ba, vc) not in result.profiles:
                continue
            values = result.profiles[(ba, vc)].values
            path = d / f"{ba}_{vc.value}.csv"
            _write_frame(pd.DataFrame({"timestamp_utc": stamps, "load_kw": values}), path)
            written.append(path)
            cols[vc.value] = values
            overall[vc] += values
        cols["total"] = result.ba_total(ba).values
        path = d / f"{ba}_combined.csv"
        _write_frame(pd.DataFrame(cols), path)
        written.append(path)
    cols = {"timestamp_utc": stamps, **{vc.value: v for vc, v in overall.items()}}
    cols["total"] = np.sum(list(overall.values()), axis=0) if overall else np.zeros(len(stamps))
    path = d / "interconnection_total.csv"
    _write_frame(pd.DataFrame(cols), path)
    written.append(path)

    if result.rejects:
        path = d / "mobility_rejects.csv"
        write_rejects(result.rejects, path)
        written.append(path)

    if system_load is not None:
        system = read_system_load(system_load, sc.year)
        rows = []
        for ba in result.bas():
            if ba not in system:
                result.diagnostics.append(f"metrics skipped ba={ba} (no system load)")
                continue
            row = metrics_row(BaLoadPair(GeoId.ba(ba), result.ba_total(ba), system[ba], sc))
            if row.peaks_coincide:
                result.diagnostics.append(f"metrics ba={ba} transportation and system peaks coincide")
            rows.append(row)
        path = d / "metrics.csv"
        write_metrics(rows, path, f"{sc.year}-01-01T00:00:00Z")
        written.append(path)

    path = d / "diagnostics.txt"
    path.write_text("\n".join(result.diagnostics) + "\n")
    written.append(path)
    return written


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(cfg: RunConfig, out_dir: Path, files, scenarios, classes) -> Path:
    out_dir = Path(out_dir)
    manifest = {
        "config_sha256": cfg.digest,
        "seed": cfg.seed,
        "scenarios": [str(s) for s in scenarios],
        "classes": list(classes),
        "versions": {
            "evgridload": __version__,
            "numpy": np.__version__,
            "pandas": pd.__version__,
            "python": platform.python_version(),
        },
        "files": [{"path": p.relative_to(out_dir).as_posix(), "sha256": _sha256(p)} for p in sorted(files)],
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def run(cfg: RunConfig, scenarios=None, classes=None, threads: int = 1, out_dir=None) -> Path:
    """Run every scenario, write outputs, and write the manifest last."""
    scenarios = list(scenarios or cfg.scenarios)
    if not scenarios:
        raise ConfigurationError("no scenarios to run")
    classes = tuple(classes or cfg.classes)
    out_dir = Path(out_dir or cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    inputs = Inputs.load(cfg)
    files = []
    for sc in scenarios:
        try:
            result = run_scenario(cfg, sc, classes, threads, inputs)
            files += write_scenario(result, out_dir, for_climate(cfg.system_load, sc.climate.value))
        except DataError as exc:
            raise type(exc)(f"scenario {sc}: {exc}") from exc
    return write_manifest(cfg, out_dir, files, scenarios, classes)


def validate(cfg: RunConfig) -> list[str]:
    """Every problem found in the configured inputs; empty when clean.

    Missing files raise FileNotFoundError rather than being listed.
    """
    for path in cfg.input_files():
        if not Path(path).is_file():
            raise FileNotFoundError(f"input file not found: {path}")
    problems = []
    try:
        inputs = Inputs.load(cfg)
    except DataError as exc:
        return [str(exc)]
    if inputs.county_allocation is not None:
        problems += [f"county_allocation {v}" for v in validate_allocation(inputs.county_allocation)]
        unmapped = sorted(set(inputs.county_allocation.children()) - set(inputs.ba_map.weights))
        problems += [f"county_allocation county {c} has no BA mapping" for c in unmapped]
    problems += [f"county_ba_map {v}" for v in inputs.ba_map.validate()]
    if inputs.activity is not None:
        problems += [f"nonroad_activity {vc.value} has no activity" for vc in NONROAD_CLASSES
                     if inputs.activity.total(vc) <= 0]
    known = cfg.mhdv.known_mdv_ba_shares
    problems += [f"mhdv known share for unmapped BA {ba}" for ba in known if ba not in inputs.ba_map.bas()]
    for sc in cfg.scenarios:
        if "ldv" in cfg.classes:
            path = for_climate(cfg.temperature, sc.climate.value)
            if path is None:
                problems.append(f"scenario {sc}: no temperature input")
                continue
            temps = read_temperatures(path, sc.year)
            counties = sorted(_county_ldv_energy(cfg, inputs, sc))
            n_days = hours_in_year(sc.year) // 24
            for fips in counties:
                have = len(temps.get(fips, {}))
                if have < n_days:
                    problems.append(f"scenario {sc}: county {fips} has {have} of {n_days} temperature days")
    return problems
