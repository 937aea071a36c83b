"""Run configuration: one YAML file with a section per pipeline stage."""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .core import ConfigurationError, ScenarioKey, UsageError, VehicleClass
from .depotsim import ChargerMix, StrategyMix, UnitEnergyUse
from .ldv import AdoptionSchedule
from .mobility import VOCATIONS

OUTPUT_DIR_ENV = "EVGRIDLOAD_OUTPUT_DIR"

CLASS_GROUPS = ("ldv", "mhdv", "nonroad")

DEFAULT_VOCATION_CLASSES = {
    "delivery_van": "MDV",
    "delivery_truck": "MDV",
    "school_bus": "MDV",
    "bucket_truck": "MDV",
    "transit_bus": "HDV",
    "tractor": "HDV",
    "refuse_truck": "HDV",
}


@dataclass
class LdvSettings:
    mj_per_vkm: float = 0.70
    avg_annual_km: float = 18000.0
    home_preference: float = 0.60
    home_access: float = 0.75
    home_power_kw: float = 7.2
    work_power_kw: float = 7.2
    base_kwh_per_day: float = 9.6
    weekend_factor: float = 0.90
    adoption: AdoptionSchedule = field(default_factory=AdoptionSchedule)
    min_simulated_vehicles: int = 1000
    max_simulated_vehicles: int = 20000
    county_utc_offsets: dict = field(default_factory=dict)


@dataclass
class MhdvSettings:
    strategy_mix: StrategyMix = field(default_factory=lambda: StrategyMix(0.4, 0.1, 0.5))
    charger_mix: ChargerMix = field(
        default_factory=lambda: ChargerMix.from_powers({50: 0.05, 125: 0.05, 250: 0.10, 350: 0.40, 500: 0.40})
    )
    unit_energy: UnitEnergyUse = field(default_factory=UnitEnergyUse)
    fleet_size: int = 100
    n_samples: int = 20
    known_mdv_ba_shares: dict = field(default_factory=dict)
    vocations: dict = field(default_factory=lambda: dict(DEFAULT_VOCATION_CLASSES))
    synthetic_vehicles_per_vocation: int = 50
    synthetic_days_per_month: int = 4


@dataclass
class RunConfig:
    path: Path
    digest: str
    seed: int
    output_dir: Path
    scenarios: list[ScenarioKey]
    classes: tuple[str, ...]
    utc_offset_hours: int
    annual_energy: Path
    county_allocation: Path | None
    county_ba_map: Path
    temperature: dict[str, Path]
    nonroad_activity: Path | None
    system_load: dict[str, Path]
    mobility: list[tuple[Path, VehicleClass]]
    ldv_county: Path | None
    ldv: LdvSettings
    mhdv: MhdvSettings

    def input_files(self) -> list[Path]:
        files = [self.annual_energy, self.county_ba_map]
        files += [p for p in (self.county_allocation, self.nonroad_activity, self.ldv_county) if p is not None]
        files += list(self.temperature.values()) + list(self.system_load.values())
        files += [p for p, _ in self.mobility]
        return files


def parse_classes(text: str | list | tuple) -> tuple[str, ...]:
    items = text.split(",") if isinstance(text, str) else list(text)
    out = []
    for item in items:
        item = str(item).strip().lower()
        if not item:
            continue
        if item not in CLASS_GROUPS:
            raise UsageError(f"unknown class group {item!r}; expected some of {', '.join(CLASS_GROUPS)}")
        if item not in out:
            out.append(item)
    if not out:
        raise UsageError("no class groups selected")
    return tuple(sorted(out, key=CLASS_GROUPS.index))


def _section(raw: dict, name: str) -> dict:
    value = raw.get(name) or {}
    if not isinstance(value, dict):
        raise ConfigurationError(f"section {name!r} must be a mapping")
    return value


def _build(cls, values: dict, section: str):
    known = set(cls.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ConfigurationError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"[{section}]: {exc}") from None


def _ldv_settings(raw: dict) -> LdvSettings:
    values = dict(raw)
    if "adoption" in values:
        values["adoption"] = AdoptionSchedule({int(k): float(v) for k, v in values["adoption"].items()})
    if "county_utc_offsets" in values:
        values["county_utc_offsets"] = {f"{int(k):05d}": int(v) for k, v in values["county_utc_offsets"].items()}
    return _build(LdvSettings, values, "ldv")


def _mhdv_settings(raw: dict) -> MhdvSettings:
    values = dict(raw)
    if "strategy_mix" in values:
        sm = values["strategy_mix"]
        values["strategy_mix"] = StrategyMix(
            float(sm.get("immediate", 0.0)), float(sm.get("delayed", 0.0)), float(sm.get("min_power", 0.0))
        )
    if "charger_mix" in values:
        values["charger_mix"] = ChargerMix.from_powers({float(k): float(v) for k, v in values["charger_mix"].items()})
    if "unit_energy_kwh_per_mile" in values:
        ue = values.pop("unit_energy_kwh_per_mile")
        values["unit_energy"] = UnitEnergyUse(float(ue.get("MDV", 1.2)), float(ue.get("HDV", 2.0)))
    if "vocations" in values:
        vocations = {}
        for voc, vc in values["vocations"].items():
            if voc not in VOCATIONS:
                raise ConfigurationError(f"unknown vocation {voc!r}")
            vclass = VehicleClass.parse(vc)
            if vclass not in (VehicleClass.MDV, VehicleClass.HDV):
                raise ConfigurationError(f"vocation {voc} must map to MDV or HDV")
            vocations[voc] = vclass.value
        values["vocations"] = vocations
    settings = _build(MhdvSettings, values, "mhdv")
    if settings.fleet_size < 1 or settings.n_samples < 1:
        raise ConfigurationError("[mhdv] fleet_size and n_samples must be at least 1")
    return settings


def _paths(base: Path, value) -> dict[str, Path]:
    if value is None:
        return {}
    if isinstance(value, (str, os.PathLike)):
        return {"*": base / value}
    return {str(k): base / v for k, v in value.items()}


def load_config(path, seed: int | None = None, output_dir=None) -> RunConfig:
    """Parse and check a run configuration.

    Relative input paths resolve against the config file's directory. The
    output directory comes from ``output_dir``, else the environment
    override, else the file.
    """
    path = Path(path)
    data = path.read_bytes()
    try:
        raw = yaml.safe_load(data) or {}
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    base = path.parent
    inputs = _section(raw, "inputs")

    if seed is None:
        if "seed" not in raw:
            raise ConfigurationError(f"{path}: a seed is required")
        seed = raw["seed"]
    try:
        seed = int(seed)
    except (TypeError, ValueError):
        raise ConfigurationError(f"seed {seed!r} is not an integer") from None

    out = output_dir or os.environ.get(OUTPUT_DIR_ENV) or raw.get("output_dir")
    if not out:
        raise ConfigurationError(f"{path}: no output_dir")
    out = Path(out)
    if not out.is_absolute() and output_dir is None and not os.environ.get(OUTPUT_DIR_ENV):
        out = base / out

    scenarios = []
    for text in raw.get("scenarios") or []:
        try:
            scenarios.append(ScenarioKey.parse(str(text)))
        except UsageError as exc:
            raise ConfigurationError(str(exc)) from None

    for key in ("annual_energy", "county_ba_map"):
        if key not in inputs:
            raise ConfigurationError(f"{path}: inputs.{key} is required")
    if "county_allocation" not in inputs and "ldv_county" not in inputs:
        raise ConfigurationError(f"{path}: inputs.county_allocation or inputs.ldv_county is required")

    mobility = []
    for item in inputs.get("mobility") or []:
        mobility.append((base / item["path"], VehicleClass.parse(item.get("vclass", "MDV"))))

    classes = parse_classes(raw.get("classes", CLASS_GROUPS))
    try:
        utc_offset = int(raw.get("utc_offset_hours", 0))
    except (TypeError, ValueError):
        raise ConfigurationError("utc_offset_hours must be an integer") from None

    cfg = RunConfig(
        path=path,
        digest=hashlib.sha256(data).hexdigest(),
        seed=seed,
        output_dir=out,
        scenarios=scenarios,
        classes=classes,
        utc_offset_hours=utc_offset,
        annual_energy=base / inputs["annual_energy"],
        county_allocation=base / inputs["county_allocation"] if "county_allocation" in inputs else None,
        county_ba_map=base / inputs["county_ba_map"],
        temperature=_paths(base, inputs.get("temperature")),
        nonroad_activity=base / inputs["nonroad_activity"] if "nonroad_activity" in inputs else None,
        system_load=_paths(base, inputs.get("system_load")),
        mobility=mobility,
        ldv_county=base / inputs["ldv_county"] if "ldv_county" in inputs else None,
        ldv=_ldv_settings(_section(raw, "ldv")),
        mhdv=_mhdv_settings(_section(raw, "mhdv")),
    )
    return cfg


def for_climate(paths: dict[str, Path], climate: str) -> Path | None:
    """Pick the per-climate input, falling back to a climate-independent one."""
    return paths.get(climate, paths.get("*"))
