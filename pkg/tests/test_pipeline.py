import json
import math

import numpy as np
import pandas as pd
import pytest
import yaml

from evgridload.config import load_config, parse_classes
from evgridload.core import ConfigurationError, ScenarioKey, UsageError, VehicleClass, hours_in_year
from evgridload.downscale import AnnualEnergyTable
from evgridload.pipeline import run, run_scenario, validate

SC = ScenarioKey.parse("2035:NZ:rcp45cooler")


def edit_config(path, **changes):
    raw = yaml.safe_load(path.read_text())
    for key, value in changes.items():
        section, _, name = key.partition("__")
        if name:
            raw.setdefault(section, {})[name] = value
        else:
            raw[section] = value
    path.write_text(yaml.safe_dump(raw, sort_keys=False))
    return path


class TestConfig:
    def test_loads_bundle(self, bundle):
        cfg = load_config(bundle)
        assert cfg.scenarios == [SC] and cfg.seed == 20240101
        assert cfg.output_dir == bundle.parent / "out"
        assert len(cfg.digest) == 64

    def test_seed_required(self, fresh_bundle):
        raw = yaml.safe_load(fresh_bundle.read_text())
        del raw["seed"]
        fresh_bundle.write_text(yaml.safe_dump(raw))
        with pytest.raises(ConfigurationError, match="seed"):
            load_config(fresh_bundle)
        assert load_config(fresh_bundle, seed=3).seed == 3

    def test_bad_mix(self, fresh_bundle):
        edit_config(fresh_bundle, mhdv__strategy_mix={"immediate": 0.5, "delayed": 0.1, "min_power": 0.5})
        with pytest.raises(ConfigurationError):
            load_config(fresh_bundle)

    def test_unknown_key(self, fresh_bundle):
        edit_config(fresh_bundle, ldv__colour="blue")
        with pytest.raises(ConfigurationError, match="colour"):
            load_config(fresh_bundle)

    def test_output_env_override(self, bundle, monkeypatch, tmp_path):
        monkeypatch.setenv("EVGRIDLOAD_OUTPUT_DIR", str(tmp_path / "env"))
        assert load_config(bundle).output_dir == tmp_path / "env"
        assert load_config(bundle, output_dir=tmp_path / "flag").output_dir == tmp_path / "flag"

    def test_parse_classes(self):
        assert parse_classes("nonroad,ldv") == ("ldv", "nonroad")
        with pytest.raises(UsageError):
            parse_classes("ldv,bikes")


class TestValidate:
    def test_clean(self, bundle):
        assert validate(load_config(bundle)) == []

    def test_allocation_sum(self, fresh_bundle):
        path = fresh_bundle.parent / "county_allocation.csv"
        path.write_text(path.read_text().replace("0.3", "0.4"))
        problems = validate(load_config(fresh_bundle))
        assert any("CA" in p and "1.1" in p for p in problems)

    def test_missing_temperature_file(self, fresh_bundle):
        (fresh_bundle.parent / "temperature_rcp45cooler.csv").unlink()
        with pytest.raises(FileNotFoundError, match="temperature_rcp45cooler.csv"):
            validate(load_config(fresh_bundle))

    def test_short_temperature_record(self, fresh_bundle):
        path = fresh_bundle.parent / "temperature_rcp45cooler.csv"
        lines = path.read_text().splitlines()
        path.write_text("\n".join(line for line in lines if "2035-02-03" not in line) + "\n")
        problems = validate(load_config(fresh_bundle))
        assert len(problems) == 4 and "364 of 365" in problems[0]


class TestConservation:
    def test_every_class(self, bundle):
        cfg = load_config(bundle)
        result = run_scenario(cfg, SC, threads=2)
        energy = AnnualEnergyTable.from_csv(bundle.parent / "annual_energy.csv")
        for vclass in VehicleClass:
            expected = energy.interconnection_total(2035, "NZ", vclass)
            got = math.fsum(p.energy_kwh for (ba, vc), p in result.profiles.items() if vc is vclass)
            assert got == pytest.approx(expected, rel=1e-6), vclass
        for profile in result.profiles.values():
            assert len(profile) == hours_in_year(2035)

    def test_ldv_only_leaves_other_classes_out(self, bundle):
        result = run_scenario(load_config(bundle), SC, classes=("ldv",))
        assert result.vclasses() == [VehicleClass.LDV]


@pytest.fixture(scope="module")
def outputs(bundle, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    manifest = run(load_config(bundle, output_dir=out), threads=1)
    return out, json.loads(manifest.read_text())


class TestRunOutputs:
    def test_files(self, outputs):
        out, _ = outputs
        d = out / SC.slug
        for name in ("CISO_LDV.csv", "LDWP_HDV.csv", "BPAT_Rail.csv", "CISO_combined.csv", "metrics.csv",
                     "diagnostics.txt", "interconnection_total.csv"):
            assert (d / name).is_file(), name
        per_class = pd.read_csv(d / "BPAT_MDV.csv")
        assert list(per_class.columns) == ["timestamp_utc", "load_kw"] and len(per_class) == 8760
        assert per_class["timestamp_utc"].iloc[0] == "2035-01-01T00:00:00Z"

    def test_combined_is_sum_of_classes(self, outputs):
        out, _ = outputs
        combined = pd.read_csv(out / SC.slug / "CISO_combined.csv")
        classes = [c for c in combined.columns if c not in ("timestamp_utc", "total")]
        assert set(classes) == {"LDV", "MDV", "HDV", "Rail", "Aviation", "Ship"}
        assert np.allclose(combined[classes].sum(axis=1), combined["total"], rtol=1e-10)
        for vc in classes:
            single = pd.read_csv(out / SC.slug / f"CISO_{vc}.csv")["load_kw"]
            assert np.allclose(single, combined[vc], rtol=1e-11)

    def test_manifest_complete(self, outputs):
        out, manifest = outputs
        listed = {f["path"] for f in manifest["files"]}
        on_disk = {str(p.relative_to(out)) for p in out.rglob("*") if p.is_file() and p.name != "manifest.json"}
        assert listed == on_disk
        assert manifest["seed"] == 20240101 and len(manifest["config_sha256"]) == 64
        assert "numpy" in manifest["versions"]
        assert all(len(f["sha256"]) == 64 for f in manifest["files"])

    def test_metrics_file(self, outputs):
        out, _ = outputs
        metrics = pd.read_csv(out / SC.slug / "metrics.csv")
        assert sorted(metrics["ba_code"]) == ["BPAT", "CISO", "LDWP"]
        assert metrics[["m1", "m2", "m3"]].apply(lambda c: c.between(0, 1)).all().all()


def test_nonroad_only_flat_one_kw(fresh_bundle, tmp_path):
    d = fresh_bundle.parent
    pd.DataFrame([dict(state="CA", year=2035, pathway="NZ", vclass="Rail", energy=8760, unit="kWh")]).to_csv(
        d / "annual_energy.csv", index=False)
    pd.DataFrame([("06037", "CISO", 0, 50.0, 0), ("53033", "BPAT", 0, 0.0, 0)],
                 columns=["county_fips", "ba_code", "enplanements", "rail_route_miles", "shipping_docks"]
                 ).to_csv(d / "nonroad_activity.csv", index=False)
    run(load_config(fresh_bundle, output_dir=tmp_path / "out"), classes=("nonroad",))
    rail = pd.read_csv(tmp_path / "out" / SC.slug / "CISO_Rail.csv")
    assert np.all(rail["load_kw"] == 1.0)
    assert not (tmp_path / "out" / SC.slug / "CISO_LDV.csv").exists()


def test_mobility_file_feeds_mdv(fresh_bundle, tmp_path):
    rows = ["vid,start_ts,end_ts,distance_total"]
    for month in range(1, 13):
        for v in range(4):
            rows.append(f"v{v},2035-{month:02d}-0{v + 1}T0{6 + v}:00:00,2035-{month:02d}-0{v + 1}T1{v}:30:00,{40 + 10 * v}")
    rows.append("late,2035-03-05T20:00:00,2035-03-06T01:15:00,90")
    rows.append("bad,not-a-time,2035-03-06T01:15:00,90")
    (fresh_bundle.parent / "trips.csv").write_text("\n".join(rows) + "\n")
    edit_config(fresh_bundle, inputs__mobility=[{"path": "trips.csv", "vclass": "MDV"}])
    cfg = load_config(fresh_bundle, output_dir=tmp_path / "out")
    run(cfg, classes=("mhdv",))
    d = tmp_path / "out" / SC.slug
    rejects = pd.read_csv(d / "mobility_rejects.csv")
    assert list(rejects["vid"]) == ["bad", "late"]
    assert rejects["reason"].iloc[1] == "returns after midnight"
    energy = AnnualEnergyTable.from_csv(fresh_bundle.parent / "annual_energy.csv")
    got = math.fsum(pd.read_csv(p)["load_kw"].sum() for p in d.glob("*_MDV.csv"))
    assert got == pytest.approx(energy.interconnection_total(2035, "NZ", VehicleClass.MDV), rel=1e-9)
