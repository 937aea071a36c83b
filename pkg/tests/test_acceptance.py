"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import math
import time
from datetime import date
from pathlib import Path

import numpy as np
import pytest
from oracles import (
    delivered_kwh,
    exhaustive_metrics,
    minutes_to_hourly,
    random_vehicle_days,
    recharge_minutes,
    relative_rms,
)

from evgridload.cli import main
from evgridload.config import load_config
from evgridload.core import GeoId, ScenarioKey, VehicleClass
from evgridload.depotsim import (
    DEFAULT_CHARGER_MIX,
    DEFAULT_STRATEGY_MIX,
    ChargerSpec,
    FleetSampleConfig,
    aggregate_fleet_day,
    build_yearly_shape,
    dwell_needs,
    simulate_delayed,
    simulate_immediate,
    simulate_min_power,
)
from evgridload.downscale import AnnualEnergyTable, normalize_profile, scale_shape
from evgridload.ldv import LdvFleetSpec, estimate_fleet_size, synthesize_county_day, temperature_energy_factor
from evgridload.metrics import m1, m2, m3
from evgridload.mobility import SyntheticFleetConfig, generate_synthetic_fleet
from evgridload.pipeline import run_scenario
from evgridload.sample_data import write_sample_bundle

SIMULATORS = {"immediate": simulate_immediate, "delayed": simulate_delayed, "min_power": simulate_min_power}
COUNTY = GeoId.county("06037")


@pytest.fixture()
def verdict(capsys):
    """Print one PASS/FAIL line straight to the terminal, then assert."""

    def report(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'} {title}: {detail}")
        assert ok, f"criterion {number}: {detail}"

    return report


@pytest.fixture(scope="module")
def vehicle_days():
    return random_vehicle_days(1000, seed=2024)


def test_01_scheduler_matches_minute_oracle(vehicle_days, verdict):
    t0 = time.perf_counter()
    ours = [
        {name: sim(sched, ChargerSpec(power), needs).hourly for name, sim in SIMULATORS.items()}
        for sched, needs, power in vehicle_days
    ]
    elapsed = time.perf_counter() - t0
    worst = 0.0
    for (sched, needs, power), hourly in zip(vehicle_days, ours):
        for name in SIMULATORS:
            ref = minutes_to_hourly(recharge_minutes(sched.dwell_windows(), needs, power, name))
            worst = max(worst, float(np.max(np.abs(hourly[name] - ref))))
    verdict(1, "scheduler vs minute oracle", worst <= 1e-9 and elapsed < 10.0,
            f"max |diff| {worst:.2e} kWh per hour over 3000 runs, simulation {elapsed:.2f} s")


def test_02_energy_parity_and_peak_dominance(vehicle_days, verdict):
    feasible = 0
    parity_worst = 0.0
    dominated = 0
    for sched, needs, power in vehicle_days:
        runs = {name: sim(sched, ChargerSpec(power), needs) for name, sim in SIMULATORS.items()}
        if not all(r.feasible for r in runs.values()):
            continue
        feasible += 1
        energies = [r.trace.sum() / 60.0 for r in runs.values()] + [r.delivered_kwh for r in runs.values()]
        assert runs["immediate"].delivered_kwh == pytest.approx(delivered_kwh(sched.dwell_windows(), needs, power))
        parity_worst = max(parity_worst, max(energies) - min(energies))
        peak = {name: r.trace.max() for name, r in runs.items()}
        if peak["min_power"] <= peak["immediate"] and peak["min_power"] <= peak["delayed"]:
            dominated += 1
    ok = parity_worst <= 1e-9 and dominated == feasible and feasible > 500
    verdict(2, "energy parity and min-power peak dominance", ok,
            f"{feasible} feasible days, energy spread {parity_worst:.2e} kWh, "
            f"min-power lowest peak in {dominated}/{feasible}")


def test_03_delayed_vs_min_power_peak(verdict):
    buses = generate_synthetic_fleet(SyntheticFleetConfig.for_vocation("transit_bus", 3, 100), [date(2035, 5, 3)])
    rng = np.random.default_rng(0)
    picks = rng.choice(len(DEFAULT_CHARGER_MIX.chargers), size=len(buses), p=DEFAULT_CHARGER_MIX.weights)
    delayed = np.zeros(24)
    flat = np.zeros(24)
    for sched, pick in zip(buses, picks):
        charger = DEFAULT_CHARGER_MIX.chargers[pick]
        needs = dwell_needs(sched, 2.0)
        delayed += simulate_delayed(sched, charger, needs).hourly
        flat += simulate_min_power(sched, charger, needs).hourly
    ratio = delayed.max() / flat.max()
    verdict(3, "delayed peak >= 2x min-power peak (100 transit buses)", ratio >= 2.0,
            f"delayed {delayed.max():.0f} kW, min-power {flat.max():.0f} kW, ratio {ratio:.2f}")


def test_04_mix_linearity(verdict):
    pool = []
    for vocation in ("delivery_truck", "transit_bus", "refuse_truck", "school_bus"):
        pool += generate_synthetic_fleet(SyntheticFleetConfig.for_vocation(vocation, 17, 50), [date(2035, 5, 3)])
    fleet_size, n_samples, kwh_per_mile = 500, 200, 2.0
    mix, chargers = DEFAULT_STRATEGY_MIX, DEFAULT_CHARGER_MIX
    assert tuple(mix.weights) == (0.4, 0.1, 0.5)
    expected = np.zeros(24)
    for sched in pool:
        needs = dwell_needs(sched, kwh_per_mile)
        for sw, name in zip(mix.weights, ("immediate", "delayed", "min_power")):
            for charger, cw in zip(chargers.chargers, chargers.weights):
                ref = recharge_minutes(sched.dwell_windows(), needs, charger.power_kw, name)
                expected += sw * cw * minutes_to_hourly(ref)
    expected *= fleet_size / len(pool)
    got = aggregate_fleet_day(pool, mix, chargers, kwh_per_mile, FleetSampleConfig(fleet_size, n_samples, seed=11))
    err = relative_rms(got, expected)
    verdict(4, "mix {0.4, 0.1, 0.5} vs per-vehicle expectation", err < 0.02,
            f"relative RMS {err:.4f} at fleet_size {fleet_size}, n_samples {n_samples}")


def test_05_temperature_factors(verdict):
    table = [temperature_energy_factor(t) for t in (-10, 0, 20, 40)]
    spec = LdvFleetSpec(COUNTY, 10_000)
    warm = synthesize_county_day(spec, 20.0, "weekday", 0.3, seed=5).sum()
    hot = synthesize_county_day(spec, 40.0, "weekday", 0.3, seed=5).sum()
    ratio = hot / warm
    ok = table == [1.28, 1.21, 1.00, 1.36] and abs(ratio / 1.36 - 1) < 0.01
    verdict(5, "temperature factor table", ok, f"factors {table}, 40C/20C daily energy {ratio:.4f}")


def test_06_weekend_effect(verdict):
    spec = LdvFleetSpec(COUNTY, 10_000)
    weekday = synthesize_county_day(spec, 20.0, "weekday", 0.3, seed=6).sum()
    weekend = synthesize_county_day(spec, 20.0, "weekend", 0.3, seed=6).sum()
    ratio = weekend / weekday
    verdict(6, "weekend / weekday energy", abs(ratio / 0.90 - 1) < 0.01, f"ratio {ratio:.4f}")


def test_07_ldv_peak_shaving(verdict):
    spec = LdvFleetSpec(COUNTY, 10_000)
    mixed = synthesize_county_day(spec, 20.0, "weekday", 0.7, seed=7).max()
    immediate = synthesize_county_day(spec, 20.0, "weekday", 0.0, seed=7).max()
    verdict(7, "70/30 load_level/min_delay peak below min_delay-only peak", mixed < immediate,
            f"{mixed:.0f} kW vs {immediate:.0f} kW ({1 - mixed / immediate:.0%} lower)")


def test_08_end_to_end_conservation(tmp_path, verdict):
    cfg_path = write_sample_bundle(tmp_path / "bundle", mhdv_ej=1.0, ldv_pj=0.5, nonroad_pj=0.1)
    cfg = load_config(cfg_path)
    t0 = time.perf_counter()
    result = run_scenario(cfg, ScenarioKey.parse("2035:NZ:rcp45cooler"))
    elapsed = time.perf_counter() - t0
    energy = AnnualEnergyTable.from_csv(cfg_path.parent / "annual_energy.csv")
    assert len(result.bas()) == 3 and len(energy.frame["state"].unique()) == 2
    worst = 0.0
    for vclass in VehicleClass:
        expected = energy.interconnection_total(2035, "NZ", vclass)
        got = math.fsum(p.energy_kwh for (_, vc), p in result.profiles.items() if vc is vclass)
        worst = max(worst, abs(got - expected) / expected)
    verdict(8, "end-to-end energy conservation", worst <= 1e-6 and elapsed < 60.0,
            f"worst relative error {worst:.2e} over 6 classes, pipeline {elapsed:.1f} s")


def test_09_normalized_shape_contract(verdict):
    rng = np.random.default_rng(9)
    worst_sum = worst_trip = 0.0
    for year in range(2020, 2051):
        days = rng.random((12, 24)) * rng.choice([1e-3, 1.0, 1e6])
        days[rng.random((12, 24)) < 0.3] = 0.0
        shape = build_yearly_shape(days, year)
        worst_sum = max(worst_sum, abs(shape.values.sum() - 1.0))
        energy = float(rng.uniform(1, 1e15))
        profile = scale_shape(shape, energy, GeoId.ba("CISO"), None, year)
        again = scale_shape(normalize_profile(profile), energy, GeoId.ba("CISO"), None, year)
        worst_trip = max(worst_trip, abs(profile.energy_kwh - energy) / energy,
                         abs(again.energy_kwh - energy) / energy)
    verdict(9, "normalized shapes sum to 1 and scale round-trips", worst_sum <= 1e-9 and worst_trip <= 1e-9,
            f"max |sum - 1| {worst_sum:.1e}, max energy error {worst_trip:.1e}")


def test_10_metrics_brute_force(verdict):
    rng = np.random.default_rng(10)
    mismatches = scale_failures = 0
    for _ in range(500):
        # values on a lattice of multiples of 10 so alpha * x is exact for alpha in {0.1, 1, 10}
        t = rng.integers(0, 10_000, 48).astype(float) * 10
        s = rng.integers(1, 10_000, 48).astype(float) * 10
        ref = exhaustive_metrics(t, s)[:3]
        ours = (m1(t, s), m2(t, s), m3(t, s))
        mismatches += ours != ref
        for alpha in (0.1, 1.0, 10.0):
            scale_failures += (m1(alpha * t, alpha * s), m2(alpha * t, alpha * s), m3(alpha * t, alpha * s)) != ours
    verdict(10, "metrics vs exhaustive scan, scale invariance", mismatches == 0 and scale_failures == 0,
            f"{mismatches} oracle mismatches in 500 pairs, {scale_failures} scale-invariance failures in 1500")


def _tree(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_11_determinism_across_threads(tmp_path, verdict):
    cfg = write_sample_bundle(tmp_path / "bundle", climates=("rcp45cooler", "rcp85hotter"))
    base = ["run", "--config", str(cfg), "--seed", "77"]
    codes = (main(base + ["--out", str(tmp_path / "a"), "--threads", "1"]),
             main(base + ["--out", str(tmp_path / "b"), "--threads", "4"]))
    a, b = _tree(tmp_path / "a"), _tree(tmp_path / "b")
    differing = sorted(k for k in a.keys() | b.keys() if a.get(k) != b.get(k))
    verdict(11, "byte-identical outputs for 1 and 4 threads", codes == (0, 0) and a and not differing,
            f"{len(a)} files compared, {len(differing)} differ")


def test_12_monte_carlo_stability(verdict):
    pool = []
    for vocation in ("delivery_van", "delivery_truck", "transit_bus", "tractor"):
        pool += generate_synthetic_fleet(SyntheticFleetConfig.for_vocation(vocation, 12, 50), [date(2035, 8, 2)])
    args = (pool, DEFAULT_STRATEGY_MIX, DEFAULT_CHARGER_MIX, 1.2)
    fifty = aggregate_fleet_day(*args, FleetSampleConfig(200, 50, seed=12))
    hundred = aggregate_fleet_day(*args, FleetSampleConfig(200, 100, seed=12))
    err = relative_rms(hundred, fifty)
    verdict(12, "n_samples 50 -> 100 at fleet_size 200", err < 0.05, f"relative RMS change {err:.4f}")


def test_13_fleet_size_formula(verdict):
    base = estimate_fleet_size(1, 2, 15_000)
    linear = all(estimate_fleet_size(3 * k, 2, 15_000) == 100_000 * k for k in range(0, 31))
    linear &= all(estimate_fleet_size(0.03 * k, 2, 15_000) == 1_000 * k for k in range(0, 31))
    verdict(13, "fleet size formula", base == 33_333 and linear, f"1 PJ, 2 MJ/vkm, 15000 km -> {base} vehicles")
