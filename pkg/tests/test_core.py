import math
from datetime import datetime, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evgridload.core import (
    ConfigurationError,
    EnergyQuantity,
    GeoId,
    GeoLevel,
    HourlyProfile,
    NormalizedShape,
    ScenarioKey,
    ShapeError,
    UsageError,
    VehicleClass,
    combine_profiles,
    convert_energy,
    hours_in_year,
    peak_stats,
    rng_for,
)

BA = GeoId.ba("CISO")


def flat(kw, n=24):
    return HourlyProfile.for_year(BA, None, 2035, np.full(n, float(kw)))


class TestEnergy:
    def test_ej_to_gwh(self):
        assert convert_energy(EnergyQuantity(1, "EJ"), "GWh").magnitude == pytest.approx(277777.7777777778, rel=1e-12)

    def test_kwh_definition(self):
        assert convert_energy(EnergyQuantity(3.6, "MJ"), "kWh").magnitude == pytest.approx(1.0, rel=1e-15)

    def test_zero(self):
        assert convert_energy(EnergyQuantity(0, "PJ"), "kWh").magnitude == 0.0

    def test_ej_is_thousand_pj(self):
        assert EnergyQuantity(1, "EJ").to("PJ").magnitude == pytest.approx(1000.0, rel=1e-15)

    def test_unsupported_unit(self):
        with pytest.raises(ConfigurationError):
            convert_energy(EnergyQuantity(1, "PJ"), "BTU")
        with pytest.raises(ConfigurationError):
            EnergyQuantity(1, "therm")

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            EnergyQuantity(-1, "PJ")

    @given(st.one_of(st.just(0.0), st.floats(1e-100, 1e12)), st.sampled_from(["EJ", "PJ", "GWh", "MWh", "kWh", "MJ"]),
           st.sampled_from(["EJ", "PJ", "GWh", "MWh", "kWh", "MJ"]))
    def test_round_trip(self, value, a, b):
        back = EnergyQuantity(value, a).to(b).to(a).magnitude
        assert back == pytest.approx(value, rel=1e-12, abs=0)


class TestGeoAndScenario:
    def test_county_zero_pads(self):
        assert GeoId.county(6037).code == "06037"

    def test_bad_codes(self):
        with pytest.raises(ConfigurationError):
            GeoId(GeoLevel.STATE, "California")
        with pytest.raises(ConfigurationError):
            GeoId(GeoLevel.BA, "")

    def test_scenario_parse_and_slug(self):
        sc = ScenarioKey.parse("2035:NZ:rcp45cooler")
        assert sc.year == 2035 and sc.slug == "2035_NZ_rcp45cooler"
        assert str(sc) == "2035:NZ:rcp45cooler"

    @pytest.mark.parametrize("text", ["2033:NZ:rcp45cooler", "2035:XX:rcp45cooler", "2035:NZ", "abc"])
    def test_scenario_parse_errors(self, text):
        with pytest.raises(UsageError):
            ScenarioKey.parse(text)

    def test_vehicle_class_parse(self):
        assert VehicleClass.parse("hdv") is VehicleClass.HDV
        assert VehicleClass.parse("Aviation") is VehicleClass.AVIATION


class TestProfiles:
    def test_hours_in_year(self):
        assert hours_in_year(2035) == 8760 and hours_in_year(2040) == 8784

    def test_length_checked(self):
        with pytest.raises(ShapeError):
            HourlyProfile.for_year(BA, None, 2035, np.ones(100))
        assert len(HourlyProfile.for_year(BA, None, 2040, np.ones(8784))) == 8784

    def test_negative_rejected(self):
        with pytest.raises(ShapeError):
            flat(-1.0)

    def test_values_read_only(self):
        p = flat(1.0)
        with pytest.raises(ValueError):
            p.values[0] = 5.0

    def test_start_is_utc(self):
        assert flat(1.0).start == datetime(2035, 1, 1, tzinfo=timezone.utc)

    def test_normalized_shape_sum(self):
        NormalizedShape(np.full(4, 0.25))
        with pytest.raises(ShapeError):
            NormalizedShape(np.full(4, 0.3))


class TestCombine:
    def test_identity(self):
        p = HourlyProfile.for_year(BA, None, 2035, np.arange(24.0))
        assert np.array_equal(combine_profiles([p], [1.0]).values, p.values)

    def test_idempotent_mix_of_equals(self):
        p = HourlyProfile.for_year(BA, None, 2035, np.arange(24.0))
        assert np.array_equal(combine_profiles([p, p], [0.5, 0.5]).values, p.values)

    def test_linear_flat(self):
        out = combine_profiles([flat(1.0), flat(3.0)], [0.25, 0.75])
        assert np.allclose(out.values, 2.5, rtol=0, atol=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            combine_profiles([flat(1.0), flat(1.0)], [1.0])
        with pytest.raises(ShapeError):
            combine_profiles([flat(1.0), flat(1.0, 8760)], [0.5, 0.5])

    @settings(max_examples=50)
    @given(st.lists(st.lists(st.floats(0, 1e3), min_size=24, max_size=24), min_size=1, max_size=5), st.data())
    def test_convex_peak_bound_and_linearity(self, rows, data):
        profiles = [HourlyProfile.for_year(BA, None, 2035, np.array(r)) for r in rows]
        raw = data.draw(st.lists(st.floats(0.01, 1.0), min_size=len(rows), max_size=len(rows)))
        w = np.array(raw) / sum(raw)
        out = combine_profiles(profiles, w)
        assert out.values.max() <= max(p.values.max() for p in profiles) * (1 + 1e-12) + 1e-12
        doubled = combine_profiles(profiles, 2 * w)
        assert np.allclose(doubled.values, 2 * out.values, rtol=1e-12, atol=1e-9)

    @settings(max_examples=30)
    @given(st.lists(st.floats(0.1, 10), min_size=2, max_size=4))
    def test_energy_preserved_for_equal_energy_components(self, raw):
        rng = np.random.default_rng(len(raw))
        profiles = []
        for _ in raw:
            v = rng.random(24)
            profiles.append(HourlyProfile.for_year(BA, None, 2035, v / v.sum() * 100.0))
        w = np.array(raw) / sum(raw)
        assert combine_profiles(profiles, w).energy_kwh == pytest.approx(100.0, rel=1e-12)


class TestPeakStats:
    def test_flat_year(self):
        ps = peak_stats(flat(5.0, 8760))
        assert (ps.peak_kw, ps.peak_hour_index, ps.variation_kw) == (5.0, 0, 0.0)

    def test_small(self):
        ps = peak_stats([0, 2, 1])
        assert (ps.peak_kw, ps.peak_hour_index, ps.variation_kw) == (2.0, 1, 2.0)

    def test_ramp(self):
        ps = peak_stats(np.arange(24.0))
        assert (ps.peak_kw, ps.peak_hour_index, ps.variation_kw) == (23.0, 23, 23.0)

    def test_empty(self):
        with pytest.raises(ShapeError):
            peak_stats([])


def test_rng_streams_keyed_not_sequential():
    a = rng_for(7, "x", 1).random(3)
    rng_for(7, "y", 2).random(100)
    b = rng_for(7, "x", 1).random(3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, rng_for(8, "x", 1).random(3))
    assert math.isfinite(a.sum())
