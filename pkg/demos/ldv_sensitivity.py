"""How temperature, day type and load leveling move a county's LDV charging day."""

from evgridload.core import GeoId
from evgridload.ldv import LdvFleetSpec, estimate_fleet_size, synthesize_county_day

vehicles = estimate_fleet_size(0.3, 2.0, 15_000)
spec = LdvFleetSpec(GeoId.county("06037"), vehicles)
print(f"0.3 PJ at 2 MJ/vkm and 15000 km per year -> {vehicles} vehicles")

base = synthesize_county_day(spec, 20.0, "weekday", 0.3, seed=1)
print(f"\nweekday at 20 C: {base.sum():,.0f} kWh, peak {base.max():,.0f} kW at hour {int(base.argmax())}")

print("\ntemperature   energy vs 20 C")
for temp in (-10.0, 0.0, 10.0, 30.0, 40.0):
    day = synthesize_county_day(spec, temp, "weekday", 0.3, seed=1)
    print(f"{temp:8.0f} C   {day.sum() / base.sum():.3f}")

weekend = synthesize_county_day(spec, 20.0, "weekend", 0.3, seed=1)
print(f"\nweekend / weekday energy: {weekend.sum() / base.sum():.3f}")

print("\nload_level share   peak kW")
for share in (0.0, 0.3, 0.7, 1.0):
    day = synthesize_county_day(spec, 20.0, "weekday", share, seed=1)
    print(f"{share:16.1f}   {day.max():8,.0f}")
