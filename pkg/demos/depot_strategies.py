"""Compare the three depot charging strategies on one synthetic transit-bus day.

Energy delivered is the same for every strategy; only its timing changes.
"""

from datetime import date

import numpy as np

from evgridload.depotsim import (
    ChargerSpec,
    dwell_needs,
    simulate_delayed,
    simulate_immediate,
    simulate_min_power,
)
from evgridload.mobility import SyntheticFleetConfig, generate_synthetic_fleet

buses = generate_synthetic_fleet(SyntheticFleetConfig.for_vocation("transit_bus", 1, 100), [date(2035, 5, 3)])
charger = ChargerSpec(125.0)

totals = {}
for name, simulate in (("immediate", simulate_immediate), ("delayed", simulate_delayed),
                       ("min_power", simulate_min_power)):
    hourly, delivered, short = np.zeros(24), 0.0, 0.0
    for bus in buses:
        res = simulate(bus, charger, dwell_needs(bus, 2.0))
        hourly += res.hourly
        delivered += res.delivered_kwh
        short += res.shortfall_kwh
    totals[name] = hourly
    print(f"{name:10s} delivered {delivered:9.0f} kWh  shortfall {short:7.0f} kWh"
          f"  peak {hourly.max():7.0f} kW at hour {int(hourly.argmax()):2d}")

print("\nhour  " + "  ".join(f"{n:>10s}" for n in totals))
for h in range(24):
    print(f"{h:4d}  " + "  ".join(f"{totals[n][h]:10.0f}" for n in totals))
