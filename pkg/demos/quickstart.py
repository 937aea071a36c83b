"""Write the bundled sample inputs, run every class, and summarise the results.

Run from anywhere:  python demos/quickstart.py [workdir]
"""

import sys
import tempfile
from pathlib import Path

import pandas as pd

from evgridload.config import load_config
from evgridload.pipeline import run, validate
from evgridload.sample_data import write_sample_bundle

work = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="evgridload-"))
cfg_path = write_sample_bundle(work / "bundle", pathways=("BAU", "NZ"))
cfg = load_config(cfg_path)

problems = validate(cfg)
print(f"inputs in {cfg_path.parent}: {len(problems)} violations")

manifest = run(cfg, threads=2)
print(f"manifest: {manifest}")

for scenario_dir in sorted(p for p in cfg.output_dir.iterdir() if p.is_dir()):
    metrics = pd.read_csv(scenario_dir / "metrics.csv")
    print(f"\n{scenario_dir.name}")
    for path in sorted(scenario_dir.glob("*_combined.csv")):
        combined = pd.read_csv(path)
        peak = combined["total"].idxmax()
        print(f"  {path.stem.split('_')[0]:5s} annual {combined['total'].sum() / 1e6:8.1f} GWh"
              f"  peak {combined['total'].max() / 1e3:7.1f} MW at {combined['timestamp_utc'][peak]}")
    print(metrics[["ba_code", "m1", "m2", "m3"]].to_string(index=False))
