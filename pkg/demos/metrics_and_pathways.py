"""Grid-impact metrics for two adoption pathways, using the command-line entry point."""

import sys
import tempfile
from pathlib import Path

from evgridload.cli import main
from evgridload.sample_data import write_sample_bundle

work = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="evgridload-"))
cfg = write_sample_bundle(work / "bundle", pathways=("BAU", "NZ"))
out = work / "out"

main(["run", "--config", str(cfg), "--out", str(out)])
nz, bau = out / "2035_NZ_rcp45cooler", out / "2035_BAU_rcp45cooler"
main(["metrics", "--run-dir", str(nz), "--system-load", str(cfg.parent / "system_load.csv"),
      "--compare", str(bau)])
main(["chart", str(nz / "CISO_combined.csv"), "--day-average-by-month", "--out", str(work / "ciso.svg")])
print(f"chart written to {work / 'ciso.svg'}")
