"""
Write the synthetic 3-channel dataset
=====================================

Mixed sines plus linear trends plus Gaussian noise, saved as
data/synthetic.csv for configs/synthetic.json.
"""

# %%
import csv
import sys
from pathlib import Path

from xlinear.bench import synth_multichannel

out = Path(sys.argv[1] if len(sys.argv) > 1 else "data/synthetic.csv")
out.parent.mkdir(parents=True, exist_ok=True)
values = synth_multichannel(3000, noise_sigma=0.1, seed=0)
with out.open("w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["date", "s0", "s1", "s2"])
    for i, row in enumerate(values):
        w.writerow([f"t{i:05d}"] + [repr(float(v)) for v in row])
print(f"wrote {len(values)} rows to {out}")
