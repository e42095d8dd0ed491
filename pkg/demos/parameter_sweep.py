"""
Sweeping parameters
===================

Run the differentiator over a grid of settings, write one CSV per point and
read the index back.  The same sweep is available as ``sihd-bench sweep``.
"""

import csv
import tempfile
from pathlib import Path

from sihd.bench import sweep

out = Path(tempfile.mkdtemp(prefix="sihd-sweep-"))

# a Cartesian grid: every alpha with every noise level
index = sweep({"alpha": [0.9, 0.95], "eta0": [0.0, 1e-6]}, "diff", out / "grid", base={"duration": 5.0}, workers=2)
with open(index) as fh:
    for row in csv.DictReader(fh):
        print("alpha=%s eta0=%-6s e1=%.2e e2=%.2e  %s" % (row["alpha"], row["eta0"], float(row["mean_abs_e1"]), float(row["mean_abs_e2"]), row["file"]))

# explicit points for settings that move together: shrink h while holding mu*h
points = [{"h": h, "mu": 1e-3 / h} for h in (1e-2, 1e-3, 1e-4)]
index = sweep(points, "diff", out / "steps", base={"duration": 3.0})
with open(index) as fh:
    for row in csv.DictReader(fh):
        h = float(row["h"])
        ratio = float(row["mean_abs_e2"]) / float(row["mean_abs_e1"])
        print("h=%-7s e2/e1 = %9.1f   h*e2/e1 = %.3f" % (row["h"], ratio, ratio * h))

print("records in", out)
