"""
Analysing a CSV data set
========================

Runs the structure analysis on the prostate cancer data with gamma = 2, as
the ``analyze`` command would.  Place ``prostate.csv`` in ``data/`` (see
``data/README.md``) or point ``IMSTRUCT_DATA_DIR`` at it.

Command-line equivalent::

    python -m imstruct analyze --data data/prostate.csv --response lpsa \\
        --exclude train --gamma 2 --alpha 0.05 --out out/prostate.json
"""

# %%
import os
import sys
from pathlib import Path

from imstruct import PriorSpec, build_reference_table, confidence_set, load_csv, marginal_complexity_contour
from imstruct import structure_contour

path = Path(os.environ.get("IMSTRUCT_DATA_DIR", Path(__file__).resolve().parents[1] / "data")) / "prostate.csv"
if not path.is_file():
    sys.exit(f"{path} not found; see data/README.md")

covariates = ["lcavol", "lweight", "age", "lbph", "svi", "lcp", "gleason", "pgg45"]
with path.open() as fh:
    header = fh.readline().strip().split(",")
data = load_csv(path, "lpsa", exclude=[c for c in header if c not in covariates + ["lpsa"]]).dataset

# %%
prior = PriorSpec(2.0, data.p)
table = build_reference_table(data.design, prior, B=10_000, master_seed=0)
sc = structure_contour(data, prior, table)
for s, v in confidence_set(sc, 0.05):
    print(f"{v:.3f}  {s.names(data.names)}")
print(marginal_complexity_contour(sc).as_dict())
