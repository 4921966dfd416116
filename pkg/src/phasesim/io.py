"""
CSV / JSON serialization of histograms, densities, sweeps and run summaries.

Floats are written with ``repr`` so every file parses back to the exact
values that produced it.  Angles are stored as multiples of pi.
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .distributions import PhaseDensity, PhaseGrid
from .simulate import PhaseHistogram, SweepRow

HIST_COLUMNS = ("bin_center_over_pi", "count", "probability", "density")
DENSITY_COLUMNS = ("phi_over_pi", "density")
SWEEP_COLUMNS = ("N", "width1", "width2", "predicted1", "predicted2")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_table(path, columns, rows, fmt="csv"):
    path = Path(path)
    if fmt == "json":
        table = {c: [_jsonable(r[i]) for r in rows] for i, c in enumerate(columns)}
        path.write_text(json.dumps(table, indent=2) + "\n")
        return path
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return path


def _read_table(path, columns):
    path = Path(path)
    if path.suffix == ".json":
        table = json.loads(path.read_text())
        missing = set(columns) - set(table)
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        return {c: np.array([math.nan if v is None else v for v in table[c]], dtype=float) for c in columns}
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != tuple(columns):
        raise ValueError(f"{path}: expected header {','.join(columns)}")
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(columns))
    return {c: data[:, i] for i, c in enumerate(columns)}


def _jsonable(x):
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else None


def write_histogram(hist: PhaseHistogram, path, fmt="csv"):
    rows = zip(hist.centers / np.pi, hist.counts, hist.probabilities, hist.density)
    return _write_table(path, HIST_COLUMNS, list(rows), fmt)


def read_histogram(path) -> PhaseHistogram:
    t = _read_table(path, HIST_COLUMNS)
    hist = PhaseHistogram(t["count"].astype(np.int64))
    if not np.allclose(hist.centers / np.pi, t["bin_center_over_pi"], rtol=0, atol=1e-12):
        raise ValueError(f"{path}: bin centres do not form a uniform (-pi, pi] binning")
    return hist


def write_density(density: PhaseDensity, path, fmt="csv"):
    rows = zip(density.phi / np.pi, density.values)
    return _write_table(path, DENSITY_COLUMNS, list(rows), fmt)


def read_density(path) -> PhaseDensity:
    t = _read_table(path, DENSITY_COLUMNS)
    grid = PhaseGrid(len(t["density"]))
    if not np.allclose(grid.centers / np.pi, t["phi_over_pi"], rtol=0, atol=1e-12):
        raise ValueError(f"{path}: angles do not match a uniform phase grid")
    return PhaseDensity(grid, t["density"])


def write_sweep(rows, path, fmt="csv"):
    return _write_table(path, SWEEP_COLUMNS, [(r.N, r.width1, r.width2, r.predicted1, r.predicted2) for r in rows], fmt)


def read_sweep(path) -> list:
    t = _read_table(path, SWEEP_COLUMNS)
    return [SweepRow(*(float(t[c][i]) for c in SWEEP_COLUMNS)) for i in range(len(t["N"]))]


def write_summary(summary: dict, path):
    path = Path(path)

    def clean(obj):
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [clean(v) for v in obj]
        if isinstance(obj, (float, np.floating, int, np.integer)) and not isinstance(obj, bool):
            return _jsonable(obj)
        return obj

    path.write_text(json.dumps(clean(summary), indent=2, sort_keys=True) + "\n")
    return path
