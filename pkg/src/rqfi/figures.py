"""Tabulated curves for the standard figures (Gaussian PSF, ``x_R = 1``).

Every table is a header plus rows of floats.  Values are written with
``repr`` so reruns are byte-identical.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .beamsplitter import ImagingSystem, f_functions, normalized_bound
from .qfi import qfi_corr_thermal, qfi_thermal, qfi_tmsv, thermal_semiclassical_normalized

MANIFEST_SCHEMA = "v1"
DEFAULT_GRID = (1e-3, 10.0, 400, True)

BOUND_ETAS = (0.1, 0.4, 0.5)
THERMAL_ETA_N = (0.01, 1.0)
THERMAL_ETA = 0.1
TMSV_CASES = ((0.1, 0.5), (1.0, 0.01), (10.0, 0.1))
CORR_WS = (-0.5, -1.0)
CORR_ETA_N = 1e-4
CORR_ETA = 1e-4


def s_values(lo: float, hi: float, points: int, geometric: bool) -> np.ndarray:
    return np.geomspace(lo, hi, points) if geometric else np.linspace(lo, hi, points)


def fig2(s: np.ndarray) -> tuple[list[str], list[list[float]]]:
    """Normalised ultimate bound ``max(f_+, f_-)``."""
    systems = [ImagingSystem(eta) for eta in BOUND_ETAS]
    header = ["s"] + [f"bound_eta{eta:g}" for eta in BOUND_ETAS]
    return header, [[x] + [normalized_bound(sy, x) for sy in systems] for x in s]


def fig3(s: np.ndarray):
    """Thermal sources, QFI per collected photon."""
    system = ImagingSystem(THERMAL_ETA)
    header = ["s"] + [f"thermal_etaN{x:g}" for x in THERMAL_ETA_N] + ["thermal_semiclassical"]
    rows = []
    for x in s:
        row = [x]
        for etan in THERMAL_ETA_N:
            N = etan / THERMAL_ETA
            row.append(qfi_thermal(N, system, x) / (2 * etan))
        row.append(thermal_semiclassical_normalized(system, x))
        rows.append(row)
    return header, rows


def fig4(s: np.ndarray):
    """Two-mode squeezed vacuum, QFI per photon reaching the image, both variants."""
    header = ["s"]
    for variant in ("squared", "printed"):
        header += [f"{variant}_xi{xi:g}_eta{eta:g}" for xi, eta in TMSV_CASES]
    rows = []
    for x in s:
        row = [x]
        for variant in ("squared_derivative", "as_printed"):
            for xi, eta in TMSV_CASES:
                photons = eta * (math.cosh(2 * xi) - 1)
                row.append(qfi_tmsv(xi, ImagingSystem(eta), x, variant) / photons)
        rows.append(row)
    return header, rows


def fig5(s: np.ndarray):
    """The two per-mode functions ``f_+`` and ``f_-``."""
    systems = [ImagingSystem(eta) for eta in BOUND_ETAS]
    header = ["s"]
    for eta in BOUND_ETAS:
        header += [f"f_plus_eta{eta:g}", f"f_minus_eta{eta:g}"]
    rows = []
    for x in s:
        row = [x]
        for sy in systems:
            row += list(f_functions(sy, x))
        rows.append(row)
    return header, rows


def fig6(s: np.ndarray):
    """Correlated thermal sources in the attenuated regime."""
    system = ImagingSystem(CORR_ETA)
    N = CORR_ETA_N / CORR_ETA
    header = ["s"] + [f"corr_w{w:g}" for w in CORR_WS]
    return header, [[x] + [qfi_corr_thermal(N, w, system, x) / (2 * CORR_ETA_N) for w in CORR_WS]
                    for x in s]


FIGURES: dict[str, Callable] = {"fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6}

FIGURE_PARAMS = {
    "fig2": {"eta": list(BOUND_ETAS), "quantity": "max(f_plus, f_minus)"},
    "fig3": {"eta": THERMAL_ETA, "eta_N": list(THERMAL_ETA_N), "semiclassical": True,
             "quantity": "x_R^2 QFI / (2 eta N)"},
    "fig4": {"cases_xi_eta": [list(c) for c in TMSV_CASES],
             "quantity": "x_R^2 QFI / (eta (cosh 2xi - 1))"},
    "fig5": {"eta": list(BOUND_ETAS), "quantity": "f_plus, f_minus"},
    "fig6": {"eta": CORR_ETA, "eta_N": CORR_ETA_N, "w": list(CORR_WS),
             "quantity": "x_R^2 QFI / (2 eta N)"},
}


def write_table(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


def write_figures(outdir: str | Path, grid=DEFAULT_GRID, mapper=map) -> dict:
    """Write every figure table plus ``manifest.json`` into ``outdir``."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    s = s_values(*grid)
    names = list(FIGURES)
    tables = list(mapper(lambda name: FIGURES[name](s), names))
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "code_version": __version__,
        "psf": {"kind": "gaussian", "x_r": 1.0},
        "s_grid": {"min": grid[0], "max": grid[1], "points": grid[2],
                   "spacing": "geometric" if grid[3] else "linear"},
        "figures": {},
    }
    for name, (header, rows) in zip(names, tables):
        write_table(out / f"{name}.csv", header, rows)
        manifest["figures"][name] = {"file": f"{name}.csv", "columns": header,
                                     "params": FIGURE_PARAMS[name]}
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
