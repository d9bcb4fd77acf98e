"""Parity photon counting and a maximum-likelihood estimator of the separation.

Photons are counted in the even and odd image modes.  For a Fock source
``|N_+, N_->`` the even count is Binomial(N_+, eta_+) and the odd count is
Binomial(N_-, eta_-), independently.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .beamsplitter import SIGNS, ImagingSystem, loss_rate, transmissivities
from .errors import FlatLikelihood, UnsupportedState
from .sources import FockPM

GRID_POINTS = 400
GRID_RANGE = (0.05, 6.0)  # in units of x_R
FLAT_TOL = 1e-12
MIN_REPEATS = 100


@dataclass(frozen=True)
class CountSample:
    n_even: int
    n_odd: int


@dataclass(frozen=True)
class Grid:
    s_min: float
    s_max: float
    points: int = GRID_POINTS
    geometric: bool = True

    def values(self) -> np.ndarray:
        if self.geometric:
            return np.geomspace(self.s_min, self.s_max, self.points)
        return np.linspace(self.s_min, self.s_max, self.points)


def default_grid(x_r: float = 1.0) -> Grid:
    return Grid(GRID_RANGE[0] * x_r, GRID_RANGE[1] * x_r)


def _require_fock(source) -> FockPM:
    if not isinstance(source, FockPM):
        raise UnsupportedState("parity counting is modelled for Fock sources only")
    return source


def parity_fisher_information(source: FockPM, system: ImagingSystem, s: float) -> float:
    """Classical Fisher information of the even/odd photon counts."""
    _require_fock(source)
    fn = system.functionals(s)
    return sum(system.eta * n * loss_rate(system, fn, k)
               for k, n in zip(SIGNS, source.mode_photons()))


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for ``(seed, stream)``; streams are independent."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


def sample_counts(source: FockPM, system: ImagingSystem, s: float, shots: int,
                  seed: int, stream: int = 0) -> np.ndarray:
    """``shots x 2`` integer array of (n_even, n_odd) counts."""
    _require_fock(source)
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    eta_p, eta_m = transmissivities(system, system.functionals(s))
    rng = rng_for(seed, stream)
    even = rng.binomial(source.N_plus, min(eta_p, 1.0), size=shots)
    odd = rng.binomial(source.N_minus, min(eta_m, 1.0), size=shots)
    return np.column_stack([even, odd]).astype(np.int64)


def as_samples(counts: np.ndarray) -> list[CountSample]:
    return [CountSample(int(a), int(b)) for a, b in counts]


def write_samples_csv(path: str | Path, counts: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["shot", "n_even", "n_odd"])
        for i, (a, b) in enumerate(counts):
            w.writerow([i, int(a), int(b)])


def chi_square_check(counts: np.ndarray, source: FockPM, system: ImagingSystem, s: float):
    """Pearson test of the joint count frequencies against the binomial model."""
    eta_p, eta_m = transmissivities(system, system.functionals(s))
    pe = stats.binom.pmf(np.arange(source.N_plus + 1), source.N_plus, eta_p)
    po = stats.binom.pmf(np.arange(source.N_minus + 1), source.N_minus, eta_m)
    expected = np.outer(pe, po).ravel() * len(counts)
    observed = np.zeros_like(expected)
    np.add.at(observed, counts[:, 0] * (source.N_minus + 1) + counts[:, 1], 1)
    mask = expected > 0
    return stats.chisquare(observed[mask], expected[mask] * observed.sum() / expected[mask].sum())


def _grid_model(source: FockPM, system: ImagingSystem, grid: np.ndarray):
    eta = np.array([transmissivities(system, system.functionals(s)) for s in grid])
    return eta[:, 0], eta[:, 1]


def _log_likelihood(counts: np.ndarray, source: FockPM, eta_p, eta_m) -> np.ndarray:
    # sufficient statistics: total even and odd photons over all shots
    shots = len(counts)
    ke, ko = counts[:, 0].sum(), counts[:, 1].sum()
    ll = np.zeros_like(eta_p)
    for k, n, t in ((ke, source.N_plus, eta_p), (ko, source.N_minus, eta_m)):
        if n == 0:
            continue
        ll = ll + stats.binom.logpmf(k, shots * n, np.clip(t, 0.0, 1.0))
    return ll


def _refine(x: np.ndarray, y: np.ndarray, i: int) -> float:
    if i == 0 or i == len(x) - 1:
        return float(x[i])
    x0, x1, x2 = x[i - 1: i + 2]
    y0, y1, y2 = y[i - 1: i + 2]
    num = (x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)
    den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
    if den == 0 or not np.isfinite(den):
        return float(x1)
    return float(np.clip(x1 - 0.5 * num / den, x0, x2))


def ml_estimate(counts: np.ndarray, source: FockPM, system: ImagingSystem,
                grid: Grid | None = None, _model=None) -> float:
    """Grid maximum likelihood with one parabolic refinement step.

    Ties go to the smaller separation.  Raises :class:`FlatLikelihood` when
    the data cannot tell the grid points apart.
    """
    _require_fock(source)
    grid = grid or default_grid(system.x_r)
    s = grid.values()
    eta_p, eta_m = _model if _model is not None else _grid_model(source, system, s)
    ll = _log_likelihood(np.asarray(counts), source, eta_p, eta_m)
    finite = ll[np.isfinite(ll)]
    if finite.size == 0 or finite.max() - finite.min() < FLAT_TOL:
        raise FlatLikelihood("log-likelihood is flat over the search grid; widen or move the grid")
    i = int(np.argmax(np.where(np.isfinite(ll), ll, -np.inf)))
    return _refine(s, ll, i)


@dataclass
class EstimatorRun:
    true_s: float
    shots: int
    seed: int
    estimates: list[float] = field(default_factory=list)
    empirical_variance: float = 0.0
    crb_classical: float = 0.0
    fisher_information: float = 0.0

    @property
    def variance_ratio(self) -> float:
        return self.empirical_variance / self.crb_classical

    def to_json(self) -> str:
        data = asdict(self)
        data["variance_ratio"] = self.variance_ratio
        return json.dumps(data, indent=2, sort_keys=True)


def crb_benchmark(source: FockPM, system: ImagingSystem, true_s: float, shots: int,
                  repeats: int, seed: int, grid: Grid | None = None) -> EstimatorRun:
    """Repeat the estimation ``repeats`` times, each on its own random stream,
    and compare the spread with ``1 / (shots F_s)``."""
    _require_fock(source)
    if repeats < MIN_REPEATS:
        raise ValueError(f"repeats must be >= {MIN_REPEATS}, got {repeats}")
    grid = grid or default_grid(system.x_r)
    model = _grid_model(source, system, grid.values())
    estimates = [
        ml_estimate(sample_counts(source, system, true_s, shots, seed, stream=r),
                    source, system, grid, _model=model)
        for r in range(repeats)
    ]
    F = parity_fisher_information(source, system, true_s)
    crb = 1 / (shots * F) if F > 0 else math.inf
    var = float(np.var(estimates, ddof=1))
    return EstimatorRun(true_s, shots, seed, estimates, var, crb, F)
