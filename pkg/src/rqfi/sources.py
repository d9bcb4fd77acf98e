"""Source-state families and their photon statistics on the image plane.

Every family here is diagonal (in the number basis, or for two-mode
squeezed vacuum in a squeezed number basis) in the symmetric/antisymmetric
image modes, so its image state is described by a joint distribution
``p[n, m]`` over the photon numbers of the two modes.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy import stats

from .beamsplitter import SIGNS, ImagingSystem, loss_rate, transmissivities
from .errors import CutoffOverflow, UnphysicalState, UnsupportedBasis
from .psf import OverlapFunctionals

TAIL_TARGET = 1e-10
MAX_CUTOFF = 4096
FD_STEP = 1e-5  # in units of x_R


@dataclass(frozen=True)
class Thermal:
    """Two independent thermal sources with ``N`` mean photons each."""

    N: float

    def __post_init__(self):
        if not self.N >= 0:
            raise ValueError(f"N must be >= 0, got {self.N}")

    family = "thermal"

    @property
    def total_photons(self) -> float:
        return 2 * self.N

    def mode_photons(self) -> tuple[float, float]:
        return self.N, self.N


@dataclass(frozen=True)
class FockPM:
    """Fock state with ``N_plus`` photons in the symmetric and ``N_minus`` in the
    antisymmetric combination of the two source modes."""

    N_plus: int
    N_minus: int

    def __post_init__(self):
        for v in (self.N_plus, self.N_minus):
            if int(v) != v or v < 0:
                raise ValueError(f"Fock photon numbers must be non-negative integers, got {v}")

    family = "fock"

    @property
    def total_photons(self) -> float:
        return float(self.N_plus + self.N_minus)

    def mode_photons(self) -> tuple[float, float]:
        return float(self.N_plus), float(self.N_minus)


@dataclass(frozen=True)
class Tmsv:
    """Two-mode squeezed vacuum ``exp[xi (c1^+ c2^+ - c1 c2)] |0>``."""

    xi: float

    def __post_init__(self):
        if not self.xi >= 0:
            raise ValueError(f"xi must be >= 0, got {self.xi}")

    family = "tmsv"

    @property
    def total_photons(self) -> float:
        return 2 * math.sinh(self.xi) ** 2

    def mode_photons(self) -> tuple[float, float]:
        n = math.sinh(self.xi) ** 2
        return n, n


@dataclass(frozen=True)
class CorrThermal:
    """Correlated thermal sources: ``N`` photons each, correlation ``w N``."""

    N: float
    w: float

    def __post_init__(self):
        if not self.N >= 0:
            raise ValueError(f"N must be >= 0, got {self.N}")
        if not abs(self.w) <= 1:
            raise UnphysicalState(f"|w| = {abs(self.w)} > 1 is not a physical covariance")

    family = "corr-thermal"

    @property
    def total_photons(self) -> float:
        return 2 * self.N

    def mode_photons(self) -> tuple[float, float]:
        return (1 + self.w) * self.N, (1 - self.w) * self.N


SourceSpec = Union[Thermal, FockPM, Tmsv, CorrThermal]


def source_params(source: SourceSpec) -> str:
    """Compact ``key=value`` description used in CSV output."""
    if isinstance(source, FockPM):
        return f"N_plus={source.N_plus};N_minus={source.N_minus}"
    if isinstance(source, Tmsv):
        return f"xi={source.xi:g}"
    if isinstance(source, CorrThermal):
        return f"N={source.N:g};w={source.w:g}"
    return f"N={source.N:g}"


# -- two-mode squeezed vacuum on the image plane ---------------------------------


@dataclass(frozen=True)
class TmsvImageParams:
    """Each image mode is a squeezed thermal state with occupation ``T`` and
    squeezing ``r``; derivatives are with respect to the separation."""

    T_plus: float
    T_minus: float
    r_plus: float
    r_minus: float
    dT_plus_ds: float
    dT_minus_ds: float
    dr_plus_ds: float
    dr_minus_ds: float

    def T(self, sign: int) -> float:
        return self.T_plus if sign > 0 else self.T_minus

    def dT(self, sign: int) -> float:
        return self.dT_plus_ds if sign > 0 else self.dT_minus_ds

    def dr(self, sign: int) -> float:
        return self.dr_plus_ds if sign > 0 else self.dr_minus_ds


def _squeezed_thermal(t: float, xi: float) -> tuple[float, float, float, float, float]:
    """T, r, dT/dt, dr/dt and sqrt(Q) for a squeezed vacuum sent through loss ``t``."""
    sh2 = math.sinh(xi) ** 2
    u = 4 * t * (1 - t) * sh2
    root = math.sqrt(1 + u)  # = 2T + 1
    T = u / (2 * (root + 1))
    S = math.sinh(2 * xi)
    z = t * S / root
    r = 0.5 * math.asinh(z)
    dQ = (4 * t - 2) * (1 - math.cosh(2 * xi))
    dT = dQ / (4 * root)
    dz = S / root - t * S * dQ / (2 * root**3)
    dr = 0.5 * dz / math.sqrt(1 + z * z)
    return T, r, dT, dr, root


def tmsv_image_params(xi: float, system: ImagingSystem, s: float,
                      fn: OverlapFunctionals | None = None) -> TmsvImageParams:
    if xi < 0:
        raise ValueError(f"xi must be >= 0, got {xi}")
    fn = fn or system.functionals(s)
    vals = {}
    for sign, t in zip(SIGNS, transmissivities(system, fn)):
        T, r, dT, dr, _ = _squeezed_thermal(t, xi)
        deta = sign * system.eta * fn.gamma
        vals[sign] = (T, r, dT * deta, dr * deta)
    return TmsvImageParams(vals[1][0], vals[-1][0], vals[1][1], vals[-1][1],
                           vals[1][2], vals[-1][2], vals[1][3], vals[-1][3])


def tmsv_occupation_term(xi: float, system: ImagingSystem, fn: OverlapFunctionals,
                         sign: int) -> float:
    """``(dT/ds)^2 / (T (T + 1))`` with its finite limit where ``T -> 0``.

    Rewritten as ``eta g (1 - 2 eta_pm)^2 sinh^2(xi) / (2T + 1)^2`` where
    ``g`` is :func:`~rqfi.beamsplitter.loss_rate`, which carries the s -> 0 limit.
    """
    if xi == 0:
        return 0.0
    t = transmissivities(system, fn)[0 if sign > 0 else 1]
    _, _, _, _, root = _squeezed_thermal(t, xi)
    g = loss_rate(system, fn, sign)
    return system.eta * g * (1 - 2 * t) ** 2 * math.sinh(xi) ** 2 / root**2


# -- image-plane distributions ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class ImageDistribution:
    """Joint photon-number distribution of the (+, -) image modes.

    ``basis`` is ``"number"`` or, for two-mode squeezed vacuum, ``"squeezed"``
    (the distribution refers to squeezed Fock states, not bare Fock states).
    """

    p: np.ndarray
    s: float
    tail_mass: float
    basis: str = "number"

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "m", "p"])
            for (n, m), v in np.ndenumerate(self.p):
                w.writerow([n, m, repr(float(v))])


def _geometric(mean: float) -> tuple[np.ndarray, float]:
    if mean <= 0:
        return np.array([1.0]), 0.0
    q = mean / (mean + 1)
    n = math.ceil(10 * (mean + 1))
    while q ** (n + 1) >= TAIL_TARGET / 2:
        n *= 2
        if n > MAX_CUTOFF:
            raise CutoffOverflow(f"geometric law with mean {mean} needs more than {MAX_CUTOFF} levels")
    k = np.arange(n + 1)
    return (1 - q) * q**k, q ** (n + 1)


def _binomial(n: int, t: float) -> tuple[np.ndarray, float]:
    return stats.binom.pmf(np.arange(n + 1), n, t), 0.0


def _marginals(source: SourceSpec, system: ImagingSystem, fn: OverlapFunctionals):
    eta_pm = transmissivities(system, fn)
    if isinstance(source, FockPM):
        return [_binomial(n, t) for n, t in zip((source.N_plus, source.N_minus), eta_pm)]
    if isinstance(source, Tmsv):
        T = tmsv_image_params(source.xi, system, fn.s, fn)
        return [_geometric(T.T_plus), _geometric(T.T_minus)]
    return [_geometric(t * n) for t, n in zip(eta_pm, source.mode_photons())]


def image_distribution(source: SourceSpec, system: ImagingSystem, s: float,
                       basis: str | None = None) -> ImageDistribution:
    """Photon-number distribution of the two image modes at separation ``s``."""
    natural = "squeezed" if isinstance(source, Tmsv) else "number"
    if basis is not None and basis != natural:
        raise UnsupportedBasis(
            f"{source.family} statistics are only available in the {natural} basis"
        )
    fn = system.functionals(s)
    (pp, tp), (pm, tm) = _marginals(source, system, fn)
    tail = 1 - (1 - tp) * (1 - tm)
    return ImageDistribution(np.outer(pp, pm), s, tail, natural)


# -- classical part of the QFI -----------------------------------------------------


def _closed_moment(source: SourceSpec, system: ImagingSystem, fn: OverlapFunctionals) -> float:
    eta = system.eta
    if isinstance(source, FockPM):
        return sum(eta * n * loss_rate(system, fn, k)
                   for k, n in zip(SIGNS, source.mode_photons()))
    if isinstance(source, Tmsv):
        return sum(tmsv_occupation_term(source.xi, system, fn, k) for k in SIGNS)
    # thermal families: (dM/ds)^2 / (M (M + 1)) with M = eta_pm N_pm
    total = 0.0
    for k, n in zip(SIGNS, source.mode_photons()):
        x = eta * n
        total += x * fn.gamma_sq_over(k) / (1 + fn.one_pm_delta(k) * x)
    return total


def _numeric_moment(source: SourceSpec, system: ImagingSystem, s: float) -> float:
    h = FD_STEP * system.x_r
    if s < h:
        raise ValueError(f"finite-difference moment needs s >= {h}")
    lo = image_distribution(source, system, s - h).p
    mid = image_distribution(source, system, s).p
    hi = image_distribution(source, system, s + h).p
    n = min(lo.shape[0], mid.shape[0], hi.shape[0])
    m = min(lo.shape[1], mid.shape[1], hi.shape[1])
    dp = (hi[:n, :m] - lo[:n, :m]) / (2 * h)
    p = mid[:n, :m]
    mask = p > 0
    return float(np.sum(dp[mask] ** 2 / p[mask]))


def log_derivative_moment(source: SourceSpec, system: ImagingSystem, s: float,
                          method: str = "closed") -> float:
    """``sum_nm p_nm (d log p_nm / ds)^2``, the classical Fisher information of
    the image photon statistics.

    ``method="numeric"`` differentiates :func:`image_distribution` by central
    differences (step ``1e-5 x_R``) instead of using the closed forms.
    """
    if method == "numeric":
        return _numeric_moment(source, system, s)
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    return _closed_moment(source, system, system.functionals(s))
