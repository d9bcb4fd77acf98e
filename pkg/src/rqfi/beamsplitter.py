"""Beam-splitter picture of the imaging system and the ultimate QFI bound.

The symmetric and antisymmetric combinations of the two source modes are
attenuated independently, with transmissivities ``eta_pm = (1 +/- delta) eta``.
Estimating the separation then amounts to estimating the rotation angles
``theta_pm = arccos(sqrt(eta_pm))`` of two beam splitters whose output modes
also drift (the ``eps_pm^2`` terms).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateAngle, EtaOutOfRange
from .psf import OverlapFunctionals, PsfModel, functionals, gaussian_psf

SIGNS = (+1, -1)


@dataclass(frozen=True)
class ImagingSystem:
    """Attenuation ``eta`` plus a PSF.  The model needs ``0 < eta <= 1/2``."""

    eta: float
    psf: PsfModel = None

    def __post_init__(self):
        if self.psf is None:
            object.__setattr__(self, "psf", gaussian_psf(1.0))
        if not (0 < self.eta <= 0.5):
            raise EtaOutOfRange(
                f"eta={self.eta}: the two-beam-splitter model is only defined for 0 < eta <= 1/2"
            )

    @property
    def x_r(self) -> float:
        return self.psf.x_r

    def functionals(self, s: float) -> OverlapFunctionals:
        return functionals(self.psf, s)


@dataclass(frozen=True)
class BsParameters:
    s: float
    eta_plus: float
    eta_minus: float
    theta_plus: float
    theta_minus: float
    dtheta_plus_ds: float
    dtheta_minus_ds: float
    omega_plus: float
    omega_minus: float
    f_plus: float
    f_minus: float


def transmissivities(system: ImagingSystem, fn: OverlapFunctionals) -> tuple[float, float]:
    eta = system.eta
    return (1 + fn.delta) * eta, fn.one_minus_delta * eta


def bs_angles(eta_pm: tuple[float, float]) -> tuple[float, float]:
    out = []
    for t in eta_pm:
        if not (0 <= t <= 1):
            raise ValueError(f"transmissivity {t} outside [0, 1]")
        out.append(math.acos(math.sqrt(t)))
    return out[0], out[1]


def loss_rate(system: ImagingSystem, fn: OverlapFunctionals, sign: int) -> float:
    """``gamma^2 / ((1 +/- delta)(1 - (1 +/- delta) eta))``.

    Equals ``4 (d theta_pm / ds)^2 / eta``.  Exact s -> 0 limits are used
    where both numerator and denominator vanish.
    """
    eta = system.eta
    if sign > 0:
        # 1 - (1 + delta) eta written to stay accurate at eta = 1/2
        rest = (1 - 2 * eta) + eta * fn.one_minus_delta
        if rest <= 0:
            # eta = 1/2 and s = 0: gamma^2 / ((1+delta)(1-delta)/2) -> 2 dk2
            return 2 * fn.dk2
        return fn.gamma**2 / ((1 + fn.delta) * rest)
    return fn.gamma_sq_over(-1) / (1 - fn.one_minus_delta * eta)


def dtheta_ds(system: ImagingSystem, fn: OverlapFunctionals) -> tuple[float, float]:
    """``d theta_pm / ds = -/+ eta gamma / (2 sqrt(eta_pm (1 - eta_pm)))``."""
    out = []
    for sign, t in zip(SIGNS, transmissivities(system, fn)):
        if t <= 0 or t >= 1:
            raise DegenerateAngle(f"eta_{'+' if sign > 0 else '-'} = {t}: derivative undefined")
        out.append(-sign * system.eta * fn.gamma / (2 * math.sqrt(t * (1 - t))))
    return out[0], out[1]


def effective_frequencies(system: ImagingSystem, fn: OverlapFunctionals) -> tuple[float, float]:
    out = []
    for sign in SIGNS:
        dtheta_sq = system.eta * loss_rate(system, fn, sign) / 4
        opd = fn.one_pm_delta(sign)
        # at s = 0 the antisymmetric eps^2 vanishes faster than 1 - delta (as s^4 vs s^2)
        drift = fn.eps_sq(sign) / (4 * opd) if opd > 0 else 0.0
        out.append(math.sqrt(dtheta_sq + drift))
    return out[0], out[1]


def f_functions_from(system: ImagingSystem, fn: OverlapFunctionals) -> tuple[float, float]:
    x2 = system.x_r**2
    return tuple(x2 * (fn.eps_sq(k) + loss_rate(system, fn, k)) for k in SIGNS)


def f_functions(system: ImagingSystem, s: float) -> tuple[float, float]:
    """Dimensionless contributions ``(f_+, f_-)`` of the two source modes."""
    return f_functions_from(system, system.functionals(s))


def qfi_upper_bound(system: ImagingSystem, s: float, N: float) -> float:
    """Ultimate QFI for sources emitting ``2N`` mean photons in total."""
    if N < 0:
        raise ValueError(f"mean photon number must be non-negative, got {N}")
    fp, fm = f_functions(system, s)
    return 2 * system.eta * N / system.x_r**2 * max(fp, fm)


def normalized_bound(system: ImagingSystem, s: float) -> float:
    """``x_R^2 QFI_bound / (2 eta N)`` = ``max(f_+, f_-)``."""
    return max(f_functions(system, s))


def bs_parameters(system: ImagingSystem, s: float) -> BsParameters:
    fn = system.functionals(s)
    ep, em = transmissivities(system, fn)
    tp, tm = bs_angles((ep, em))
    try:
        dp, dm = dtheta_ds(system, fn)
    except DegenerateAngle:
        dp, dm = math.nan, math.nan
    wp, wm = effective_frequencies(system, fn)
    fp, fm = f_functions_from(system, fn)
    return BsParameters(s, ep, em, tp, tm, dp, dm, wp, wm, fp, fm)
