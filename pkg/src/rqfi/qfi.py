"""Closed-form quantum Fisher information for the supported source families."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .beamsplitter import SIGNS, ImagingSystem, loss_rate, qfi_upper_bound
from .errors import UnphysicalState, UnsupportedState, ZeroInformation
from .psf import OverlapFunctionals
from .sources import (
    CorrThermal,
    FockPM,
    SourceSpec,
    Thermal,
    Tmsv,
    log_derivative_moment,
    source_params,
    tmsv_image_params,
    tmsv_occupation_term,
)

TMSV_VARIANTS = ("as_printed", "squared_derivative")


def _drift(fn: OverlapFunctionals) -> float:
    """``dk2 - gamma^2/(2(1+delta)) - gamma^2/(2(1-delta))``, the per-photon
    information left after removing the beam-splitter part."""
    return fn.dk2 - 0.5 * fn.gamma_sq_over(1) - 0.5 * fn.gamma_sq_over(-1)


def qfi_number_diagonal(source: SourceSpec, system: ImagingSystem, s: float) -> float:
    """Classical moment plus ``eta N_pm eps_pm^2`` for number-diagonal images."""
    if not isinstance(source, (Thermal, FockPM)):
        raise UnsupportedState(f"{source.family} is not number-diagonal on the image plane")
    fn = system.functionals(s)
    moment = log_derivative_moment(source, system, s)
    return moment + sum(system.eta * n * fn.eps_sq(k)
                        for k, n in zip(SIGNS, source.mode_photons()))


def qfi_thermal(N: float, system: ImagingSystem, s: float) -> float:
    """Two incoherent thermal sources, ``N`` mean photons each."""
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    fn = system.functionals(s)
    x = system.eta * N
    # (1 + x)^2 - delta^2 x^2 factored so that 1 - delta stays accurate
    denom = (1 + fn.one_minus_delta * x) * (1 + (1 + fn.delta) * x)
    return 2 * x * (fn.dk2 - x * (1 + x) * fn.gamma**2 / denom)


def qfi_thermal_two_term(N: float, system: ImagingSystem, s: float) -> float:
    """Same quantity assembled as classical moment plus residual drift term."""
    fn = system.functionals(s)
    x = system.eta * N
    moment = sum(x * fn.gamma_sq_over(k) / (1 + fn.one_pm_delta(k) * x) for k in SIGNS)
    return moment + 2 * x * _drift(fn)


def thermal_semiclassical_normalized(system: ImagingSystem, s: float) -> float:
    """``x_R^2 QFI / (2 eta N)`` in the limit ``eta N -> infinity``."""
    return system.x_r**2 * _drift(system.functionals(s))


def qfi_fock(N_plus: int, N_minus: int, system: ImagingSystem, s: float) -> float:
    """``eta (N_+ f_+ + N_- f_-) / x_R^2``."""
    fn = system.functionals(s)
    return sum(system.eta * n * (fn.eps_sq(k) + loss_rate(system, fn, k))
               for k, n in zip(SIGNS, (N_plus, N_minus)))


def qfi_tmsv(xi: float, system: ImagingSystem, s: float,
             variant: str = "squared_derivative") -> float:
    """Two-mode squeezed vacuum sources.

    ``variant="as_printed"`` uses the squeezing derivative linearly in the
    last terms; ``"squared_derivative"`` squares it, which is what the Gaussian
    single-mode QFI gives and what the Fock-space oracle confirms.
    """
    if variant not in TMSV_VARIANTS:
        raise ValueError(f"variant must be one of {TMSV_VARIANTS}, got {variant!r}")
    if xi < 0:
        raise ValueError(f"xi must be >= 0, got {xi}")
    if xi == 0:
        return 0.0
    fn = system.functionals(s)
    params = tmsv_image_params(xi, system, s, fn)
    power = 1 if variant == "as_printed" else 2
    total = sum(tmsv_occupation_term(xi, system, fn, k) for k in SIGNS)
    total += system.eta * (math.cosh(2 * xi) - 1) * _drift(fn)
    for k in SIGNS:
        T = params.T(k)
        total += 2 * (2 * T + 1) ** 2 / (2 * T * T + 2 * T + 1) * params.dr(k) ** power
    return total


def qfi_corr_thermal(N: float, w: float, system: ImagingSystem, s: float) -> float:
    """Thermal sources with cross-correlation ``w N``."""
    if abs(w) > 1:
        raise UnphysicalState(f"|w| = {abs(w)} > 1 is not a physical covariance")
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    fn = system.functionals(s)
    total = 0.0
    for k in SIGNS:
        x = system.eta * (1 + k * w) * N
        total += x * (fn.dk2 - k * fn.beta - x * fn.gamma**2 / (1 + fn.one_pm_delta(k) * x))
    return total


def qfi(source: SourceSpec, system: ImagingSystem, s: float,
        tmsv_variant: str = "squared_derivative") -> float:
    """Dispatch to the closed form for ``source``."""
    if isinstance(source, Thermal):
        return qfi_thermal(source.N, system, s)
    if isinstance(source, FockPM):
        return qfi_fock(source.N_plus, source.N_minus, system, s)
    if isinstance(source, Tmsv):
        return qfi_tmsv(source.xi, system, s, tmsv_variant)
    if isinstance(source, CorrThermal):
        return qfi_corr_thermal(source.N, source.w, system, s)
    raise UnsupportedState(f"unknown source {source!r}")


def cramer_rao(qfi_value: float, strict: bool = False) -> float:
    """Smallest achievable standard deviation ``1/sqrt(QFI)``.

    Zero information gives ``inf``; with ``strict=True`` it raises instead.
    """
    if qfi_value < 0 or math.isnan(qfi_value):
        raise ValueError(f"QFI must be non-negative, got {qfi_value}")
    if qfi_value == 0:
        if strict:
            raise ZeroInformation("QFI is zero: the separation cannot be estimated")
        return math.inf
    return 1 / math.sqrt(qfi_value)


def collected_photons(source: SourceSpec, system: ImagingSystem) -> float:
    """Mean photons reaching the image plane, used to normalise the QFI."""
    if isinstance(source, Tmsv):
        return system.eta * (math.cosh(2 * source.xi) - 1)
    return system.eta * source.total_photons


@dataclass(frozen=True)
class QfiReport:
    s: float
    source: SourceSpec
    eta: float
    qfi: float
    qfi_normalized: float
    crb: float
    bound: float

    HEADER = ("s", "eta", "family", "params", "qfi", "qfi_normalized", "crb", "bound")

    def row(self) -> list:
        return [repr(self.s), repr(self.eta), self.source.family, source_params(self.source),
                repr(self.qfi), repr(self.qfi_normalized), repr(self.crb), repr(self.bound)]


def qfi_report(source: SourceSpec, system: ImagingSystem, s: float,
               tmsv_variant: str = "squared_derivative") -> QfiReport:
    value = qfi(source, system, s, tmsv_variant)
    photons = collected_photons(source, system)
    normalized = system.x_r**2 * value / photons if photons > 0 else 0.0
    bound = qfi_upper_bound(system, s, source.total_photons / 2)
    return QfiReport(s, source, system.eta, value, normalized, cramer_rao(value), bound)
