"""Point-spread functions and the overlap functionals built from them.

Two kinds of PSF are supported: a closed-form Gaussian
``psi(x) = (2 pi x_R^2)^(-1/4) exp(-x^2 / (4 x_R^2))`` and a real amplitude
sampled on a uniform grid.  Everything downstream is parameterized by the
scalars returned by :func:`functionals`:

* ``delta``  overlap of the two shifted PSFs,
* ``gamma``  its derivative with respect to the separation,
* ``beta``   overlap of the two shifted PSF derivatives,
* ``dk2``    momentum variance of the PSF,
* ``eps_plus_sq`` / ``eps_minus_sq``  the mode-distortion coefficients
  ``dk2 -/+ beta - gamma^2 / (1 +/- delta)``.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    EpsilonNegative,
    NonFinite,
    QuadratureDomainTooSmall,
    UnsupportedPsf,
    ZeroNorm,
)

logger = logging.getLogger(__name__)

GAUSSIAN = "gaussian"
NUMERIC = "numeric"

#: Domain half-width, in units of the PSF width, beyond the shift s/2.
TAIL_WIDTHS = 8.0
EPS_CLAMP_TOL = 1e-9
EPS_ERROR_TOL = 1e-6
#: Step (in units of x_R) of the finite difference used for gamma on sampled PSFs.
GAMMA_FD_STEP = 1e-3


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre rule on ``[-half_width, half_width]``.

    ``half_width=None`` picks ``s/2 + 8 x_R`` for each requested separation.
    """

    half_width: float | None = None
    nodes: int = 512
    panel_nodes: int = 16

    def __post_init__(self):
        if self.nodes < 64:
            raise ValueError(f"quadrature needs at least 64 nodes, got {self.nodes}")
        if self.nodes % self.panel_nodes:
            raise ValueError("nodes must be a multiple of panel_nodes")

    def rule(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        t, w = _gauss_legendre(self.panel_nodes)
        panels = self.nodes // self.panel_nodes
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
        wt = (half[:, None] * w[None, :]).ravel()
        return x, wt


def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


@dataclass(frozen=True, eq=False)
class PsfModel:
    """Real, unit-norm amplitude point-spread function.

    Build instances with :func:`gaussian_psf`, :func:`psf_from_samples` or
    :func:`load_psf_csv` rather than directly.
    """

    kind: str
    x_r: float
    x: np.ndarray | None = field(default=None, repr=False)
    amplitude: np.ndarray | None = field(default=None, repr=False)
    quadrature: QuadratureSpec = QuadratureSpec()

    @cached_property
    def _spline(self) -> CubicSpline:
        return CubicSpline(self.x, self.amplitude, bc_type="natural", extrapolate=False)

    @cached_property
    def _dspline(self) -> CubicSpline:
        dx = self.x[1] - self.x[0]
        return CubicSpline(self.x, _fd4_derivative(self.amplitude, dx), bc_type="natural",
                           extrapolate=False)

    def value(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == GAUSSIAN:
            return (2 * np.pi * self.x_r**2) ** -0.25 * np.exp(-(x**2) / (4 * self.x_r**2))
        return np.nan_to_num(self._spline(x), nan=0.0)

    def derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == GAUSSIAN:
            return -x / (2 * self.x_r**2) * self.value(x)
        return np.nan_to_num(self._dspline(x), nan=0.0)

    def half_width(self, s: float) -> float:
        needed = abs(s) / 2 + TAIL_WIDTHS * self.x_r
        w = self.quadrature.half_width
        if w is None:
            return needed
        if w < needed * (1 - 1e-12):
            raise QuadratureDomainTooSmall(
                f"half_width={w} < s/2 + {TAIL_WIDTHS:g} x_R = {needed}"
            )
        return w

    def integrate(self, f: Callable[[np.ndarray], np.ndarray], s: float) -> float:
        w = self.half_width(s)
        x, wt = self.quadrature.rule(-w, w)
        return float(np.dot(wt, f(x)))


def _fd4_derivative(y: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order central differences, second order at the two outer points."""
    d = np.gradient(y, dx, edge_order=2)
    if len(y) >= 5:
        d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * dx)
    return d


def gaussian_psf(x_r: float = 1.0, quadrature: QuadratureSpec | None = None) -> PsfModel:
    if not (x_r > 0 and math.isfinite(x_r)):
        raise ValueError(f"Rayleigh length must be positive and finite, got {x_r}")
    return PsfModel(GAUSSIAN, float(x_r), quadrature=quadrature or QuadratureSpec())


def psf_from_samples(x: Sequence[float], amplitude: Sequence[float],
                     quadrature: QuadratureSpec | None = None) -> PsfModel:
    """Sampled PSF on a uniform grid, normalized to unit L2 norm."""
    x = np.asarray(x, dtype=float)
    amp = np.asarray(amplitude)
    if np.iscomplexobj(amp):
        raise UnsupportedPsf("complex-valued PSF samples are not supported")
    amp = amp.astype(float)
    if x.ndim != 1 or x.shape != amp.shape or len(x) < 8:
        raise ValueError("need matching 1-D arrays with at least 8 samples")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(amp))):
        raise NonFinite("PSF samples contain non-finite values")
    dx = np.diff(x)
    if np.any(dx <= 0) or not np.allclose(dx, dx[0], rtol=1e-6, atol=0):
        raise ValueError("PSF samples must lie on a uniform increasing grid")
    if not np.any(amp):
        raise ZeroNorm("PSF samples are identically zero")
    raw = PsfModel(NUMERIC, float(x[-1] - x[0]), x, amp, quadrature or QuadratureSpec())
    return normalize_psf(raw)


def load_psf_csv(path: str | Path, quadrature: QuadratureSpec | None = None) -> PsfModel:
    """Read a two-column ``x,amplitude`` CSV (header optional)."""
    xs, ys = [], []
    seen_row = False
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                xs.append(float(row[0]))
                ys.append(float(row[1]))
            except (ValueError, IndexError):
                if seen_row:
                    raise ValueError(f"{path}: bad PSF row {row!r}") from None
            seen_row = True
    return psf_from_samples(xs, ys, quadrature)


def _sample_moments(psf: PsfModel) -> tuple[float, float, float]:
    """Norm, mean and variance of |psi|^2 over the sample range."""
    x, wt = psf.quadrature.rule(psf.x[0], psf.x[-1])
    p = psf.value(x) ** 2
    norm = float(np.dot(wt, p))
    mean = float(np.dot(wt, x * p)) / norm
    var = float(np.dot(wt, (x - mean) ** 2 * p)) / norm
    return norm, mean, var


def normalize_psf(raw: PsfModel) -> PsfModel:
    """Rescale to unit L2 norm; the Gaussian closed form is returned unchanged.

    For sampled PSFs the effective width ``x_r`` is set to the RMS width of
    ``|psi|^2``, which coincides with the Rayleigh length for a Gaussian.
    """
    if raw.kind == GAUSSIAN:
        if not (raw.x_r > 0 and math.isfinite(raw.x_r)):
            raise ValueError(f"Rayleigh length must be positive, got {raw.x_r}")
        return raw
    if not np.all(np.isfinite(raw.amplitude)):
        raise NonFinite("PSF samples contain non-finite values")
    if not np.any(raw.amplitude):
        raise ZeroNorm("PSF samples are identically zero")
    norm, _, _ = _sample_moments(raw)
    if not (norm > 0 and math.isfinite(norm)):
        raise ZeroNorm(f"PSF norm is {norm}")
    scaled = replace(raw, amplitude=raw.amplitude / math.sqrt(norm))
    _, _, var = _sample_moments(scaled)
    return replace(scaled, x_r=math.sqrt(var))


# -- overlap functionals -------------------------------------------------------


def _gaussian_delta(psf: PsfModel, s: float) -> tuple[float, float]:
    """delta and 1 - delta, the latter without cancellation."""
    u2 = (s / psf.x_r) ** 2
    return math.exp(-u2 / 8), -math.expm1(-u2 / 8)


def overlap_delta(psf: PsfModel, s: float) -> float:
    """Overlap ``Re int psi(x + s/2) psi(x - s/2) dx`` of the two images."""
    _check_s(s)
    psf.half_width(s)
    if psf.kind == GAUSSIAN:
        return _gaussian_delta(psf, s)[0]
    return quadrature_integrals(psf, s)["delta"]


def overlap_gamma(psf: PsfModel, s: float) -> float:
    """``d delta / ds``; for sampled PSFs a 5-point central difference of delta."""
    _check_s(s)
    psf.half_width(s)
    if psf.kind == GAUSSIAN:
        return -s / (4 * psf.x_r**2) * _gaussian_delta(psf, s)[0]
    if s == 0:
        return 0.0
    h = GAMMA_FD_STEP * psf.x_r
    # One integration domain for the whole stencil keeps the nodes fixed.
    fixed = replace(psf, quadrature=replace(psf.quadrature,
                                            half_width=psf.half_width(s + 2 * h)))
    d = [quadrature_integrals(fixed, abs(s + k * h))["delta"] for k in (-2, -1, 1, 2)]
    return (d[0] - 8 * d[1] + 8 * d[2] - d[3]) / (12 * h)


def overlap_beta(psf: PsfModel, s: float) -> float:
    """Overlap ``int psi'(x + s/2) psi'(x - s/2) dx`` of the PSF derivatives."""
    _check_s(s)
    psf.half_width(s)
    if psf.kind == GAUSSIAN:
        a = 1 / (4 * psf.x_r**2)
        return _gaussian_delta(psf, s)[0] * a * (1 - s**2 * a)
    return quadrature_integrals(psf, s)["beta"]


def momentum_variance(psf: PsfModel) -> float:
    """``int |psi'(x)|^2 dx``, the variance of the momentum ``-i d/dx``."""
    if psf.kind == GAUSSIAN:
        return 1 / (4 * psf.x_r**2)
    val = quadrature_integrals(psf, 0.0)["dk2"]
    if not math.isfinite(val):
        raise NonFinite("momentum variance overflowed")
    return val


def quadrature_integrals(psf: PsfModel, s: float) -> dict[str, float]:
    """Defining integrals evaluated by quadrature, whatever the PSF kind.

    ``gamma`` here is ``int psi'(x) psi(x - s) dx``, the integral form of
    ``d delta / ds``.  Used as the primary path for sampled PSFs and as an
    independent check on the Gaussian closed forms.
    """
    h = s / 2
    return {
        "delta": psf.integrate(lambda x: psf.value(x + h) * psf.value(x - h), s),
        "gamma": psf.integrate(lambda x: psf.derivative(x + h) * psf.value(x - h), s),
        "beta": psf.integrate(lambda x: psf.derivative(x + h) * psf.derivative(x - h), s),
        "dk2": psf.integrate(lambda x: psf.derivative(x) ** 2, 0.0),
    }


def _check_s(s: float) -> None:
    if not (s >= 0 and math.isfinite(s)):
        raise ValueError(f"separation must be finite and non-negative, got {s}")


@dataclass(frozen=True)
class OverlapFunctionals:
    s: float
    delta: float
    gamma: float
    beta: float
    dk2: float
    eps_plus_sq: float
    eps_minus_sq: float
    one_minus_delta: float
    x_r: float

    def gamma_sq_over(self, sign: int) -> float:
        """``gamma^2 / (1 + sign * delta)``, with the finite s -> 0 limit for sign=-1."""
        if sign > 0:
            return self.gamma**2 / (1 + self.delta)
        if self.one_minus_delta <= 0:
            # gamma^2 / (1 - delta) -> -2 delta''(0) = 2 dk2 as s -> 0
            return 2 * self.dk2
        return self.gamma**2 / self.one_minus_delta

    def one_pm_delta(self, sign: int) -> float:
        return 1 + self.delta if sign > 0 else self.one_minus_delta

    def eps_sq(self, sign: int) -> float:
        return self.eps_plus_sq if sign > 0 else self.eps_minus_sq


def _clamp_eps(value: float, dk2: float, label: str) -> float:
    if value >= 0:
        return value
    if value < -EPS_ERROR_TOL * dk2:
        raise EpsilonNegative(f"{label} = {value:.3e} < -{EPS_ERROR_TOL:g} dk2")
    if value < -EPS_CLAMP_TOL * dk2:
        logger.warning("%s = %.3e clamped to 0", label, value)
    return 0.0


def functionals(psf: PsfModel, s: float) -> OverlapFunctionals:
    """All overlap functionals of ``psf`` at separation ``s``."""
    _check_s(s)
    psf.half_width(s)
    dk2 = momentum_variance(psf)
    if psf.kind == GAUSSIAN:
        delta, omd = _gaussian_delta(psf, s)
        gamma = overlap_gamma(psf, s)
        beta = overlap_beta(psf, s)
    elif s == 0:
        delta, omd, gamma, beta = 1.0, 0.0, 0.0, dk2
    else:
        q = quadrature_integrals(psf, s)
        delta, beta = min(q["delta"], 1.0), q["beta"]
        omd = 1.0 - delta
        gamma = overlap_gamma(psf, s)
    partial = OverlapFunctionals(s, delta, gamma, beta, dk2, 0.0, 0.0, omd, psf.x_r)
    eps_p = dk2 - beta - partial.gamma_sq_over(+1)
    eps_m = dk2 + beta - partial.gamma_sq_over(-1)
    return replace(partial,
                   eps_plus_sq=_clamp_eps(eps_p, dk2, "eps_plus_sq"),
                   eps_minus_sq=_clamp_eps(eps_m, dk2, "eps_minus_sq"))
