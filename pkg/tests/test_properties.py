import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from rqfi import ImagingSystem
from rqfi.beamsplitter import f_functions, qfi_upper_bound, transmissivities
from rqfi.psf import functionals, gaussian_psf, quadrature_integrals
from rqfi.qfi import qfi_corr_thermal, qfi_fock, qfi_report, qfi_thermal, qfi_tmsv
from rqfi.sources import CorrThermal, FockPM, Thermal, Tmsv, image_distribution

eta = st.floats(1e-4, 0.5)
sep = st.floats(1e-3, 10.0)
xr = st.floats(0.2, 5.0)
photons = st.floats(1e-3, 1e3)
SLACK = 1e-9


@settings(max_examples=200, deadline=None)
@given(eta, sep)
def test_transmissivities_in_range(e, s):
    sy = ImagingSystem(e)
    tp, tm = transmissivities(sy, sy.functionals(s))
    assert 0 <= tm <= tp <= 2 * e <= 1
    assert tp + tm == np.float64(2 * e) or math.isclose(tp + tm, 2 * e, rel_tol=1e-12)


@settings(max_examples=200, deadline=None)
@given(eta, sep)
def test_f_nonnegative(e, s):
    fp, fm = f_functions(ImagingSystem(e), s)
    assert fp >= -SLACK and fm >= -SLACK


@settings(max_examples=200, deadline=None)
@given(eta, sep, photons)
def test_thermal_below_bound(e, s, N):
    sy = ImagingSystem(e)
    assert qfi_thermal(N, sy, s) <= qfi_upper_bound(sy, s, N) * (1 + SLACK)


@settings(max_examples=200, deadline=None)
@given(eta, sep, st.integers(0, 20), st.integers(0, 20))
def test_fock_below_bound(e, s, a, b):
    sy = ImagingSystem(e)
    assert qfi_fock(a, b, sy, s) <= qfi_upper_bound(sy, s, (a + b) / 2) * (1 + SLACK) + 1e-300


@settings(max_examples=200, deadline=None)
@given(eta, sep, st.floats(0.0, 3.0))
def test_tmsv_below_bound(e, s, xi):
    sy = ImagingSystem(e)
    bound = qfi_upper_bound(sy, s, math.sinh(xi) ** 2)
    assert qfi_tmsv(xi, sy, s) <= bound * (1 + SLACK) + 1e-300


@settings(max_examples=200, deadline=None)
@given(eta, sep, photons, st.floats(-1.0, 1.0))
def test_corr_thermal_below_bound(e, s, N, w):
    sy = ImagingSystem(e)
    assert qfi_corr_thermal(N, w, sy, s) <= qfi_upper_bound(sy, s, N) * (1 + SLACK)


@settings(max_examples=50, deadline=None)
@given(eta, st.floats(0.01, 5.0), xr, st.floats(0.01, 20.0))
def test_scale_invariance(e, u, x, N):
    a = qfi_report(Thermal(N), ImagingSystem(e, gaussian_psf(1.0)), u)
    b = qfi_report(Thermal(N), ImagingSystem(e, gaussian_psf(x)), u * x)
    assert math.isclose(a.qfi_normalized, b.qfi_normalized, rel_tol=1e-9, abs_tol=1e-300)


@settings(max_examples=50, deadline=None)
@given(eta, sep, st.floats(0.0, 5.0))
def test_distribution_normalised(e, s, N):
    d = image_distribution(Thermal(N), ImagingSystem(e), s)
    assert (d.p >= 0).all()
    assert math.isclose(d.p.sum() + d.tail_mass, 1.0, abs_tol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 10.0))
def test_quadrature_matches_closed_form(s):
    g = gaussian_psf(1.0)
    q, fn = quadrature_integrals(g, s), functionals(g, s)
    for k in ("delta", "gamma", "beta", "dk2"):
        assert abs(q[k] - getattr(fn, k)) < 1e-9
