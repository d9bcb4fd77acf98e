import math

import numpy as np
import pytest

from rqfi import ImagingSystem
from rqfi.beamsplitter import f_functions, qfi_upper_bound
from rqfi.errors import UnphysicalState, UnsupportedState, ZeroInformation
from rqfi.qfi import (
    QfiReport,
    cramer_rao,
    qfi_corr_thermal,
    qfi_fock,
    qfi_number_diagonal,
    qfi_report,
    qfi_thermal,
    qfi_thermal_two_term,
    qfi_tmsv,
    thermal_semiclassical_normalized,
)
from rqfi.sources import CorrThermal, FockPM, Thermal, Tmsv

S_GRID = np.geomspace(1e-3, 10, 40)


def test_thermal_example(sys04):
    assert qfi_thermal(1.0, sys04, 1.0) == pytest.approx(0.188119, abs=1e-6)
    assert cramer_rao(qfi_thermal(1.0, sys04, 1.0)) == pytest.approx(2.305599, abs=1e-6)


def test_thermal_far_field(sys04):
    assert qfi_thermal(3.0, sys04, 60.0) == pytest.approx(2 * 0.4 * 3 * 0.25)


@pytest.mark.parametrize("etaN", [1e-4, 0.01, 1.0, 100.0])
def test_thermal_routes_agree(etaN):
    sy = ImagingSystem(0.2)
    for s in S_GRID:
        a = qfi_thermal(etaN / 0.2, sy, s)
        b = qfi_thermal_two_term(etaN / 0.2, sy, s)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_number_diagonal_equals_thermal(sys04):
    for s in S_GRID:
        assert qfi_number_diagonal(Thermal(0.7), sys04, s) == pytest.approx(
            qfi_thermal(0.7, sys04, s), rel=1e-10)


def test_number_diagonal_equals_fock(sys04):
    for s in S_GRID:
        assert qfi_number_diagonal(FockPM(3, 1), sys04, s) == pytest.approx(
            qfi_fock(3, 1, sys04, s), rel=1e-12)


def test_number_diagonal_rejects_other_families(sys04):
    with pytest.raises(UnsupportedState):
        qfi_number_diagonal(Tmsv(1.0), sys04, 1.0)
    with pytest.raises(UnsupportedState):
        qfi_number_diagonal(CorrThermal(1.0, 0.5), sys04, 1.0)


def test_fock_examples(sys05, sys04):
    assert qfi_fock(0, 2, sys05, 1e-9) == pytest.approx(0.5, rel=1e-8)
    assert qfi_fock(2, 0, sys04, 60.0) == pytest.approx(2 * 0.4 * 0.25)
    assert qfi_fock(0, 0, sys04, 1.0) == 0.0
    assert qfi_fock(0, 2, sys04, 1.0) == pytest.approx(0.8 * 0.4359, rel=1e-3)


def test_fock_saturates_bound():
    for eta in (0.1, 0.4, 0.5):
        sy = ImagingSystem(eta)
        for s in S_GRID:
            best = max(qfi_fock(4, 0, sy, s), qfi_fock(0, 4, sy, s))
            assert best == pytest.approx(qfi_upper_bound(sy, s, 2.0), rel=1e-12)


def test_tmsv_vacuum(sys04):
    for v in ("as_printed", "squared_derivative"):
        assert qfi_tmsv(0.0, sys04, 1.0, v) == 0.0


def test_tmsv_far_field(sys04):
    for v in ("as_printed", "squared_derivative"):
        assert qfi_tmsv(1.0, sys04, 60.0, v) == pytest.approx(0.4 * (math.cosh(2) - 1) * 0.25)


def test_tmsv_variant_validation(sys04):
    with pytest.raises(ValueError):
        qfi_tmsv(1.0, sys04, 1.0, "linear")


def test_corr_thermal_examples():
    sy = ImagingSystem(1e-5)
    assert qfi_corr_thermal(1.0, -1.0, sy, 1.0) == pytest.approx(8.309e-6, rel=1e-3)
    far = qfi_corr_thermal(1.0, -1.0, sy, 60.0)
    assert qfi_corr_thermal(1.0, -1.0, sy, 1.0) > far


def test_corr_thermal_reduces_to_thermal(sys04):
    for s in S_GRID:
        assert qfi_corr_thermal(0.8, 0.0, sys04, s) == pytest.approx(qfi_thermal(0.8, sys04, s), rel=1e-12)


@pytest.mark.parametrize("w", [-1.0, -0.5, 0.3, 1.0])
def test_corr_thermal_attenuated_limit(w):
    sy = ImagingSystem(1e-4)
    N = 1.0  # eta N = 1e-4
    for s in (0.3, 1.0, 2.0, 5.0):
        fn = sy.functionals(s)
        expected = 2 * sy.eta * N * (fn.dk2 - w * fn.beta)
        assert qfi_corr_thermal(N, w, sy, s) == pytest.approx(expected, rel=1e-3)


def test_corr_thermal_validation(sys04):
    with pytest.raises(UnphysicalState):
        qfi_corr_thermal(1.0, 1.2, sys04, 1.0)


def test_cramer_rao():
    assert cramer_rao(4.0) == 0.5
    assert cramer_rao(0.25) == 2.0
    assert cramer_rao(0.0) == math.inf
    with pytest.raises(ZeroInformation):
        cramer_rao(0.0, strict=True)
    with pytest.raises(ValueError):
        cramer_rao(-1.0)


def test_semiclassical_curve(sys04):
    assert thermal_semiclassical_normalized(sys04, 60.0) == pytest.approx(0.25)
    assert thermal_semiclassical_normalized(sys04, 0.01) < 1e-4
    # finite eta N approaches it from above
    big = qfi_thermal(1e9, sys04, 0.5) / (2 * 0.4 * 1e9)
    assert big == pytest.approx(thermal_semiclassical_normalized(sys04, 0.5), rel=1e-5)


def test_monotone_in_photons(sys04):
    for s in (0.1, 1.0, 3.0):
        vals = [qfi_thermal(N, sys04, s) for N in (0.0, 0.1, 1.0, 10.0)]
        assert vals == sorted(vals)
        fvals = [qfi_fock(0, n, sys04, s) for n in range(5)]
        assert fvals == sorted(fvals)


def test_report(sys04):
    r = qfi_report(Thermal(1.0), sys04, 1.0)
    assert isinstance(r, QfiReport)
    assert r.crb * math.sqrt(r.qfi) == pytest.approx(1.0)
    assert r.qfi <= r.bound
    assert r.qfi_normalized == pytest.approx(r.qfi / 0.8)
    assert r.row()[2:4] == ["thermal", "N=1"]
    t = qfi_report(Tmsv(1.0), sys04, 60.0)
    assert t.qfi_normalized == pytest.approx(0.25)


def test_rescaling():
    from rqfi.psf import gaussian_psf

    a = ImagingSystem(0.3, gaussian_psf(1.0))
    b = ImagingSystem(0.3, gaussian_psf(2.0))
    for s in (0.2, 1.0):
        ra, rb = qfi_report(Thermal(2.0), a, s), qfi_report(Thermal(2.0), b, 2 * s)
        assert ra.qfi_normalized == pytest.approx(rb.qfi_normalized, rel=1e-12)
