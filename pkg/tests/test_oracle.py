import math

import numpy as np
import pytest

from rqfi import ImagingSystem
from rqfi.errors import TruncationBudgetExceeded, UnsupportedPsf
from rqfi.oracle import adjudicate_tmsv, build_image_state, qfi_sld
from rqfi.oracle.fockspace import fock_basis, fock_dim, passive_map
from rqfi.oracle.state import basis_residual, choose_K, hg_coefficients
from rqfi.psf import psf_from_samples
from rqfi.qfi import qfi_fock, qfi_thermal, qfi_tmsv
from rqfi.sources import FockPM, Thermal, Tmsv
from rqfi.sources import image_distribution


def test_fock_dim_matches_basis():
    for modes in (1, 2, 4):
        for n in (0, 1, 3):
            assert len(fock_basis(modes, n)) == fock_dim(modes, n) == math.comb(n + modes, modes)


def test_passive_map_orthogonal():
    theta = 0.37
    M = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    U = passive_map(M, 4)
    assert np.allclose(U.T @ U, np.eye(U.shape[0]), atol=1e-12)


def test_passive_map_beamsplitter():
    M = np.array([[1, -1], [1, 1]]) / math.sqrt(2)
    U = passive_map(M, 2)
    idx = {b: i for i, b in enumerate(fock_basis(2, 2))}
    out = U[:, idx[(1, 1)]]
    # Hong-Ou-Mandel: no coincidence
    assert abs(out[idx[(1, 1)]]) < 1e-12
    assert out[idx[(2, 0)]] ** 2 + out[idx[(0, 2)]] ** 2 == pytest.approx(1.0)


def test_hg_coefficients_normalised():
    c, res = hg_coefficients(0.7, 40)
    assert np.sum(c**2) + res == pytest.approx(1.0, abs=1e-12)
    assert basis_residual(0.0, 1.0, 6) == 0.0


def test_choose_K_grows_with_separation():
    assert choose_K([0.5], 1.0) <= choose_K([4.0], 1.0)
    assert basis_residual(4.0, 1.0, choose_K([4.0], 1.0)) < 1e-8


def test_vacuum_population_single_photon(sys04):
    st = build_image_state(FockPM(1, 0), sys04, 1.0)
    dist = st.number_distribution(st.symmetric_modes())
    eta_p = 0.4 * (1 + math.exp(-1 / 8))
    assert dist[0, 0] == pytest.approx(1 - eta_p, abs=1e-9)


@pytest.mark.parametrize("source", [Thermal(0.5), FockPM(1, 1), FockPM(0, 2)])
def test_oracle_number_distribution(source):
    sy = ImagingSystem(0.3)
    st = build_image_state(source, sy, 1.0)
    oracle = st.number_distribution(st.symmetric_modes())
    exact = image_distribution(source, sy, 1.0).p
    a, b = (min(x, y) for x, y in zip(oracle.shape, exact.shape))
    assert np.abs(oracle[:a, :b] - exact[:a, :b]).max() < 1e-8


def test_state_trace_and_dense(sys04):
    st = build_image_state(FockPM(1, 1), sys04, 0.8, K=8, n_max=2)
    assert st.dim == fock_dim(8, 2)
    assert np.trace(st.rho) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(st.rho).min() > -1e-12


def test_budget_errors(sys04):
    with pytest.raises(TruncationBudgetExceeded) as e:
        build_image_state(Thermal(1.0), sys04, 4.0, K=6)
    assert e.value.budget == "basis_residual"
    with pytest.raises(TruncationBudgetExceeded) as e:
        build_image_state(Thermal(1.0), sys04, 1.0, n_max=2)
    assert e.value.budget == "image_tail"
    with pytest.raises(TruncationBudgetExceeded) as e:
        build_image_state(Thermal(50.0), sys04, 1.0)
    assert e.value.budget == "source_tail"


def test_non_gaussian_rejected():
    x = np.linspace(-12, 12, 2001)
    psf = psf_from_samples(x, np.exp(-x**2 / 4))
    with pytest.raises(UnsupportedPsf):
        build_image_state(Thermal(0.1), ImagingSystem(0.4, psf), 1.0)


@pytest.mark.parametrize("s", [0.5, 2.0])
def test_sld_fock(s):
    sy = ImagingSystem(0.4)
    res = qfi_sld(FockPM(0, 2), sy, s)
    assert res.qfi == pytest.approx(qfi_fock(0, 2, sy, s), rel=1e-4)
    assert res.truncation_report["tail_mass"] <= 1e-10


def test_sld_thermal():
    sy = ImagingSystem(0.2)
    res = qfi_sld(Thermal(0.5), sy, 1.0)
    assert res.qfi == pytest.approx(qfi_thermal(0.5, sy, 1.0), rel=1e-4)


def test_sld_methods_agree():
    sy = ImagingSystem(0.4)
    a = qfi_sld(FockPM(1, 1), sy, 1.0, K=6, method="dense")
    b = qfi_sld(FockPM(1, 1), sy, 1.0, K=6, method="support")
    assert a.qfi == pytest.approx(b.qfi, rel=1e-8)


def test_sld_step_guard(sys04):
    with pytest.raises(ValueError):
        qfi_sld(Thermal(0.1), sys04, 1e-4)


def test_tmsv_adjudication_small():
    sy = ImagingSystem(0.4)
    rep = adjudicate_tmsv(0.3, sy, [1.0])
    assert rep.verdict == "squared_derivative"
    assert rep.within_tolerance["squared_derivative"]
    assert not rep.within_tolerance["as_printed"]
    assert rep.oracle[0] == pytest.approx(qfi_tmsv(0.3, sy, 1.0), rel=1e-4)
