"""Quantum Fisher information for the separation of two point sources."""
from .beamsplitter import (
    ImagingSystem,
    bs_parameters,
    f_functions,
    normalized_bound,
    qfi_upper_bound,
)
from .psf import functionals, gaussian_psf, load_psf_csv, psf_from_samples
from .qfi import (
    QfiReport,
    cramer_rao,
    qfi,
    qfi_corr_thermal,
    qfi_fock,
    qfi_number_diagonal,
    qfi_report,
    qfi_thermal,
    qfi_tmsv,
)
from .sources import CorrThermal, FockPM, Thermal, Tmsv, image_distribution, log_derivative_moment

__version__ = "0.1.0"
