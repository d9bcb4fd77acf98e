"""How much can be learned about a sub-Rayleigh separation?

Prints the ultimate bound per photon next to what thermal light and an
optimal Fock state deliver, for a Gaussian PSF with x_R = 1.
"""
import numpy as np

from rqfi import ImagingSystem
from rqfi.beamsplitter import normalized_bound
from rqfi.qfi import qfi_fock, qfi_thermal

eta = 0.4
system = ImagingSystem(eta)
N = 1.0

bright = 1e4

print(f"{'s/x_R':>8} {'bound':>8} {'thermal':>8} {'bright':>8} {'fock(0,2)':>10}")
for s in np.geomspace(0.01, 10, 13):
    print(f"{s:8.3f} {normalized_bound(system, s):8.4f} "
          f"{qfi_thermal(N, system, s) / (2 * eta * N):8.4f} "
          f"{qfi_thermal(bright, system, s) / (2 * eta * bright):8.4f} "
          f"{qfi_fock(0, 2, system, s) / (2 * eta * N):10.4f}")

# Dim thermal light keeps a quarter unit per photon.  Bright thermal light
# collapses below the Rayleigh length; the collapse only recovers once
# 1 - delta drops under 1 / (eta N), which moves to smaller s as N grows.
# The entangled Fock state keeps half a unit.
