"""How the subharmonic peak broadens with pulse error.

Long runs (4096 cycles) keep the spectral resolution well below the widths
being measured. The fitted exponent sits near 2, i.e. the width grows
quadratically in the error.
"""
import math

import numpy as np

from edtc import fit_power_law, fwhm_vs_delta, validate_params

p = validate_params({"t1": 1000.0, "t2": 1.0, "m_eq": 0.8})
deltas = np.arange(1, 11) * 0.02 * math.pi
points = fwhm_vs_delta(p, deltas, tau=5.0, cycles=4096)
fit = fit_power_law(points)

for d, w in points:
    print(f"delta = {d / math.pi:.2f} pi   FWHM = {w:.5f}   fit = {fit(d):.5f}")
err = np.sqrt(np.diag(fit.covariance))
print(f"\nFWHM = a delta^lambda + b with a = {fit.a:.4f}, lambda = {fit.lam:.3f} +/- {err[1]:.3f}, "
      f"b = {fit.b:.2e}")
print("experimental reference: lambda = 2.24")
