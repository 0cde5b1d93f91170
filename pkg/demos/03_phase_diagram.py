"""Crystalline fraction over pulse error and T1/T2.

Coarse version of the full grid in recipes/fig3a.json (run
``edtc figures fig3a`` for that). The order survives large pulse errors
only when T1 >> T2.
"""
import math

import numpy as np

from edtc import sweep_delta_ratio, validate_params

base = validate_params({"t1": 1000.0, "t2": 1.0, "m_eq": 0.8})
deltas = np.linspace(-0.5, 0.5, 11) * math.pi
ratios = np.logspace(0, 3, 7)
pd = sweep_delta_ratio(base, deltas, ratios, tau=5.0)

print("T1/T2 \\ delta/pi " + " ".join(f"{d / math.pi:+5.1f}" for d in deltas))
for ratio, row in zip(ratios[::-1], pd.f_grid[::-1]):
    print(f"{ratio:16.1f} " + " ".join(f"{f:5.2f}" for f in row))
