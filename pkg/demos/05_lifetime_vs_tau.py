"""Longer waits protect the order against pulse errors.

Lifetime here is the period divided by the FWHM of the subharmonic peak,
i.e. a decay time in units of T2. With a 0.1 pi error, a longer delay lets
T2 dephasing remove more of the transverse leak each cycle. With perfect
pulses there is nothing to remove and the lifetime is set by T1 alone.
"""
import math

from edtc import lifetime_vs_tau, validate_params

p = validate_params({"t1": 1000.0, "t2": 1.0, "m_eq": 0.8})
taus = [5.0, 10.0, 20.0, 40.0]
errored = lifetime_vs_tau(p, 0.1 * math.pi, taus, cycles=4096)
perfect = lifetime_vs_tau(p, 0.0, taus, cycles=4096)

print(" tau/T2   lifetime (delta = 0.1 pi)   lifetime (delta = 0)")
for (tau, a), (_, b) in zip(errored, perfect):
    print(f"{tau:7.0f}   {a:25.1f}   {b:20.1f}")
