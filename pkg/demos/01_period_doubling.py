"""Period doubling of a relaxing spin under repeated pi pulses.

A spin with T1 = 100 T2 waits tau = 10 T2, gets flipped, waits again, and
so on. Sampled once per period, M_z alternates in sign: the response
repeats every two drive periods.
"""
import math

from edtc import PulseSequence, PulseSpec, evolve, load_sequence, spectrum
from edtc.figures import recipe_path

p, seq = load_sequence(recipe_path("fig1.seq"))
print(f"T1/T2 = {p.t1 / p.t2:g}, tau = {seq.tau:g} T2, M_eq = {p.m_eq}, Mz(0) = {seq.initial.mz}")

series = evolve(p, seq)
print("\n  n      Mz(nT)")
for n, _, m in list(series)[:12]:
    print(f"{n:3d}  {m.mz:+.5f}")

# Relaxation pulls M_z towards M_eq during every delay, so the alternation
# decays onto a small fixed point; the width of the nu = 0.5 peak measures
# how fast.
spec = spectrum(series)
print(f"\npeak at nu = {spec.peak_nu:.4f}, FWHM = {spec.fwhm:.4f} per cycle, f = {spec.f:.3f}")

# With tau >> T2 the transverse leak from a bad pulse is gone before the
# next one, so the peak stays at 0.5 and only loses weight.
for deg in (0, 10, 30):
    pulse = PulseSpec.from_delta(math.radians(deg), p.omega1)
    s = evolve(p, PulseSequence(seq.tau, pulse, 200, seq.initial))
    sp = spectrum(s)
    print(f"delta = {deg:2d} deg: peak nu = {sp.peak_nu:.4f}, f = {sp.f:.3f}")
