"""Beating when relaxation cannot keep up with the pulse error.

With a 25 ms delay, T1 = 7.57 s and T2 = 0.6 s the spin barely relaxes
between pulses, so an angle error of 0.0674 pi accumulates. The subharmonic
peak then splits into two, one each side of nu = 0.5.
"""
import math

from edtc import evolve, load_sequence, spectrum, subharmonic_peaks
from edtc.figures import recipe_path

for name in ("fig2a.seq", "fig2b.seq", "fig2c.seq"):
    p, seq = load_sequence(recipe_path(name))
    spec = spectrum(evolve(p, seq))
    theta = math.pi + seq.pulse.delta
    peaks = ", ".join(f"{nu:.4f}" for nu in subharmonic_peaks(spec))
    print(f"{name}: tau = {seq.tau * 1e3:.0f} ms, theta = {math.degrees(theta):.2f} deg")
    print(f"    peaks at {peaks}; rotation advance predicts "
          f"{1 - theta / (2 * math.pi):.4f} and {theta / (2 * math.pi):.4f}; f = {spec.f:.3f}")

# At 200 ms T2 damps part of the transverse leak each cycle: the structure
# pulls in close to 0.5 and the rotation-advance estimate no longer holds.
