"""
Noncoherent orthogonal signalling over Rayleigh fading
======================================================

With no channel knowledge anywhere, one bit can be sent on two chips:
put all the energy on chip 0 for a zero and on chip 1 for a one.  The
receiver just compares the two received energies.  Its error rate has a
closed form, which makes it a good first check of the simulator.
"""

import numpy as np

from fadingcodes import baseline, make_rng, normalize_spec
from fadingcodes.channel import SnrPoint, noise_param, transmit
from fadingcodes.classical import oracle_orth_noncoherent_bler, orth_detect, orth_encode
from fadingcodes.evaluation import default_grid, sweep

# one chip pair by hand
rng = make_rng(0)
bits = rng.integers(2, size=8)
chips = orth_encode(bits)
out = transmit(chips, normalize_spec("rayleigh"), noise_param(SnrPoint(10.0)), rng)
print("sent    ", bits)
print("detected", orth_detect(out.y))

# the same thing as a sweep, next to 1 / (2 + snr)
grid = default_grid()
curve = sweep(baseline("orth_classical"), grid, 200_000)
for snr, p, se in zip(curve.snr_db, curve.bler, curve.stderr):
    oracle = oracle_orth_noncoherent_bler(SnrPoint(snr))
    print(f"{snr:6.2f} dB  simulated {p:.5f} +- {se:.5f}   closed form {oracle:.5f}")

# the error rate only falls like 1/snr: one faded chip carries all the energy
slope = np.polyfit(curve.snr_db[-5:], np.log10(curve.bler[-5:]), 1)[0]
print(f"high-SNR slope {slope * 10:.2f} decades per decade of SNR")
