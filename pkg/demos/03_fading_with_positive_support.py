"""
When the fading coefficient cannot be negative
==============================================

If the real and imaginary parts of h can take either sign, the phase of
the received chip carries no information and the learned code is
orthogonal.  If both parts are non-negative (Gamma, folded normal) the
channel no longer scrambles the sign, and the encoder learns antipodal
codewords instead.  They are far from orthogonal and much more reliable.
"""

import numpy as np

from fadingcodes import AutoencoderConfig, LearnedChain, analyze_codebook, codebook, normalize_spec, sample_fading, train
from fadingcodes.evaluation import estimate_bler
from fadingcodes.numerics import make_rng

for kind in ("rayleigh", "custom", "gamma", "gumbel", "folded_normal"):
    h = sample_fading(make_rng(1), normalize_spec(kind), 100_000)
    print(f"{kind:14s} mean of Re h {h.real.mean():+.3f}  var {h.real.var():.3f}  min {h.real.min():+.3f}")

for kind in ("rayleigh", "gamma"):
    cfg = AutoencoderConfig(M=2, n=2, fading=kind, train_snr_db=10.0, warmup_steps=5000, decoder_hidden=(64, 32))
    system = train(cfg)
    cb = codebook(system)
    print(kind, np.round(cb, 2).tolist(), analyze_codebook(cb).classification)
    print("  BLER at 7.26 dB:", estimate_bler(LearnedChain(system), 7.26, 100_000).bler)
