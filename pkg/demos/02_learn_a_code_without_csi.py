"""
Learning a two-message code without channel knowledge
======================================================

An encoder network maps the message to two real chips, the channel fades
and adds noise, and a decoder network guesses the message from the raw
received samples.  Both are trained together on cross-entropy.  Nothing
tells the networks about energy detection, yet they rediscover it: the
learned codewords put their energy on different chips.
"""

from fadingcodes import (
    AutoencoderConfig,
    LearnedChain,
    analyze_codebook,
    codebook,
    render_codebook,
    train,
    train_with_restarts,
)
from fadingcodes.channel import SnrPoint
from fadingcodes.classical import oracle_orth_noncoherent_bler
from fadingcodes.evaluation import estimate_bler

# the encoder stays frozen for the first 5000 steps while the decoder learns to read it
config = AutoencoderConfig(M=2, n=2, train_snr_db=7.0, warmup_steps=5000, decoder_hidden=(64, 32))
system = train(config)
print(f"final training loss {system.final_loss:.4f}")

cb = codebook(system)
print(render_codebook(cb))
print(analyze_codebook(cb).summary())

chain = LearnedChain(system)
for snr in (0.0, 7.0, 14.0):
    est = estimate_bler(chain, snr, 100_000)
    print(f"{snr:5.1f} dB  learned {est.bler:.4f}   energy detector {oracle_orth_noncoherent_bler(SnrPoint(snr)):.4f}")

# five chips: the best seed spreads each codeword over two chips, a diversity code
long_config = AutoencoderConfig(M=2, n=5, train_snr_db=7.0, warmup_steps=5000, decoder_hidden=(64, 32))
long_system = train_with_restarts(long_config, seeds=(0, 1, 2))
print(render_codebook(codebook(long_system)))
print("BLER at 20 dB, n=2:", estimate_bler(chain, 20.0, 100_000).bler)
print("BLER at 20 dB, n=5:", estimate_bler(LearnedChain(long_system), 20.0, 100_000).bler)
