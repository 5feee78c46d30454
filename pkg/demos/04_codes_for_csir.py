"""
Receiver-side channel knowledge: learned code versus Hamming(7,4)
=================================================================

With h known at the receiver, classical practice is coherent BPSK plus a
block code.  Here a sixteen-message, seven-symbol autoencoder gets the raw
h next to y and learns coding, combining and decoding at once.  A code
trained on plain AWGN and used on the fading channel after coherent
combining does noticeably worse at high SNR: it was never taught about deep
fades.
"""

from fadingcodes import AutoencoderConfig, LearnedChain, baseline, normalize_spec, train
from fadingcodes.evaluation import estimate_bler

csir = train(AutoencoderConfig(M=16, n=7, mode="csir", train_snr_db=7.0))
awgn = train(AutoencoderConfig(M=16, n=7, mode="awgn", train_snr_db=7.0))

chains = {
    "uncoded": baseline("uncoded_csir"),
    "hamming hard": baseline("hamming_hard_csir"),
    "hamming MLD": baseline("hamming_mld_csir"),
    "learned CSIR": LearnedChain(csir),
    "learned AWGN": LearnedChain(awgn, fading=normalize_spec("rayleigh")),
}
print("SNR dB " + "".join(f"{name:>15s}" for name in chains))
for snr in (0.0, 5.0, 10.0, 15.0, 20.0):
    row = [estimate_bler(chain, snr, 200_000).bler for chain in chains.values()]
    print(f"{snr:6.1f} " + "".join(f"{p:15.2e}" for p in row))
