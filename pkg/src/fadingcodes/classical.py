"""Classical baselines and their closed-form Rayleigh error rates.

Bits are ``uint8`` arrays; every function accepts a leading batch dimension.
Messages of ``k`` bits are indexed MSB first, so message 5 of a 4-bit block
is ``[0, 1, 0, 1]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .channel import SnrPoint, noise_param, transmit
from .numerics import FadingSpec, normalize_spec

# parity part P of the systematic generator G = [I | P]
PARITY = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]], dtype=np.uint8)


@dataclass(frozen=True)
class Hamming74:
    generator: np.ndarray = field(default_factory=lambda: np.hstack([np.eye(4, dtype=np.uint8), PARITY]))
    parity_check: np.ndarray = field(default_factory=lambda: np.hstack([PARITY.T, np.eye(3, dtype=np.uint8)]))

    @property
    def syndrome_table(self) -> dict[tuple[int, ...], int]:
        """3-bit syndrome -> flipped position (columns of H)."""
        return {tuple(int(v) for v in col): pos for pos, col in enumerate(self.parity_check.T)}

    @property
    def codewords(self) -> np.ndarray:
        """All 16 codewords, row ``i`` encodes message ``i``."""
        return self.encode(message_to_bits(np.arange(16), 4))

    def encode(self, data) -> np.ndarray:
        return (np.asarray(data, dtype=np.uint8) @ self.generator % 2).astype(np.uint8)

    def syndrome(self, received) -> np.ndarray:
        return (np.asarray(received, dtype=np.uint8) @ self.parity_check.T % 2).astype(np.uint8)

    def decode(self, received) -> np.ndarray:
        r = np.array(received, dtype=np.uint8, copy=True)
        single = r.ndim == 1
        r = np.atleast_2d(r)
        s = self.syndrome(r)
        # syndrome read as a 3-bit number indexes a position lookup; 0 means no flip
        weights = 1 << np.arange(2, -1, -1)
        lookup = np.full(8, -1)
        for col, pos in self.syndrome_table.items():
            lookup[int(np.dot(col, weights))] = pos
        pos = lookup[s @ weights]
        rows = np.nonzero(pos >= 0)
        r[(*rows, pos[rows])] ^= 1
        return r[0, :4] if single else r[..., :4]


HAMMING = Hamming74()


def message_to_bits(messages, k: int) -> np.ndarray:
    messages = np.asarray(messages)
    shifts = np.arange(k - 1, -1, -1)
    return ((messages[..., None] >> shifts) & 1).astype(np.uint8)


def bits_to_message(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    k = bits.shape[-1]
    return bits @ (1 << np.arange(k - 1, -1, -1))


def hamming_encode(data) -> np.ndarray:
    return HAMMING.encode(data)


def syndrome_decode(received) -> np.ndarray:
    return HAMMING.decode(received)


def min_distance(codewords) -> int:
    cw = np.asarray(codewords)
    return min(int(np.sum(a != b)) for a, b in itertools.combinations(cw, 2))


# -- modulation and detection ------------------------------------------------


def orth_encode(bits) -> np.ndarray:
    """Bit 0 -> [1, 0], bit 1 -> [0, 1]."""
    bits = np.asarray(bits)
    return np.stack([bits == 0, bits == 1], axis=-1).astype(float)


def orth_detect(y) -> np.ndarray:
    """Noncoherent energy detector: 0 iff ``|y1| >= |y2|``."""
    y = np.asarray(y)
    return (np.abs(y[..., 0]) < np.abs(y[..., 1])).astype(np.uint8)


def bpsk_map(bits) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(bits, dtype=float)


def bpsk_detect(statistic) -> np.ndarray:
    return (np.asarray(statistic) < 0).astype(np.uint8)


def coherent_combine(y, h) -> np.ndarray:
    """Matched-filter statistic ``Re(conj(h) y)``; zero when ``h == 0``."""
    return np.real(np.conj(h) * y)


def hamming_soft_mld(y, h) -> np.ndarray:
    """ML decoding with CSIR: data bits of the nearest faded BPSK codeword."""
    y = np.asarray(y)
    h = np.asarray(h)
    s = bpsk_map(HAMMING.codewords)  # (16, 7)
    # |y - h s|^2 = |y|^2 - 2 s Re(conj(h) y) + |h|^2 s^2, s^2 = 1; only the middle term varies
    metric = coherent_combine(y, h) @ s.T
    best = np.argmax(metric, axis=-1)  # first maximum = lowest codeword index
    return message_to_bits(best, 4)


# -- closed forms (Rayleigh, E|h|^2 = 1) ------------------------------------


def oracle_orth_noncoherent_bler(snr: SnrPoint, chip_energy: float = 1.0) -> float:
    """Energy detection of orthogonal chips: ``1 / (2 + Ec / (2 N0))``."""
    n0 = noise_param(snr)
    return 1.0 / (2.0 + chip_energy / (2.0 * n0))


def oracle_coherent_bpsk_ber(mean_snr: float) -> float:
    """BPSK with ideal coherent detection, average SNR ``mean_snr``."""
    g = mean_snr
    return 0.5 * (1.0 - np.sqrt(g / (1.0 + g)))


def oracle_awgn_bpsk_ber(snr_linear: float) -> float:
    """BPSK on the real AWGN channel with ``N0 = 1 / (2 snr)``: ``Q(sqrt(2 snr))``."""
    return float(special.ndtr(-np.sqrt(2.0 * snr_linear)))


def oracle_uncoded_block(snr_db: float, k_bits: int = 4) -> float:
    p = oracle_coherent_bpsk_ber(10 ** (snr_db / 10))
    return 1.0 - (1.0 - p) ** k_bits


def hamming_hard_block(p: float) -> float:
    """Block error of a single-error-correcting length-7 code at bit error ``p``."""
    return 1.0 - (1.0 - p) ** 7 - 7 * p * (1.0 - p) ** 6


def oracle_hamming_hard_block(snr_db: float) -> float:
    p = oracle_coherent_bpsk_ber(4 / 7 * 10 ** (snr_db / 10))
    return hamming_hard_block(p)


def oracle_hamming_nocsi_block(snr_db: float) -> float:
    p = oracle_orth_noncoherent_bler(SnrPoint(snr_db, 4 / 7, coded=True))
    return hamming_hard_block(p)


# -- end-to-end baseline chains ----------------------------------------------
#
# A chain maps a batch of message indices to decoded indices through a fresh
# channel draw.  Chip/symbol energy is 1 in every chain.


class _Chain:
    num_messages: int
    label: str
    coded: bool = False
    rate: float = 1.0

    def __init__(self, fading: FadingSpec | None = None):
        self.fading = fading if fading is not None else normalize_spec("rayleigh")

    def n0(self, snr_db: float) -> float:
        return noise_param(SnrPoint(snr_db, self.rate, coded=self.coded))

    def __repr__(self):
        return f"{type(self).__name__}({self.fading.kind})"


class OrthogonalChain(_Chain):
    """One bit per two channel uses, no CSI, energy detection.

    With ``bits > 1`` each bit of the message gets its own chip pair, so a
    message occupies ``2 * bits`` channel uses.
    """

    label = "orth_classical"

    def __init__(self, fading: FadingSpec | None = None, bits: int = 1):
        super().__init__(fading)
        if bits < 1:
            raise ValueError(f"bits must be positive, got {bits}")
        self.bits = bits
        self.num_messages = 2**bits
        if bits > 1:
            self.label = f"orth_classical_{bits}bit"

    def __call__(self, messages, snr_db, rng):
        chips = orth_encode(message_to_bits(messages, self.bits)).reshape(len(messages), -1)
        out = transmit(chips, self.fading, self.n0(snr_db), rng)
        detected = orth_detect(out.y.reshape(len(messages), self.bits, 2))
        return bits_to_message(detected)


class HammingNoCsiChain(_Chain):
    """Hamming(7,4), each coded bit sent with orthogonal signalling (14 uses), hard syndrome decoding."""

    num_messages = 16
    label = "hamming_hard_nocsi"
    coded = True
    rate = 4 / 7

    def __call__(self, messages, snr_db, rng):
        code = hamming_encode(message_to_bits(messages, 4))
        out = transmit(orth_encode(code), self.fading, self.n0(snr_db), rng)
        return bits_to_message(syndrome_decode(orth_detect(out.y)))


class UncodedCsirChain(_Chain):
    num_messages = 16
    label = "uncoded_csir"

    def __call__(self, messages, snr_db, rng):
        s = bpsk_map(message_to_bits(messages, 4))
        out = transmit(s, self.fading, self.n0(snr_db), rng, mode="csir")
        return bits_to_message(bpsk_detect(coherent_combine(out.y, out.h)))


class HammingHardCsirChain(_Chain):
    num_messages = 16
    label = "hamming_hard_csir"
    coded = True
    rate = 4 / 7

    def __call__(self, messages, snr_db, rng):
        s = bpsk_map(hamming_encode(message_to_bits(messages, 4)))
        out = transmit(s, self.fading, self.n0(snr_db), rng, mode="csir")
        return bits_to_message(syndrome_decode(bpsk_detect(coherent_combine(out.y, out.h))))


class HammingMldCsirChain(_Chain):
    num_messages = 16
    label = "hamming_mld_csir"
    coded = True
    rate = 4 / 7

    def __call__(self, messages, snr_db, rng):
        s = bpsk_map(hamming_encode(message_to_bits(messages, 4)))
        out = transmit(s, self.fading, self.n0(snr_db), rng, mode="csir")
        return bits_to_message(hamming_soft_mld(out.y, out.h))


BASELINES = {
    cls.label: cls
    for cls in (OrthogonalChain, HammingNoCsiChain, UncodedCsirChain, HammingHardCsirChain, HammingMldCsirChain)
}


def baseline(name: str, fading: FadingSpec | None = None):
    try:
        return BASELINES[name](fading)
    except KeyError:
        raise ValueError(f"unknown baseline {name!r}; choose from {sorted(BASELINES)}") from None
