"""SNR bookkeeping and the memoryless fading channel ``y = h x + w``.

Noise convention: the real and imaginary noise components each have variance
``n0`` (total complex noise power ``2 n0``), with ``n0`` taken from
:func:`noise_param`.  Combined with ``E|h|^2 = 1`` this reproduces the
closed-form Rayleigh baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import FadingSpec, sample_fading

MODES = ("no_csi", "csir")


@dataclass(frozen=True)
class SnrPoint:
    snr_db: float
    rate: float = 1.0
    coded: bool = False

    @property
    def linear(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)


def code_rate(num_messages: int, n: int) -> float:
    return math.log2(num_messages) / n


def noise_param(snr: SnrPoint) -> float:
    """N0 for unit energy per coded bit.

    Uncoded: ``1 / (2 snr)``; coded: ``1 / (2 R snr)``.
    """
    if snr.coded:
        if not snr.rate > 0:
            raise ValueError(f"coded SNR point needs a positive rate, got {snr.rate}")
        return 1.0 / (2.0 * snr.rate * snr.linear)
    return 1.0 / (2.0 * snr.linear)


@dataclass
class ChannelOutput:
    y: np.ndarray
    h: np.ndarray | None
    n0: float


def transmit(codewords, spec: FadingSpec, n0: float, rng: np.random.Generator, mode: str = "no_csi") -> ChannelOutput:
    """Send real codewords (shape ``(..., n)``) through i.i.d. per-symbol fading.

    Fresh ``h`` and ``w`` are drawn for every symbol; ``h`` is drawn first so
    that ``no_csi`` and ``csir`` see identical outputs for the same stream.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if n0 < 0:
        raise ValueError(f"n0 must be non-negative, got {n0}")
    c = np.asarray(codewords, dtype=float)
    h = sample_fading(rng, spec, c.shape)
    sd = math.sqrt(n0)
    w = sd * rng.standard_normal(c.shape) + 1j * sd * rng.standard_normal(c.shape)
    y = h * c + w
    return ChannelOutput(y=y, h=h if mode == "csir" else None, n0=n0)


def transmit_awgn(codewords, n0: float, rng: np.random.Generator) -> np.ndarray:
    """Real AWGN channel, noise variance ``n0`` per symbol."""
    if n0 < 0:
        raise ValueError(f"n0 must be non-negative, got {n0}")
    c = np.asarray(codewords, dtype=float)
    return c + math.sqrt(n0) * rng.standard_normal(c.shape)
