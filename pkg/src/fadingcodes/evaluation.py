"""Monte Carlo block error rates, SNR sweeps and codebook structure.

A *chain* is any callable ``chain(messages, snr_db, rng) -> decoded`` with a
``num_messages`` attribute (see :mod:`fadingcodes.classical` and
:class:`fadingcodes.autoencoder.LearnedChain`).

Trials are simulated in fixed-size blocks and block ``b`` of grid point ``i``
always draws from stream ``(seed, i, b)``.  Results therefore do not depend
on how blocks are grouped or on how many workers run them.
"""

from __future__ import annotations

import csv
import io
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .numerics import make_rng

BLOCK = 1 << 16
CSV_HEADER = ("snr_db", "bler", "trials", "stderr", "label")

ORTHOGONAL_BELOW = 0.05
NON_ORTHOGONAL_ABOVE = 0.8


def indicator(m, m_hat):
    """0 where the message was recovered, 1 otherwise."""
    return (np.asarray(m) != np.asarray(m_hat)).astype(np.int64)


def binomial_stderr(p: float, trials: int) -> float:
    return math.sqrt(p * (1.0 - p) / trials) if trials else math.nan


class Estimate(NamedTuple):
    bler: float
    stderr: float
    trials: int


def _block_counts(chain, snr_db, trials, seed, stream, blocks, bits_per_message):
    errors = bit_errors = 0
    for b in blocks:
        size = min(BLOCK, trials - b * BLOCK)
        rng = make_rng(seed, *stream, b)
        m = rng.integers(chain.num_messages, size=size)
        m_hat = np.asarray(chain(m, snr_db, rng))
        errors += int(indicator(m, m_hat).sum())
        if bits_per_message:
            diff = np.bitwise_xor(m, m_hat.astype(np.int64))
            bit_errors += int(sum(((diff >> i) & 1).sum() for i in range(bits_per_message)))
    return errors, bit_errors


def count_errors(chain, snr_db: float, trials: int, seed: int = 0, stream=(0,), blocks=None, bits_per_message=0):
    """Raw ``(block_errors, bit_errors)`` over the given trial blocks (default: all)."""
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    nblocks = -(-trials // BLOCK)
    blocks = range(nblocks) if blocks is None else blocks
    return _block_counts(chain, snr_db, trials, seed, tuple(stream), blocks, bits_per_message)


def estimate_bler(chain, snr_db: float, trials: int, seed: int = 0, stream=(0,)) -> Estimate:
    """Empirical BLER: mean indicator over ``trials`` uniformly drawn messages."""
    errors, _ = count_errors(chain, snr_db, trials, seed, stream)
    p = errors / trials
    return Estimate(p, binomial_stderr(p, trials), trials)


def estimate_bit_error_rate(chain, snr_db: float, trials: int, seed: int = 0, stream=(0,)) -> Estimate:
    """Fraction of wrong data bits, reading message indices as ``log2 M`` bits.

    Uses the same random streams as :func:`estimate_bler`.  The reported
    stderr treats the bits as independent, which understates it.
    """
    k = int(round(math.log2(chain.num_messages)))
    _, bit_errors = count_errors(chain, snr_db, trials, seed, stream, bits_per_message=k)
    p = bit_errors / (trials * k)
    return Estimate(p, binomial_stderr(p, trials * k), trials)


def default_grid(count: int = 20, lo: float = -2.0, hi: float = 20.0) -> np.ndarray:
    return np.linspace(lo, hi, count)


@dataclass
class BlerPoint:
    snr_db: float
    bler: float
    trials: int
    stderr: float


@dataclass
class BlerCurve:
    points: list[BlerPoint] = field(default_factory=list)
    system_label: str = ""

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    @property
    def bler(self) -> np.ndarray:
        return np.array([p.bler for p in self.points])

    @property
    def stderr(self) -> np.ndarray:
        return np.array([p.stderr for p in self.points])

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(CSV_HEADER)
        for p in self.points:
            w.writerow([repr(float(p.snr_db)), repr(float(p.bler)), p.trials, repr(float(p.stderr)), self.system_label])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "BlerCurve":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(rows[0]) != CSV_HEADER:
            raise ValueError(f"expected CSV header {','.join(CSV_HEADER)}")
        curve = cls()
        for r in rows[1:]:
            curve.points.append(BlerPoint(float(r[0]), float(r[1]), int(r[2]), float(r[3])))
            curve.system_label = r[4]
        return curve


def sweep(chain, snr_grid, trials_per_point: int, seed: int = 0, label: str | None = None, workers: int = 1) -> BlerCurve:
    """BLER at every grid point; point ``i`` owns random stream ``(seed, i)``."""
    grid = [float(s) for s in snr_grid]
    if not grid:
        raise ValueError("SNR grid is empty")

    def run(i):
        return estimate_bler(chain, grid[i], trials_per_point, seed, stream=(i,))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, range(len(grid))))
    else:
        results = [run(i) for i in range(len(grid))]
    label = label if label is not None else getattr(chain, "label", type(chain).__name__)
    points = [BlerPoint(s, r.bler, r.trials, r.stderr) for s, r in zip(grid, results)]
    return BlerCurve(points, label)


# -- codebook structure ------------------------------------------------------


@dataclass
class GramReport:
    gram: np.ndarray
    energies: np.ndarray
    max_offdiag_normalized: float
    classification: str

    def summary(self) -> str:
        return f"max |<ci,cj>|/n = {self.max_offdiag_normalized:.4f} -> {self.classification}"


def analyze_codebook(codebook) -> GramReport:
    """Gram matrix of the codewords and an orthogonality verdict.

    Off-diagonal magnitudes are divided by the block length ``n`` (the
    nominal codeword energy): below 0.05 is orthogonal, above 0.8 is not,
    anything in between is left indeterminate.
    """
    cb = np.atleast_2d(np.asarray(codebook, dtype=float))
    n = cb.shape[1]
    gram = cb @ cb.T
    off = np.abs(gram[~np.eye(len(cb), dtype=bool)])
    worst = float(off.max() / n) if off.size else 0.0
    if worst < ORTHOGONAL_BELOW:
        verdict = "orthogonal"
    elif worst > NON_ORTHOGONAL_ABOVE:
        verdict = "non_orthogonal"
    else:
        verdict = "indeterminate"
    return GramReport(gram, np.diag(gram).copy(), worst, verdict)


def _fmt(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def render_codebook(codebook) -> str:
    """One bracketed row per codeword, entries to two decimals."""
    cb = np.atleast_2d(np.asarray(codebook, dtype=float))
    return "\n".join("[" + ", ".join(_fmt(v) for v in row) + "]" for row in cb)


def parse_codebook(text: str) -> np.ndarray:
    rows = re.findall(r"\[([^\]]*)\]", text)
    return np.array([[float(v) for v in r.split(",")] for r in rows])
