"""End-to-end learned codes: encoder, stochastic channel layer, decoder.

The encoder maps a one-hot message to a real length-``n`` codeword of energy
``n``.  The channel layer multiplies by fresh fading coefficients and adds
noise; in the backward pass ``h`` and ``w`` are treated as constants.  The
decoder sees ``[y_r; y_i]`` (no CSI), ``[y_r; y_i; h_r; h_i]`` (CSIR) or the
real output ``y`` (AWGN).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import neural
from .channel import SnrPoint, code_rate, noise_param, transmit, transmit_awgn
from .numerics import FadingSpec, make_rng, normalize_spec

log = logging.getLogger(__name__)

MODES = ("no_csi", "csir", "awgn")

# stream ids under the config seed
_INIT_STREAM = 0
_TRAIN_STREAM = 1
_VALID_STREAM = 2


class TrainingError(RuntimeError):
    def __init__(self, step: int, message: str):
        super().__init__(f"training failed at step {step}: {message}")
        self.step = step


@dataclass
class AutoencoderConfig:
    M: int = 2
    n: int = 2
    mode: str = "no_csi"
    fading: str = "rayleigh"
    gamma_shape: float = 2.0
    train_snr_db: float = 7.0
    steps: int = 20_000
    batch_size: int = 256
    lr: float = 1e-3
    seed: int = 0
    warmup_steps: int = 0
    encoder_hidden: tuple[int, ...] | None = None
    decoder_hidden: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.M < 2:
            raise ValueError(f"M must be at least 2, got {self.M}")
        if self.n < 1:
            raise ValueError(f"n must be at least 1, got {self.n}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.steps < 0 or self.warmup_steps < 0:
            raise ValueError("steps and warmup_steps must be non-negative")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.encoder_hidden is None:
            self.encoder_hidden = (4 * self.M,)
        if self.decoder_hidden is None:
            self.decoder_hidden = (8 * self.M, 4 * self.M)
        self.encoder_hidden = tuple(int(w) for w in self.encoder_hidden)
        self.decoder_hidden = tuple(int(w) for w in self.decoder_hidden)

    @property
    def rate(self) -> float:
        return code_rate(self.M, self.n)

    @property
    def fading_spec(self) -> FadingSpec:
        if self.fading == "gamma":
            return normalize_spec("gamma", k=self.gamma_shape)
        return normalize_spec(self.fading)

    def train_n0(self) -> float:
        return noise_param(SnrPoint(self.train_snr_db, self.rate, coded=True))


def feature_dim(mode: str, n: int) -> int:
    return {"no_csi": 2 * n, "csir": 4 * n, "awgn": n}[mode]


def _mlp(sizes, rng, tail):
    layers = []
    for i, (a, b) in enumerate(zip(sizes[:-1], sizes[1:])):
        hidden = i < len(sizes) - 2
        layers.append(neural.Dense.init(a, b, rng, gain=2.0 if hidden else 1.0))
        if hidden:
            layers.append(neural.ReLU())
    layers.append(tail)
    return neural.Network(layers)


def build_encoder(config: AutoencoderConfig, rng) -> neural.Network:
    sizes = [config.M, *config.encoder_hidden, config.n]
    return _mlp(sizes, rng, neural.EnergyNormalize(config.n))


def build_decoder(config: AutoencoderConfig, rng) -> neural.Network:
    sizes = [feature_dim(config.mode, config.n), *config.decoder_hidden, config.M]
    net = _mlp(sizes, rng, neural.Softmax())
    # zero logits: an untrained decoder predicts uniformly
    net.layers[-2].W[...] = 0.0
    return net


@dataclass
class TrainedSystem:
    encoder: neural.Network
    decoder: neural.Network
    config: AutoencoderConfig
    final_loss: float = float("nan")
    loss_trace: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def M(self) -> int:
        return self.config.M

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def mode(self) -> str:
        return self.config.mode


def untrained_system(config: AutoencoderConfig) -> TrainedSystem:
    rng = make_rng(config.seed, _INIT_STREAM)
    return TrainedSystem(build_encoder(config, rng), build_decoder(config, rng), config)


def encode_message(system: TrainedSystem, m: int) -> np.ndarray:
    if not 0 <= m < system.M:
        raise ValueError(f"message {m} out of range [0, {system.M})")
    return system.encoder(np.eye(system.M)[m : m + 1])[0]


def codebook(system: TrainedSystem) -> np.ndarray:
    """All ``M`` codewords as an ``(M, n)`` array."""
    return system.encoder(np.eye(system.M))


def channel_layer_backward(h, dy_r, dy_i=None):
    """Gradient w.r.t. the transmitted codeword through ``y = h c + w``.

    ``h=None`` means the real AWGN channel, where ``dL/dc = dL/dy``.
    """
    if h is None:
        return np.asarray(dy_r, dtype=float)
    return h.real * dy_r + h.imag * dy_i


def decoder_features(mode: str, y, h=None) -> np.ndarray:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if (h is not None) != (mode == "csir"):
        raise ValueError(f"mode {mode!r} {'requires' if mode == 'csir' else 'does not take'} h")
    y = np.asarray(y)
    if mode == "awgn":
        return np.real(y).astype(float)
    parts = [y.real, y.imag]
    if mode == "csir":
        h = np.asarray(h)
        parts += [h.real, h.imag]
    return np.concatenate(parts, axis=-1)


def decode_probabilities(system: TrainedSystem, features) -> np.ndarray:
    features = np.atleast_2d(features)
    expected = feature_dim(system.mode, system.n)
    if features.shape[-1] != expected:
        raise ValueError(f"decoder for mode {system.mode!r} expects {expected} features, got {features.shape[-1]}")
    return system.decoder(features)


def decode(system: TrainedSystem, features) -> np.ndarray:
    """Most probable message per row; ``argmax`` breaks ties toward index 0."""
    return np.argmax(decode_probabilities(system, features), axis=-1)


def _channel_forward(config, spec, c, n0, rng):
    if config.mode == "awgn":
        y = transmit_awgn(c, n0, rng)
        return decoder_features("awgn", y), None
    out = transmit(c, spec, n0, rng, mode="csir")
    h = out.h
    feats = decoder_features(config.mode, out.y, h if config.mode == "csir" else None)
    return feats, h


def _backward_features(config, dfeat, h):
    n = config.n
    if config.mode == "awgn":
        return channel_layer_backward(None, dfeat)
    # h-feature gradients (csir) are discarded: h does not depend on c
    return channel_layer_backward(h, dfeat[:, :n], dfeat[:, n : 2 * n])


def train_step(system: TrainedSystem, messages, rng, n0: float, spec: FadingSpec):
    """Forward + backward for one batch; returns the loss, gradients left on the layers."""
    config = system.config
    onehot = np.eye(config.M)[messages]
    c, enc_cache = system.encoder.forward(onehot)
    feats, h = _channel_forward(config, spec, c, n0, rng)
    logits, dec_cache = system.decoder.forward(feats, system.decoder.body)
    loss, _, dlogits = neural.softmax_cross_entropy(logits, onehot)
    dfeat = system.decoder.backward(dec_cache, dlogits, system.decoder.body)
    dc = _backward_features(config, dfeat, h)
    system.encoder.backward(enc_cache, dc)
    return loss


def train(config: AutoencoderConfig, progress_every: int = 0) -> TrainedSystem:
    """Train encoder and decoder jointly through the simulated channel.

    Every step draws ``batch_size`` uniform messages and fresh channel
    realisations at the training SNR (coded ``N0`` with ``R = log2 M / n``).
    """
    system = untrained_system(config)
    spec = config.fading_spec
    n0 = config.train_n0()
    rng = make_rng(config.seed, _TRAIN_STREAM)
    params = system.encoder.params() + system.decoder.params()
    opt = neural.Adam(params, lr=config.lr)
    trace = np.empty(config.steps)
    for step in range(config.steps):
        messages = rng.integers(config.M, size=config.batch_size)
        try:
            loss = train_step(system, messages, rng, n0, spec)
        except neural.DegenerateNormError as exc:
            raise TrainingError(step, str(exc)) from exc
        if not np.isfinite(loss):
            raise TrainingError(step, f"non-finite loss {loss}")
        trace[step] = loss
        enc_grads = system.encoder.grads()
        if step < config.warmup_steps:
            # decoder-only warm-up: the encoder keeps its initial codebook
            enc_grads = [np.zeros_like(g) for g in enc_grads]
        opt.step(enc_grads + system.decoder.grads())
        if progress_every and step % progress_every == 0:
            log.info("step %d loss %.5f", step, loss)
    system.loss_trace = trace
    if config.steps:
        system.final_loss = float(np.mean(trace[-min(100, config.steps) :]))
    else:
        # loss of the untrained system on one fresh batch
        messages = rng.integers(config.M, size=config.batch_size)
        system.final_loss = float(train_step(system, messages, rng, n0, spec))
    return system


def validation_loss(system: TrainedSystem, trials: int = 50_000, seed: int = 0) -> float:
    """Cross-entropy at the training SNR on a held-out draw shared by every seed."""
    config = system.config
    rng = make_rng(seed, _VALID_STREAM)
    messages = rng.integers(config.M, size=trials)
    onehot = np.eye(config.M)[messages]
    c, _ = system.encoder.forward(onehot)
    feats, _ = _channel_forward(config, config.fading_spec, c, config.train_n0(), rng)
    return float(neural.softmax_cross_entropy(system.decoder.logits(feats), onehot)[0])


def train_with_restarts(config: AutoencoderConfig, seeds) -> TrainedSystem:
    """Train once per seed and keep the system with the lowest validation loss.

    Ties go to the earlier seed.  Seeds that raise :class:`TrainingError`
    are skipped; if all of them fail the last error is re-raised.
    """
    best, best_loss, error = None, math.inf, None
    for seed in seeds:
        try:
            system = train(replace(config, seed=int(seed)))
        except TrainingError as exc:
            error = exc
            log.warning("seed %d: %s", seed, exc)
            continue
        loss = validation_loss(system)
        log.info("seed %d validation loss %.5f", seed, loss)
        if loss < best_loss:
            best, best_loss = system, loss
    if best is None:
        if error is None:
            raise ValueError("no seeds given")
        raise error
    return best


def transfer_awgn_to_fading(system: TrainedSystem, y, h) -> np.ndarray:
    """Decode fading-channel outputs with an AWGN-trained decoder.

    Each symbol is derotated by its known coefficient, ``z = Re(conj(h) y) / |h|``,
    and ``z`` is fed to the decoder as if it came from the AWGN channel.
    """
    if system.mode != "awgn":
        raise ValueError("transfer decoding needs an AWGN-trained system")
    y = np.asarray(y)
    h = np.asarray(h)
    mag = np.abs(h)
    safe = np.where(mag < neural.NORM_FLOOR, 1.0, mag)
    z = np.where(mag < neural.NORM_FLOOR, 0.0, np.real(np.conj(h) * y) / safe)
    return decode(system, z)


class LearnedChain:
    """Message -> learned encoder -> fading channel -> decoder, for BLER estimation.

    ``fading`` defaults to the system's training distribution.  For an
    AWGN-trained system, ``fading`` switches on the transfer experiment:
    the codewords cross a CSIR fading channel and are derotated before decoding.
    """

    def __init__(self, system: TrainedSystem, fading: FadingSpec | None = None, label: str | None = None):
        self.system = system
        self.num_messages = system.M
        self.codebook = codebook(system)
        self.rate = system.config.rate
        if system.mode == "awgn":
            self.fading = fading
        else:
            self.fading = fading if fading is not None else system.config.fading_spec
        self.label = label or f"learned_{system.mode}_M{system.M}_n{system.n}"

    def __call__(self, messages, snr_db: float, rng) -> np.ndarray:
        n0 = noise_param(SnrPoint(snr_db, self.rate, coded=True))
        c = self.codebook[messages]
        s = self.system
        if s.mode == "awgn":
            if self.fading is None:
                return decode(s, transmit_awgn(c, n0, rng))
            out = transmit(c, self.fading, n0, rng, mode="csir")
            return transfer_awgn_to_fading(s, out.y, out.h)
        out = transmit(c, self.fading, n0, rng, mode=s.mode)
        return decode(s, decoder_features(s.mode, out.y, out.h))


# -- persistence -----------------------------------------------------------


def config_to_dict(config: AutoencoderConfig) -> dict:
    d = asdict(config)
    d["encoder_hidden"] = list(config.encoder_hidden)
    d["decoder_hidden"] = list(config.decoder_hidden)
    return d


def save_system(system: TrainedSystem, path) -> Path:
    """Write ``<path>`` (encoder then decoder streams) and a ``.json`` sidecar."""
    path = Path(path)
    path.write_bytes(neural.serialize(system.encoder) + neural.serialize(system.decoder))
    meta = {
        "mode": system.mode,
        "M": system.M,
        "n": system.n,
        "fading": system.config.fading,
        "train_snr_db": system.config.train_snr_db,
        "seed": system.config.seed,
        "final_loss": system.final_loss,
        "config": config_to_dict(system.config),
    }
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def load_system(path) -> TrainedSystem:
    path = Path(path)
    data = path.read_bytes()
    encoder, end = neural.deserialize(data, exact=False)
    decoder = neural.deserialize(data, end)
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        config = AutoencoderConfig(**meta["config"])
        final_loss = meta.get("final_loss", math.nan)
    else:
        n = encoder.n_out
        mode = {2 * n: "no_csi", 4 * n: "csir", n: "awgn"}.get(decoder.n_in)
        if mode is None:
            raise neural.FormatError("cannot infer channel mode from decoder input width")
        config = AutoencoderConfig(M=encoder.n_in, n=n, mode=mode)
        final_loss = math.nan
    if encoder.n_in != config.M or encoder.n_out != config.n:
        raise neural.FormatError("encoder shape disagrees with metadata")
    return TrainedSystem(encoder, decoder, config, final_loss)
