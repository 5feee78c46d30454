"""Short block codes for fading channels, learned end to end or built classically."""

from .autoencoder import AutoencoderConfig, LearnedChain, codebook, load_system, save_system, train, train_with_restarts
from .classical import baseline
from .evaluation import analyze_codebook, estimate_bler, render_codebook, sweep
from .numerics import make_rng, normalize_spec, sample_fading

__version__ = "0.1.0"
