"""Rebuild the reference tables and BLER figures from scratch.

Each target trains the learned systems it needs (with fixed seed lists),
sweeps them next to the classical baselines and writes one CSV per curve,
a text dump of any codebooks and an SVG plot into ``out/<target>/``.
Trained models are cached under ``out/models/`` for the lifetime of a
:class:`Reproducer`, so ``table1`` and ``fig1`` share their training runs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import autoencoder as ae
from . import classical
from .evaluation import BlerCurve, analyze_codebook, default_grid, render_codebook, sweep
from .numerics import normalize_spec

log = logging.getLogger(__name__)

TARGETS = ("table1", "table2", "table3", "fig1", "fig2", "fig3", "fig4")
DISTRIBUTIONS = ("rayleigh", "custom", "gamma", "gumbel", "folded_normal")

# no-CSI systems: the encoder is frozen while the decoder warms up, and a
# wider decoder is used; without this M=2 codes collapse onto one chip
NO_CSI = dict(warmup_steps=5000, decoder_hidden=(64, 32))
# longer codes have single-chip local minima: keep the best of three seeds
RESTART_SEEDS = (0, 1, 2)

CLASSICAL_TRIALS = 1_000_000
LEARNED_TRIALS = 100_000


@dataclass(frozen=True)
class Recipe:
    name: str
    label: str
    config: ae.AutoencoderConfig
    seeds: tuple[int, ...] = (0,)


def no_csi_recipe(M: int, n: int, train_snr_db: float, fading: str = "rayleigh") -> Recipe:
    cfg = ae.AutoencoderConfig(M=M, n=n, fading=fading, train_snr_db=train_snr_db, **NO_CSI)
    seeds = (0,) if n <= 2 else RESTART_SEEDS
    return Recipe(f"nocsi_{fading}_M{M}_n{n}_{train_snr_db:g}dB", f"Learned, n={n}", cfg, seeds)


def fig1_recipes() -> list[Recipe]:
    return [no_csi_recipe(2, n, 7.0) for n in (2, 3, 4, 5)]


def fig2_recipes() -> list[Recipe]:
    return [no_csi_recipe(4, n, 10.0) for n in (4, 5, 6, 7, 8)]


def fig3_recipes() -> list[Recipe]:
    out = []
    for kind in DISTRIBUTIONS:
        r = no_csi_recipe(2, 2, 10.0, kind)
        out.append(Recipe(r.name, kind, r.config, r.seeds))
    return out


CSIR_RECIPE = Recipe(
    "csir_rayleigh_M16_n7_7dB", "Learned, fading with CSIR", ae.AutoencoderConfig(M=16, n=7, mode="csir", train_snr_db=7.0)
)
AWGN_RECIPE = Recipe(
    "awgn_M16_n7_7dB", "Learned, AWGN", ae.AutoencoderConfig(M=16, n=7, mode="awgn", train_snr_db=7.0)
)


def fig4_grid() -> np.ndarray:
    return default_grid(30)


class ReproduceError(RuntimeError):
    """A sub-step failed; the message names it."""


@dataclass
class Reproducer:
    out: Path
    seed: int = 0
    classical_trials: int = CLASSICAL_TRIALS
    learned_trials: int = LEARNED_TRIALS
    grid: np.ndarray | None = None
    plot: bool = True
    workers: int = 1
    _models: dict = field(default_factory=dict)

    def __post_init__(self):
        self.out = Path(self.out)

    # -- building blocks ---------------------------------------------------

    def system(self, recipe: Recipe) -> ae.TrainedSystem:
        if recipe.name not in self._models:
            log.info("training %s (seeds %s)", recipe.name, recipe.seeds)
            try:
                system = ae.train_with_restarts(recipe.config, recipe.seeds)
            except ae.TrainingError as exc:
                raise ReproduceError(f"training {recipe.name}: {exc}") from exc
            models = self.out / "models"
            models.mkdir(parents=True, exist_ok=True)
            ae.save_system(system, models / f"{recipe.name}.fcnn")
            self._models[recipe.name] = system
        return self._models[recipe.name]

    def _grid(self, default) -> np.ndarray:
        return default if self.grid is None else np.asarray(self.grid, dtype=float)

    def _sweep(self, chain, grid, trials, label) -> BlerCurve:
        try:
            return sweep(chain, grid, trials, seed=self.seed, label=label, workers=self.workers)
        except Exception as exc:
            raise ReproduceError(f"evaluating {label}: {exc}") from exc

    def _write_curves(self, target: str, curves: dict[str, BlerCurve], title: str) -> Path:
        d = self.out / target
        d.mkdir(parents=True, exist_ok=True)
        for stem, curve in curves.items():
            (d / f"{stem}.csv").write_text(curve.to_csv())
        if self.plot:
            plot_curves(list(curves.values()), d / f"{target}.svg", title)
        return d

    def _write_codebooks(self, target: str, recipes: list[Recipe]) -> Path:
        d = self.out / target
        d.mkdir(parents=True, exist_ok=True)
        blocks = []
        for r in recipes:
            s = self.system(r)
            cb = ae.codebook(s)
            report = analyze_codebook(cb)
            blocks.append(f"# {r.name} (seed {s.config.seed})\n{render_codebook(cb)}\n{report.summary()}\n")
        path = d / "codebooks.txt"
        path.write_text("\n".join(blocks))
        return path

    def _learned_curves(self, recipes, grid, key=lambda r: r.name):
        return {
            key(r): self._sweep(ae.LearnedChain(self.system(r), label=r.label), grid, self.learned_trials, r.label)
            for r in recipes
        }

    # -- targets ---------------------------------------------------------------

    def table1(self) -> Path:
        return self._write_codebooks("table1", fig1_recipes())

    def table2(self) -> Path:
        return self._write_codebooks("table2", fig2_recipes()[:3])

    def table3(self) -> Path:
        return self._write_codebooks("table3", fig3_recipes())

    def fig1(self) -> Path:
        grid = self._grid(default_grid())
        curves = {
            "classical_n2": self._sweep(classical.OrthogonalChain(), grid, self.classical_trials, "Classical, n=2"),
            "hamming_hard_nocsi": self._sweep(
                classical.HammingNoCsiChain(), grid, self.classical_trials, "(7,4) Hamming (Hard)"
            ),
        }
        curves.update(self._learned_curves(fig1_recipes(), grid))
        return self._write_curves("fig1", curves, "M=2, no CSI, trained at 7 dB")

    def fig2(self) -> Path:
        grid = self._grid(default_grid())
        curves = {
            "classical_n4": self._sweep(
                classical.OrthogonalChain(bits=2), grid, self.classical_trials, "Classical, n=4"
            ),
            "hamming_hard_nocsi": self._sweep(
                classical.HammingNoCsiChain(), grid, self.classical_trials, "(7,4) Hamming (Hard)"
            ),
        }
        curves.update(self._learned_curves(fig2_recipes(), grid))
        return self._write_curves("fig2", curves, "M=4, no CSI, trained at 10 dB")

    def fig3(self) -> Path:
        grid = self._grid(default_grid())
        curves = self._learned_curves(fig3_recipes(), grid, key=lambda r: r.config.fading)
        return self._write_curves("fig3", curves, "M=2, n=2, no CSI, trained at 10 dB")

    def fig4(self) -> Path:
        grid = self._grid(fig4_grid())
        rayleigh = normalize_spec("rayleigh")
        curves = {
            "uncoded": self._sweep(classical.UncodedCsirChain(), grid, self.classical_trials, "Uncoded"),
            "hamming_hard_csir": self._sweep(
                classical.HammingHardCsirChain(), grid, self.classical_trials, "(7,4) Hamming (Hard)"
            ),
            "hamming_mld_csir": self._sweep(
                classical.HammingMldCsirChain(), grid, self.classical_trials, "(7,4) Hamming (MLD)"
            ),
            "learned_csir": self._sweep(
                ae.LearnedChain(self.system(CSIR_RECIPE)), grid, self.learned_trials, CSIR_RECIPE.label
            ),
            "learned_awgn": self._sweep(
                ae.LearnedChain(self.system(AWGN_RECIPE), fading=rayleigh), grid, self.learned_trials, AWGN_RECIPE.label
            ),
        }
        return self._write_curves("fig4", curves, "M=16, n=7, CSIR, trained at 7 dB")

    def run(self, target: str) -> Path:
        if target not in TARGETS:
            raise ValueError(f"unknown target {target!r}; choose from {', '.join(TARGETS)}")
        return getattr(self, target)()


def plot_curves(curves: list[BlerCurve], path, title: str = "") -> Path:
    """Log-scale BLER plot as a standalone SVG (byte-stable across runs)."""
    import matplotlib

    matplotlib.use("Agg")
    from matplotlib import pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "fadingcodes", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        for c in curves:
            keep = c.bler > 0
            ax.semilogy(c.snr_db[keep], c.bler[keep], marker="o", markersize=3, label=c.system_label)
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("BLER")
        ax.set_title(title)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return Path(path)
