"""Command-line experiment runner.

    fadingcodes train     [--config FILE] [--out DIR] [--seed S]
    fadingcodes eval      MODEL_OR_BASELINE [--grid lo:hi:count] [--trials N] ...
    fadingcodes analyze   MODEL
    fadingcodes reproduce TARGET [TARGET ...]

Settings come from command-line flags, then the ``[train]``, ``[eval]``,
``[analyze]`` or ``[reproduce]`` section of an INI file, then built-in
defaults.  Exit status: 0 success, 2 usage or config error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import autoencoder as ae
from . import classical, neural, reproduce
from .evaluation import analyze_codebook, default_grid, render_codebook, sweep
from .numerics import normalize_spec

OUT_ENV = "FADINGCODES_OUT"
DEFAULT_OUT = "results"

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3


class UsageError(Exception):
    pass


# -- value parsing -------------------------------------------------------------


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:count`` -> ``count`` equispaced SNRs in dB."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must look like lo:hi:count, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid must look like lo:hi:count, got {text!r}") from None
    if count < 1:
        raise UsageError("grid is empty (count must be at least 1)")
    return default_grid(count, lo, hi)


def _int_tuple(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(" ", "").split(",") if v)


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "yes", "true", "on"):
        return True
    if low in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_AE_TYPES = {
    "M": int,
    "n": int,
    "mode": str,
    "fading": str,
    "gamma_shape": float,
    "train_snr_db": float,
    "steps": int,
    "batch_size": int,
    "lr": float,
    "seed": int,
    "warmup_steps": int,
    "encoder_hidden": _int_tuple,
    "decoder_hidden": _int_tuple,
}
assert set(_AE_TYPES) == {f.name for f in dataclasses.fields(ae.AutoencoderConfig)}

SCHEMA = {
    "train": {**_AE_TYPES, "out": str, "name": str, "restart_seeds": _int_tuple},
    "eval": {
        "target": str,
        "grid": parse_grid,
        "trials": int,
        "seed": int,
        "fading": str,
        "label": str,
        "workers": int,
        "out": str,
    },
    "analyze": {"model": str},
    "reproduce": {
        "targets": lambda s: tuple(s.split()),
        "grid": parse_grid,
        "trials": int,
        "learned_trials": int,
        "seed": int,
        "plot": _bool,
        "workers": int,
        "out": str,
    },
}


def read_config(path, command: str) -> dict:
    """Typed settings for ``command`` from an INI file.

    Unknown sections and keys are errors.  Keys are case-sensitive.
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except configparser.MissingSectionHeaderError as exc:
        raise UsageError(f"{path}:{exc.lineno}: no [section] header before {exc.line.strip()!r}") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise UsageError(f"{path}:{lineno}: cannot parse {line.strip()!r} (expected key = value)") from None
    except configparser.Error as exc:
        raise UsageError(f"config {path}: {exc}") from None
    for section in parser.sections():
        if section not in SCHEMA:
            raise UsageError(f"config {path}: unknown section [{section}]")
    if not parser.has_section(command):
        return {}
    schema = SCHEMA[command]
    out = {}
    for key, raw in parser.items(command):
        if key not in schema:
            raise UsageError(f"config {path}: unknown key {key!r} in [{command}]")
        try:
            out[key] = schema[key](raw)
        except (ValueError, UsageError) as exc:
            raise UsageError(f"config {path}: bad value for {key!r}: {exc}") from None
    return out


def _settings(args, command: str) -> dict:
    settings = read_config(args.config, command) if args.config else {}
    for key in ("out", "seed", "trials"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if getattr(args, "grid", None) is not None:
        settings["grid"] = parse_grid(args.grid)
    return settings


def _out_dir(settings) -> Path:
    return Path(settings.get("out") or os.environ.get(OUT_ENV) or DEFAULT_OUT)


# -- commands ----------------------------------------------------------------


def cmd_train(args) -> int:
    s = _settings(args, "train")
    if "trials" in s:
        raise UsageError("train does not take --trials")
    fields = {k: v for k, v in s.items() if k in _AE_TYPES}
    try:
        config = ae.AutoencoderConfig(**fields)
        config.fading_spec  # rejects unknown fading kinds early
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    seeds = s.get("restart_seeds")
    system = ae.train_with_restarts(config, seeds) if seeds else ae.train(config)
    out = _out_dir(s)
    out.mkdir(parents=True, exist_ok=True)
    name = s.get("name") or f"{config.mode}_M{config.M}_n{config.n}"
    path = ae.save_system(system, out / f"{name}{neural.FILE_EXTENSION}")
    trace = "step,loss\n" + "".join(f"{i},{v!r}\n" for i, v in enumerate(system.loss_trace.tolist()))
    (out / f"{name}_loss.csv").write_text(trace)
    print(f"final loss {system.final_loss:.5f}; wrote {path}")
    return EXIT_OK


def _eval_chain(target: str, fading: str | None):
    spec = None
    if fading is not None:
        try:
            spec = normalize_spec(fading)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if target in classical.BASELINES:
        return classical.baseline(target, spec)
    path = Path(target)
    if not path.exists():
        raise UsageError(
            f"{target!r} is neither a model file nor a baseline ({', '.join(sorted(classical.BASELINES))})"
        )
    system = ae.load_system(path)
    return ae.LearnedChain(system, fading=spec)


def cmd_eval(args) -> int:
    s = _settings(args, "eval")
    target = args.target or s.get("target")
    if not target:
        raise UsageError("eval needs a model file or baseline name")
    chain = _eval_chain(target, s.get("fading"))
    grid = s.get("grid", default_grid())
    trials = s.get("trials", 10**6 if target in classical.BASELINES else 10**5)
    if trials < 1:
        raise UsageError("trials must be positive")
    curve = sweep(chain, grid, trials, seed=s.get("seed", 0), label=s.get("label"), workers=s.get("workers", 1))
    out = _out_dir(s)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{curve.system_label}.csv"
    path.write_text(curve.to_csv())
    sys.stdout.write(curve.to_csv())
    return EXIT_OK


def cmd_analyze(args) -> int:
    s = _settings(args, "analyze")
    model = args.model or s.get("model")
    if not model:
        raise UsageError("analyze needs a model file")
    system = ae.load_system(model)
    cb = ae.codebook(system)
    print(render_codebook(cb))
    print(analyze_codebook(cb).summary())
    return EXIT_OK


def cmd_reproduce(args) -> int:
    s = _settings(args, "reproduce")
    targets = list(args.targets) or list(s.get("targets", ()))
    if targets == ["all"]:
        targets = list(reproduce.TARGETS)
    if not targets:
        raise UsageError(f"reproduce needs a target: {', '.join(reproduce.TARGETS)} or all")
    bad = [t for t in targets if t not in reproduce.TARGETS]
    if bad:
        raise UsageError(f"unknown target {bad[0]!r}; choose from {', '.join(reproduce.TARGETS)}")
    r = reproduce.Reproducer(
        _out_dir(s),
        seed=s.get("seed", 0),
        classical_trials=s.get("trials", reproduce.CLASSICAL_TRIALS),
        learned_trials=s.get("learned_trials", reproduce.LEARNED_TRIALS),
        grid=s.get("grid"),
        plot=s.get("plot", True),
        workers=s.get("workers", 1),
    )
    for t in targets:
        print(f"{t}: {r.run(t)}")
    return EXIT_OK


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fadingcodes", description="Learned short codes for fading channels.")
    p.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    # -v is also accepted after the subcommand
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, trials=True, grid=True):
        sp.add_argument("--config", help="INI file; see README for the grammar")
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
        sp.add_argument("--seed", type=int, help="master seed")
        if trials:
            sp.add_argument("--trials", type=int, help="Monte Carlo trials per SNR point")
        if grid:
            sp.add_argument("--grid", help="SNR grid lo:hi:count in dB")

    sp = sub.add_parser("train", parents=[shared], help="train an autoencoder")
    common(sp, trials=False, grid=False)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("eval", parents=[shared], help="BLER sweep of a model or baseline")
    sp.add_argument("target", nargs="?", help=f"model file or one of {', '.join(classical.BASELINES)}")
    common(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("analyze", parents=[shared], help="print a model's codebook and Gram analysis")
    sp.add_argument("model", nargs="?")
    sp.add_argument("--config")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("reproduce", parents=[shared], help="rebuild the reference tables and figures")
    sp.add_argument("targets", nargs="*", help=f"{', '.join(reproduce.TARGETS)} or all")
    common(sp)
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fadingcodes {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except neural.FormatError as exc:
        print(f"fadingcodes {args.command}: format error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ae.TrainingError, reproduce.ReproduceError, OSError) as exc:
        print(f"fadingcodes {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
