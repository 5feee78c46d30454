"""Seeded random streams and the fading-coefficient distributions.

Every fading kind is parameterised so that each of the real and imaginary
components has variance 1/2.  Means are left alone, so the positive-support
kinds (gamma, folded normal) carry a nonzero mean on top of that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import optimize, special, stats

KINDS = ("rayleigh", "custom", "gamma", "gumbel", "folded_normal")
NONNEGATIVE_KINDS = ("gamma", "folded_normal")

# Not a fading model; a deterministic h = 1 used to check noiseless paths.
UNIT = "unit"

COMPONENT_VARIANCE = 0.5
DEFAULT_GAMMA_SHAPE = 2.0


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Return a PCG64 generator for ``(seed, *stream)``.

    Distinct stream tuples give independent generators (SeedSequence spawn
    keys), and the bit stream is identical on every platform.
    """
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(seq))


def sample_standard_normal(rng: np.random.Generator, size=None):
    # numpy's ziggurat sampler is exact
    return rng.standard_normal(size)


def sample_cscn(rng: np.random.Generator, total_variance: float, size=None):
    """Circularly symmetric complex normal with ``E|w|^2 = total_variance``."""
    if total_variance < 0:
        raise ValueError(f"total_variance must be non-negative, got {total_variance}")
    scale = math.sqrt(total_variance / 2.0)
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return scale * (re + 1j * im)


@dataclass(frozen=True)
class FadingSpec:
    kind: str
    params: Mapping[str, float] = field(default_factory=dict)
    per_component_variance: float = COMPONENT_VARIANCE

    def __getitem__(self, name: str) -> float:
        return self.params[name]

    @property
    def nonnegative(self) -> bool:
        return self.kind in NONNEGATIVE_KINDS


def _folded_normal_sigma(mu: float) -> float:
    if mu == 0.0:
        return math.sqrt(COMPONENT_VARIANCE / (1.0 - 2.0 / math.pi))

    def excess(sigma):
        return stats.foldnorm(abs(mu) / sigma, scale=sigma).var() - COMPONENT_VARIANCE

    # variance of |N(mu, s^2)| increases monotonically in s, from 0 up to s^2
    return optimize.brentq(excess, 1e-6, 50.0, xtol=1e-15)


def normalize_spec(kind: str, **free) -> FadingSpec:
    """Build a fading spec whose per-component variance is exactly 1/2.

    Free parameters: ``k`` (gamma shape, default 2), ``mu`` (gumbel location
    or folded-normal pre-fold mean, default 0).  Everything else is solved
    from the variance target.
    """
    kind = kind.lower()
    allowed = {"gamma": {"k"}, "gumbel": {"mu"}, "folded_normal": {"mu"}}.get(kind, set())
    if kind not in KINDS and kind != UNIT:
        raise ValueError(f"unknown fading kind {kind!r}; expected one of {KINDS}")
    extra = set(free) - allowed
    if extra:
        raise ValueError(f"unexpected parameters for {kind}: {sorted(extra)}")

    if kind == UNIT:
        return FadingSpec(UNIT, {}, 0.0)
    if kind == "rayleigh":
        params = {"sigma": math.sqrt(COMPONENT_VARIANCE)}
    elif kind == "custom":
        # Var(Y - Z) = 2 / lam^2 for Y, Z ~ Exp(lam)
        params = {"lam": math.sqrt(2.0 / COMPONENT_VARIANCE)}
    elif kind == "gamma":
        k = float(free.get("k", DEFAULT_GAMMA_SHAPE))
        if not k > 0:
            raise ValueError(f"gamma shape must be positive, got {k}")
        params = {"k": k, "theta": math.sqrt(COMPONENT_VARIANCE / k)}
    elif kind == "gumbel":
        params = {"mu": float(free.get("mu", 0.0)), "beta": math.sqrt(6.0 * COMPONENT_VARIANCE) / math.pi}
    else:
        mu = float(free.get("mu", 0.0))
        params = {"mu": mu, "sigma": _folded_normal_sigma(mu)}
    return FadingSpec(kind, params)


def _sample_component(rng: np.random.Generator, spec: FadingSpec, size):
    p = spec.params
    kind = spec.kind
    if kind == "rayleigh":
        return p["sigma"] * rng.standard_normal(size)
    if kind == "custom":
        scale = 1.0 / p["lam"]
        return rng.exponential(scale, size) - rng.exponential(scale, size)
    if kind == "gamma":
        # Marsaglia-Tsang rejection sampler
        return p["theta"] * rng.standard_gamma(p["k"], size)
    if kind == "gumbel":
        # density exp(z - e^z) / beta: the minimum-type Gumbel, mirror of numpy's
        return p["mu"] - p["beta"] * rng.gumbel(0.0, 1.0, size)
    if kind == "folded_normal":
        return np.abs(p["mu"] + p["sigma"] * rng.standard_normal(size))
    raise ValueError(f"unknown fading kind {kind!r}")


def sample_fading(rng: np.random.Generator, spec: FadingSpec, size=None):
    """Draw complex fading coefficients ``h_r + j h_i`` with i.i.d. components."""
    if spec.kind == UNIT:
        return np.ones(size, dtype=complex) if size is not None else 1.0 + 0.0j
    hr = _sample_component(rng, spec, size)
    hi = _sample_component(rng, spec, size)
    return hr + 1j * hi


def pdf(spec: FadingSpec, x):
    """Density of one real component of the fading coefficient."""
    x = np.asarray(x, dtype=float)
    p = spec.params
    kind = spec.kind
    if kind == "rayleigh":
        s2 = p["sigma"] ** 2
        out = np.exp(-(x**2) / (2 * s2)) / np.sqrt(2 * np.pi * s2)
    elif kind == "custom":
        lam = p["lam"]
        out = lam * np.exp(-lam * np.abs(x)) / 2
    elif kind == "gamma":
        k, theta = p["k"], p["theta"]
        xp = np.where(x > 0, x, 1.0)
        logf = (k - 1) * np.log(xp) - xp / theta - k * np.log(theta) - special.gammaln(k)
        out = np.where(x > 0, np.exp(logf), 0.0)
        if k == 1:
            out = np.where(x == 0, 1.0 / theta, out)
    elif kind == "gumbel":
        z = (x - p["mu"]) / p["beta"]
        out = np.exp(z - np.exp(z)) / p["beta"]
    elif kind == "folded_normal":
        mu, s2 = p["mu"], p["sigma"] ** 2
        dens = (np.exp(-((x - mu) ** 2) / (2 * s2)) + np.exp(-((x + mu) ** 2) / (2 * s2))) / np.sqrt(
            2 * np.pi * s2
        )
        out = np.where(x >= 0, dens, 0.0)
    else:
        raise ValueError(f"no density for kind {kind!r}")
    return out if out.ndim else float(out)


def component_moments(spec: FadingSpec) -> tuple[float, float]:
    """Analytic (mean, variance) of one real component."""
    p = spec.params
    kind = spec.kind
    if kind == "rayleigh":
        return 0.0, p["sigma"] ** 2
    if kind == "custom":
        return 0.0, 2.0 / p["lam"] ** 2
    if kind == "gamma":
        return p["k"] * p["theta"], p["k"] * p["theta"] ** 2
    if kind == "gumbel":
        return p["mu"] - np.euler_gamma * p["beta"], math.pi**2 * p["beta"] ** 2 / 6
    if kind == "folded_normal":
        mu, s = p["mu"], p["sigma"]
        d = stats.foldnorm(abs(mu) / s, scale=s)
        return float(d.mean()), float(d.var())
    if kind == UNIT:
        return 1.0, 0.0
    raise ValueError(f"unknown fading kind {kind!r}")
