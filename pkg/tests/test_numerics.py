import math

import numpy as np
import pytest
from scipy import integrate

from fadingcodes.numerics import (
    KINDS,
    component_moments,
    make_rng,
    normalize_spec,
    pdf,
    sample_cscn,
    sample_fading,
    sample_standard_normal,
)

N = 1_000_000


def test_standard_normal_moments():
    x = sample_standard_normal(make_rng(1), N)
    assert abs(x.mean()) < 0.004  # 3 / sqrt(N)
    assert abs(x.var() - 1) < 0.005


def test_standard_normal_deterministic():
    a = sample_standard_normal(make_rng(42, 0), 10)
    b = sample_standard_normal(make_rng(42, 0), 10)
    np.testing.assert_array_equal(a, b)


def test_streams_differ_and_are_uncorrelated():
    a = sample_standard_normal(make_rng(42, 0), 100_000)
    b = sample_standard_normal(make_rng(42, 1), 100_000)
    assert not np.array_equal(a[:10], b[:10])
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / math.sqrt(100_000)


def test_cscn_degenerate():
    assert sample_cscn(make_rng(0), 0.0) == 0


def test_cscn_moments():
    w = sample_cscn(make_rng(3), 2.0, N)
    assert np.mean(np.abs(w) ** 2) == pytest.approx(2.0, rel=0.01)
    # circular symmetry: pseudo-variance vanishes
    assert abs(np.mean(w**2)) < 0.01


def test_cscn_rejects_negative_variance():
    with pytest.raises(ValueError):
        sample_cscn(make_rng(0), -1.0)


def test_normalized_parameters():
    assert normalize_spec("custom")["lam"] == pytest.approx(2.0)
    assert normalize_spec("gumbel")["beta"] == pytest.approx(math.sqrt(3) / math.pi)
    assert normalize_spec("gumbel")["beta"] == pytest.approx(0.5513, abs=1e-4)
    assert normalize_spec("folded_normal")["sigma"] == pytest.approx(1.17302, abs=1e-5)
    g = normalize_spec("gamma")
    assert (g["k"], g["theta"]) == (2.0, pytest.approx(0.5))


@pytest.mark.parametrize("kind", KINDS)
def test_analytic_component_variance_is_half(kind):
    _, var = component_moments(normalize_spec(kind))
    assert var == pytest.approx(0.5, abs=1e-12)


def test_folded_normal_with_nonzero_mean_is_normalized():
    spec = normalize_spec("folded_normal", mu=0.7)
    assert component_moments(spec)[1] == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("bad", [{"k": 0.0}, {"k": -1.0}])
def test_gamma_rejects_nonpositive_shape(bad):
    with pytest.raises(ValueError):
        normalize_spec("gamma", **bad)


def test_unknown_kind():
    with pytest.raises(ValueError):
        normalize_spec("nakagami")


@pytest.mark.parametrize("kind", KINDS)
def test_sampled_component_variance(kind):
    h = sample_fading(make_rng(11, KINDS.index(kind)), normalize_spec(kind), N)
    assert h.real.var() == pytest.approx(0.5, rel=0.01)
    assert h.imag.var() == pytest.approx(0.5, rel=0.01)


def test_rayleigh_power():
    h = sample_fading(make_rng(5), normalize_spec("rayleigh"), N)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, rel=0.01)


@pytest.mark.parametrize("kind", KINDS)
def test_support(kind):
    h = sample_fading(make_rng(2), normalize_spec(kind), 10_000)
    parts = np.concatenate([h.real, h.imag])
    if kind in ("gamma", "folded_normal"):
        assert parts.min() >= 0
    else:
        assert (parts > 0).any() and (parts < 0).any()


def test_gamma_nonnegative_at_scale():
    h = sample_fading(make_rng(8), normalize_spec("gamma"), N)
    assert (h.real >= 0).all() and (h.imag >= 0).all()


def test_pdf_values():
    assert pdf(normalize_spec("custom"), 0.0) == pytest.approx(1.0)
    assert pdf(normalize_spec("rayleigh"), 0.0) == pytest.approx(1 / math.sqrt(math.pi))
    assert pdf(normalize_spec("gamma"), -0.5) == 0.0
    assert pdf(normalize_spec("folded_normal"), -0.1) == 0.0


@pytest.mark.parametrize("kind", KINDS)
def test_pdf_integrates_to_one(kind):
    spec = normalize_spec(kind)
    lo = 0.0 if spec.nonnegative else -10.0
    hi = 30.0 if spec.nonnegative else 10.0
    x = np.linspace(lo, hi, 600_001)
    assert integrate.trapezoid(pdf(spec, x), x) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("kind", KINDS)
def test_pdf_matches_samples(kind):
    # histogram of the sampler against the closed-form density
    spec = normalize_spec(kind)
    x = sample_fading(make_rng(21), spec, 400_000).real
    counts, edges = np.histogram(x, bins=40, range=(np.quantile(x, 0.01), np.quantile(x, 0.99)))
    mids = (edges[1:] + edges[:-1]) / 2
    dens = counts / (len(x) * np.diff(edges))
    np.testing.assert_allclose(dens, pdf(spec, mids), rtol=0.08, atol=0.01)


def test_mean_is_preserved_for_positive_support():
    spec = normalize_spec("gamma")
    h = sample_fading(make_rng(4), spec, 200_000)
    assert h.real.mean() == pytest.approx(component_moments(spec)[0], abs=0.01)
