import math

import numpy as np
import pytest

from fadingcodes.channel import SnrPoint, noise_param, transmit, transmit_awgn
from fadingcodes.numerics import make_rng, normalize_spec

RAYLEIGH = normalize_spec("rayleigh")
UNIT = normalize_spec("unit")


def test_noise_param_examples():
    assert noise_param(SnrPoint(0.0)) == pytest.approx(0.5)
    assert noise_param(SnrPoint(0.0, 4 / 7, coded=True)) == pytest.approx(0.875)
    assert noise_param(SnrPoint(20.0)) == pytest.approx(0.005)


def test_noise_param_rejects_bad_rate():
    with pytest.raises(ValueError):
        noise_param(SnrPoint(3.0, 0.0, coded=True))


def test_noiseless_identity():
    c = np.array([1.5, -0.2, 0.0])
    out = transmit(c, UNIT, 0.0, make_rng(0), mode="csir")
    np.testing.assert_array_equal(out.y, c.astype(complex))
    np.testing.assert_array_equal(out.h, np.ones(3))


def test_pure_noise_power():
    n0 = 0.3
    out = transmit(np.zeros((1_000_000, 1)), RAYLEIGH, n0, make_rng(1))
    assert np.mean(np.abs(out.y) ** 2) == pytest.approx(2 * n0, rel=0.02)
    assert out.h is None


def test_energy_accounting():
    c = np.tile([math.sqrt(2), 0.0], (100_000, 1))
    out = transmit(c, RAYLEIGH, 0.0, make_rng(2), mode="csir")
    energy = np.sum(np.abs(out.h * c) ** 2, axis=1)
    assert energy.mean() == pytest.approx(2.0, rel=0.02)


def test_modes_share_randomness():
    c = np.ones((5, 3))
    a = transmit(c, RAYLEIGH, 0.1, make_rng(9), mode="no_csi")
    b = transmit(c, RAYLEIGH, 0.1, make_rng(9), mode="csir")
    np.testing.assert_array_equal(a.y, b.y)
    assert a.h is None and b.h.shape == (5, 3)


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        transmit([1.0], RAYLEIGH, -0.1, make_rng(0))
    with pytest.raises(ValueError):
        transmit([1.0], RAYLEIGH, 0.1, make_rng(0), mode="csit")


def test_awgn_identity_and_variance():
    c = np.array([1.0, -2.0])
    np.testing.assert_array_equal(transmit_awgn(c, 0.0, make_rng(0)), c)
    y = transmit_awgn(np.zeros(1_000_000), 0.7, make_rng(3))
    assert y.var() == pytest.approx(0.7, rel=0.02)


def test_awgn_mean():
    n = 1_000_000
    y = transmit_awgn(np.tile([math.sqrt(2), 0.0], (n, 1)), 0.5, make_rng(4))
    assert abs(y[:, 0].mean() - math.sqrt(2)) < 3 * math.sqrt(0.5 / n)
