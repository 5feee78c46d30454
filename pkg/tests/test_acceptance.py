"""Acceptance gate: every reference target checked at its stated tolerance.

Monte Carlo comparisons pass when the estimate lies within
``max(3 standard errors, relative tolerance)`` of the target.  Learned
systems come from the same recipes the ``reproduce`` targets use.
"""

import math
import time

import numpy as np
import pytest

from fadingcodes import autoencoder as ae
from fadingcodes import classical as cl
from fadingcodes import neural as nn
from fadingcodes import reproduce as rp
from fadingcodes.channel import SnrPoint
from fadingcodes.evaluation import analyze_codebook, default_grid, estimate_bler, estimate_bit_error_rate, sweep
from fadingcodes.numerics import KINDS, make_rng, normalize_spec, sample_fading

CLASSICAL = 1_000_000
LEARNED = 100_000
GRID = default_grid()  # 20 points, -2..20 dB
FIG4_GRID = rp.fig4_grid()  # 30 points, -2..20 dB


def close(est, target, rel):
    return abs(est.bler - target) <= max(3 * est.stderr, rel * target)


@pytest.fixture(scope="module")
def lab(tmp_path_factory):
    return rp.Reproducer(tmp_path_factory.mktemp("acceptance"), plot=False)


@pytest.fixture(scope="module")
def timed(lab):
    seconds = {}

    def get(recipe):
        if recipe.name not in seconds:
            t = time.perf_counter()
            lab.system(recipe)
            seconds[recipe.name] = time.perf_counter() - t
        return lab.system(recipe), seconds[recipe.name]

    return get


# -- classical chains ------------------------------------------------------


def test_c1_orthogonal_no_csi(verdict):
    t = time.perf_counter()
    curve = sweep(cl.OrthogonalChain(), GRID, CLASSICAL)
    elapsed = time.perf_counter() - t
    reference = {0: 0.3799, 9: 0.1119, 19: 0.00973}
    points_ok = all(
        abs(curve.bler[i] - v) <= max(3 * curve.stderr[i], 0.02 * v) for i, v in reference.items()
    )
    oracle = np.array([cl.oracle_orth_noncoherent_bler(SnrPoint(s)) for s in GRID])
    sigma = np.sqrt(oracle * (1 - oracle) / CLASSICAL)
    grid_ok = bool(np.all(np.abs(curve.bler - oracle) <= 3 * sigma))
    worst = float(np.max(np.abs(curve.bler - oracle) / sigma))
    detail = (
        f"BLER at -2/8.42/20 dB = {curve.bler[0]:.4f}/{curve.bler[9]:.4f}/{curve.bler[19]:.5f}; "
        f"worst grid deviation {worst:.2f} sigma; {elapsed:.1f} s"
    )
    assert verdict("criterion 1", points_ok and grid_ok, detail)


def test_c2_hamming_hard_no_csi(verdict):
    # read literally as a block error rate
    chain = cl.HammingNoCsiChain()
    a = estimate_bler(chain, GRID[9], CLASSICAL, stream=(9,))
    b = estimate_bler(chain, GRID[19], CLASSICAL, stream=(19,))
    ok = close(a, 0.1517, 0.05) and close(b, 0.00242, 0.05)
    detail = f"block error at 8.42/20 dB = {a.bler:.4f}/{b.bler:.5f} vs 0.1517/0.00242 (5%)"
    assert verdict("criterion 2", ok, detail)


def test_c2_hamming_hard_no_csi_data_bits(verdict):
    # the reference values are reproduced by the decoded data-bit error rate
    chain = cl.HammingNoCsiChain()
    a = estimate_bit_error_rate(chain, GRID[9], CLASSICAL, stream=(9,))
    b = estimate_bit_error_rate(chain, GRID[19], CLASSICAL, stream=(19,))
    ok = close(a, 0.1517, 0.05) and close(b, 0.00242, 0.05)
    detail = f"data-bit error at 8.42/20 dB = {a.bler:.4f}/{b.bler:.5f} vs 0.1517/0.00242 (5%)"
    assert verdict("criterion 2 (data-bit reading)", ok, detail)


def test_c3_uncoded_csir(verdict):
    oracle = cl.oracle_uncoded_block(20.0)
    est = estimate_bler(cl.UncodedCsirChain(), 20.0, CLASSICAL)
    ok = close(est, oracle, 0.03) and abs(oracle - 0.00986) <= 0.03 * 0.00986
    assert verdict("criterion 3", ok, f"BLER at 20 dB = {est.bler:.5f}, oracle {oracle:.5f}, reference 0.00986")


def test_c4_hamming_hard_csir(verdict):
    oracle = cl.oracle_hamming_hard_block(20.0)
    est = estimate_bler(cl.HammingHardCsirChain(), 20.0, CLASSICAL)
    ok = abs(est.bler - 3.85e-4) <= 3 * est.stderr and abs(est.bler - oracle) <= 3 * est.stderr
    detail = f"BLER at 20 dB = {est.bler:.3e} +- {est.stderr:.1e}, oracle {oracle:.3e}, reference curve 3.96e-4"
    assert verdict("criterion 4", ok, detail)


# -- learned systems ---------------------------------------------------------

N2 = rp.no_csi_recipe(2, 2, 7.0)
N5 = rp.no_csi_recipe(2, 5, 7.0)


def test_c5_learned_m2_n2(timed, verdict):
    system, seconds = timed(N2)
    report = analyze_codebook(ae.codebook(system))
    energy_ok = bool(np.all(np.abs(report.energies - 2) <= 0.02))
    chain = ae.LearnedChain(system)
    worst, ok_curve = 0.0, True
    for i, snr in enumerate(GRID):
        if not 0 <= snr <= 15:
            continue
        est = estimate_bler(chain, snr, LEARNED, stream=(i,))
        oracle = cl.oracle_orth_noncoherent_bler(SnrPoint(snr))
        ok_curve &= close(est, oracle, 0.15)
        worst = max(worst, abs(est.bler / oracle - 1))
    ok = energy_ok and report.max_offdiag_normalized < 0.05 and ok_curve and system.final_loss < math.log(2)
    detail = (
        f"energies {np.round(report.energies, 4).tolist()}, {report.summary()}, "
        f"worst relative gap to classical over 0-15 dB {worst:.3f}; trained in {seconds:.0f} s"
    )
    assert verdict("criterion 5", ok, detail)


def test_c6_learned_m2_n5_diversity(timed, verdict):
    n5, seconds = timed(N5)
    n2, _ = timed(N2)
    a = estimate_bler(ae.LearnedChain(n5), 20.0, 2 * LEARNED, stream=(19,))
    b = estimate_bler(ae.LearnedChain(n2), 20.0, 2 * LEARNED, stream=(19,))
    ok = a.bler <= 0.006 and 2 * a.bler <= b.bler
    detail = (
        f"n=5 BLER at 20 dB = {a.bler:.5f} (<= 0.006), n=2 = {b.bler:.5f}, ratio {b.bler / max(a.bler, 1e-12):.1f}; "
        f"seed {n5.config.seed} of {N5.seeds}, {seconds:.0f} s"
    )
    assert verdict("criterion 6", ok, detail)


def test_c7_distribution_study(timed, verdict):
    verdicts, blers = {}, {}
    for r in rp.fig3_recipes():
        system, _ = timed(r)
        kind = r.config.fading
        verdicts[kind] = analyze_codebook(ae.codebook(system))
        if kind in ("rayleigh", "folded_normal"):
            blers[kind] = estimate_bler(ae.LearnedChain(system), GRID[8], LEARNED, stream=(8,)).bler
    expected = {"rayleigh": "orthogonal", "custom": "orthogonal", "gumbel": "orthogonal"}
    expected.update(gamma="non_orthogonal", folded_normal="non_orthogonal")
    ok = all(verdicts[k].classification == v for k, v in expected.items())
    ok &= blers["folded_normal"] < 0.02 and blers["rayleigh"] >= 10 * blers["folded_normal"]
    shown = ", ".join(f"{k} {v.max_offdiag_normalized:.3f}" for k, v in verdicts.items())
    detail = f"max|<c0,c1>|/n: {shown}; BLER at 7.26 dB folded_normal {blers['folded_normal']:.5f}, rayleigh {blers['rayleigh']:.4f}"
    assert verdict("criterion 7", ok, detail)


def test_c8_learned_csir(timed, verdict):
    system, seconds = timed(rp.CSIR_RECIPE)
    chain = ae.LearnedChain(system)
    at_7 = estimate_bler(chain, FIG4_GRID[12], LEARNED, stream=(12,))
    below, worst = True, -math.inf
    for i, snr in enumerate(FIG4_GRID):
        if snr < 4:
            continue
        est = estimate_bler(chain, snr, LEARNED, stream=(i,))
        hard = cl.oracle_hamming_hard_block(snr)
        below &= est.bler <= hard + 3 * est.stderr
        worst = max(worst, est.bler / hard)
    ok = at_7.bler <= 0.035 and below
    detail = (
        f"BLER at {FIG4_GRID[12]:.2f} dB = {at_7.bler:.4f} (<= 0.035); "
        f"max learned/hard-decision ratio for SNR >= 4 dB {worst:.3f}; {seconds:.0f} s"
    )
    assert verdict("criterion 8", ok, detail)


def test_c9_awgn_transfer_floor(timed, verdict):
    csir, _ = timed(rp.CSIR_RECIPE)
    awgn, seconds = timed(rp.AWGN_RECIPE)
    native = estimate_bler(ae.LearnedChain(csir), 20.0, CLASSICAL)
    transfer = estimate_bler(ae.LearnedChain(awgn, fading=normalize_spec("rayleigh")), 20.0, LEARNED)
    ok = transfer.bler >= 10 * native.bler
    detail = (
        f"BLER at 20 dB: AWGN-trained {transfer.bler:.2e}, CSIR-trained {native.bler:.2e} "
        f"(ratio {transfer.bler / max(native.bler, 1e-12):.0f}); {seconds:.0f} s"
    )
    assert verdict("criterion 9", ok, detail)


# -- property suite ----------------------------------------------------------


def _gradient_errors():
    r = make_rng(0, 99)
    errors = []
    dense = nn.Dense(r.standard_normal((5, 3)), r.standard_normal(5))
    x, dy = r.standard_normal((4, 3)), r.standard_normal((4, 5))
    dx = dense.backward(x, dy)
    errors.append(nn.relative_error(dx, nn.numerical_gradient(lambda: np.sum(dense.forward(x)[0] * dy), x)))
    norm = nn.EnergyNormalize(5)
    z, dc = r.standard_normal((3, 5)), r.standard_normal((3, 5))
    dz = norm.backward(norm.forward(z)[1], dc)
    errors.append(nn.relative_error(dz, nn.numerical_gradient(lambda: np.sum(norm.forward(z)[0] * dc), z)))
    logits, onehot = r.standard_normal((5, 4)), np.eye(4)[r.integers(4, size=5)]
    d = nn.softmax_cross_entropy(logits, onehot)[2]
    errors.append(
        nn.relative_error(d, nn.numerical_gradient(lambda: nn.softmax_cross_entropy(logits, onehot)[0], logits))
    )
    for mode in ae.MODES:
        cfg = ae.AutoencoderConfig(M=3, n=2, mode=mode, steps=0, encoder_hidden=(5,), decoder_hidden=(6, 4), seed=1)
        s = ae.untrained_system(cfg)
        for p in s.decoder.params():
            p[...] = r.standard_normal(p.shape)
        msgs = np.array([0, 1, 2, 1])

        def loss():
            return ae.train_step(s, msgs, make_rng(5, 5), 0.3, cfg.fading_spec)

        loss()
        grads = [g.copy() for g in s.encoder.grads() + s.decoder.grads()]
        for p, g in zip(s.encoder.params() + s.decoder.params(), grads):
            errors.append(nn.relative_error(g, nn.numerical_gradient(loss, p)))
    return errors


def test_c10_property_suite(verdict):
    checks = {}
    checks["gradients"] = max(_gradient_errors()) < 1e-5

    z = make_rng(1).standard_normal((1000, 7)) * 10 ** make_rng(2).uniform(-3, 3, (1000, 1))
    c, _ = nn.EnergyNormalize(7).forward(z)
    checks["energy"] = float(np.max(np.abs(np.sum(c**2, axis=1) - 7))) <= 1e-12

    _, p, _ = nn.softmax_cross_entropy(make_rng(3).standard_normal((500, 16)) * 50, np.eye(16)[np.arange(500) % 16])
    checks["softmax"] = float(np.max(np.abs(p.sum(axis=1) - 1))) <= 1e-9

    words = cl.HAMMING.codewords
    single = all(
        np.array_equal(cl.syndrome_decode(w ^ np.eye(7, dtype=np.uint8)[pos]), w[:4]) for w in words for pos in range(7)
    )
    checks["hamming"] = cl.min_distance(words) == 3 and single

    variances = []
    for i, kind in enumerate(KINDS):
        h = sample_fading(make_rng(17, i), normalize_spec(kind), 1_000_000)
        variances += [h.real.var(), h.imag.var()]
    checks["samplers"] = bool(np.all(np.abs(np.array(variances) / 0.5 - 1) <= 0.01))

    cfg = ae.AutoencoderConfig(M=4, n=3, mode="csir", steps=200, batch_size=64, seed=8)
    a, b = ae.train(cfg), ae.train(cfg)
    same_models = nn.serialize(a.encoder) + nn.serialize(a.decoder) == nn.serialize(b.encoder) + nn.serialize(b.decoder)
    curve_a = sweep(ae.LearnedChain(a), [0.0, 10.0], 20_000, seed=4).to_csv()
    curve_b = sweep(ae.LearnedChain(b), [0.0, 10.0], 20_000, seed=4, workers=2).to_csv()
    checks["reproducible"] = same_models and curve_a == curve_b

    failed = [k for k, v in checks.items() if not v]
    detail = "all of " + ", ".join(checks) if not failed else "failed: " + ", ".join(failed)
    assert verdict("criterion 10", not failed, detail)
