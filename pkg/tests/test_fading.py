import numpy as np
import pytest

from adacomp.fading import (
    MAX_FEEDBACK_BITS,
    cos_interferer_gain_shortcut,
    cos_leakage_scale,
    nos_interferer_gain,
    random_codebook,
    rvq_quantize,
    rvq_residual_samples,
    serving_gain,
)


def test_serving_gain_moments():
    # Gamma(n - |S|, 1): mean 7 and E[1/G] = 1/(shape-1) = 1/6 at n=8, |S|=1
    rng = np.random.default_rng(101)
    g = serving_gain(8, 1, rng, size=200_000)
    assert abs(g.mean() - 7.0) < 0.024
    assert abs((1.0 / g).mean() - 1.0 / 6.0) < 7e-4


def test_serving_gain_infeasible():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        serving_gain(2, 2, rng)
    with pytest.raises(ValueError):
        serving_gain(1, 3, rng)


def test_nos_interferer_gain_unit_mean():
    rng = np.random.default_rng(44)
    e = nos_interferer_gain(rng, size=200_000)
    assert abs(e.mean() - 1.0) < 0.01
    assert np.all(e >= 0.0)


def test_cos_leakage_scale_values():
    assert cos_leakage_scale(21, 8) == 0.125    # 2^(-21/7)
    assert cos_leakage_scale(9, 4) == 0.125
    assert cos_leakage_scale(3, 2) == 0.125
    assert cos_leakage_scale(0, 8) == 1.0
    with pytest.raises(ValueError):
        cos_leakage_scale(4, 1)


def test_cos_gain_shortcut_mean():
    rng = np.random.default_rng(17)
    g = cos_interferer_gain_shortcut(9, 4, rng, size=200_000)
    assert abs(g.mean() - 0.125) < 1.5e-3


def test_random_codebook_shape_and_norms():
    rng = np.random.default_rng(3)
    book = random_codebook(4, 6, rng)
    assert book.shape == (16, 6)
    assert np.allclose(np.linalg.norm(book, axis=1), 1.0)
    with pytest.raises(ValueError):
        random_codebook(MAX_FEEDBACK_BITS + 1, 4, rng)


def test_rvq_quantize_scale_invariant():
    rng = np.random.default_rng(8)
    h = rng.normal(size=4) + 1j * rng.normal(size=4)
    idx1, r1 = rvq_quantize(h, 5, np.random.default_rng(11))
    idx2, r2 = rvq_quantize(3.0 * h, 5, np.random.default_rng(11))
    assert idx1 == idx2
    assert abs(r1 - r2) < 1e-12
    assert 0.0 <= r1 <= 1.0
    with pytest.raises(ValueError):
        rvq_quantize(np.zeros(4), 5, np.random.default_rng(0))


def test_rvq_zero_bits_residual():
    # a single random codeword leaves E[sin^2] = (n-1)/n
    rng = np.random.default_rng(21)
    r = rvq_residual_samples(0, 4, 20_000, rng)
    assert abs(r.mean() - 0.75) < 4.5e-3


def test_rvq_two_antenna_exact_mean():
    # n=2: sin^2 to one codeword is U(0,1), so the best of 2^b codewords
    # leaves mean 1/(2^b + 1)
    rng = np.random.default_rng(13)
    r = rvq_residual_samples(6, 2, 20_000, rng)
    exact = 1.0 / (2**6 + 1)
    se = r.std(ddof=1) / np.sqrt(r.size)
    assert abs(r.mean() - exact) < 3 * se
    # and the 2^(-b/(n-1)) leakage factor matches it within 2%
    assert abs(exact / cos_leakage_scale(6, 2) - 1.0) < 0.02


@pytest.mark.parametrize("antennas", [2, 4])
def test_rvq_residual_matches_leakage_factor(antennas):
    # quantization-cell bound: (n-1)/n * 2^(-b/(n-1)) <= E[residual] <= 2^(-b/(n-1))
    bits = 3 * (antennas - 1)
    rng = np.random.default_rng(1000 + antennas)
    r = rvq_residual_samples(bits, antennas, 4000, rng)
    ratio = r.mean() / cos_leakage_scale(bits, antennas)
    assert 0.5 < ratio < 1.15
