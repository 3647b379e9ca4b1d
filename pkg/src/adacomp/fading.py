"""Beamforming gain laws under zero-forcing with quantized sharing.

A serving BS with n antennas that nulls toward |S| coordinated victims keeps
a chi-squared gain with 2(n - |S|) degrees of freedom toward its own user,
i.e. Gamma(n - |S|, 1) under the unit-mean normalization used throughout.
Interferers contribute unit-mean exponential gains; a coordinated interferer
that received the overhead message in time leaks only the quantization
residual, scaled by 2^(-b/(n-1)) for a b-bit random codebook.
"""

from __future__ import annotations

import numpy as np

MAX_FEEDBACK_BITS = 20  # 2**20 codewords; larger explicit codebooks are refused


def serving_gain(antennas: int, coord_set_size: int, rng: np.random.Generator, size=None):
    """Desired-link power gain Gamma(antennas - coord_set_size, scale=1).

    Zero-forcing toward coord_set_size victims spends that many degrees of
    freedom, so antennas must exceed coord_set_size.
    """
    shape = antennas - coord_set_size
    if shape < 1:
        raise ValueError(
            f"zero-forcing infeasible: {antennas} antennas cannot null "
            f"{coord_set_size} victims"
        )
    return rng.gamma(shape, 1.0, size=size)


def nos_interferer_gain(rng: np.random.Generator, size=None):
    """Unit-mean exponential gain of an uncoordinated (or stale) interferer."""
    return rng.exponential(1.0, size=size)


def cos_leakage_scale(feedback_bits: int, antennas: int) -> float:
    """Residual-interference factor 2^(-b/(n-1)) of an in-time coordinated BS."""
    if antennas < 2:
        raise ValueError("coordinated leakage needs antennas >= 2")
    return 2.0 ** (-feedback_bits / (antennas - 1))


def cos_interferer_gain_shortcut(
    feedback_bits: int, antennas: int, rng: np.random.Generator, size=None
):
    """Leakage gain of a coordinated in-time interferer.

    The mean equals the deterministic factor 2^(-b/(n-1)); the exponential
    spread keeps the gain law consistent with the uncoordinated one.
    """
    return cos_leakage_scale(feedback_bits, antennas) * rng.exponential(1.0, size=size)


def random_codebook(feedback_bits: int, antennas: int, rng: np.random.Generator) -> np.ndarray:
    """2**b isotropic unit vectors in C^antennas, one row per codeword."""
    if feedback_bits > MAX_FEEDBACK_BITS:
        raise ValueError(
            f"feedback_bits={feedback_bits} would allocate 2^{feedback_bits} "
            f"codewords; the explicit-codebook path is capped at {MAX_FEEDBACK_BITS} bits"
        )
    n = 1 << feedback_bits
    c = rng.normal(size=(n, antennas)) + 1j * rng.normal(size=(n, antennas))
    return c / np.linalg.norm(c, axis=1, keepdims=True)


def rvq_quantize(channel: np.ndarray, feedback_bits: int, rng: np.random.Generator):
    """Quantize a channel direction on a fresh random codebook.

    Returns (codeword_index, residual) where residual = sin^2 of the angle
    between the channel and the chosen codeword. The selected index maximizes
    |c^H h|, so the residual is invariant to positive scaling of the channel.
    """
    h = np.asarray(channel, dtype=complex)
    norm = np.linalg.norm(h)
    if norm == 0.0:
        raise ValueError("cannot quantize a zero channel vector")
    book = random_codebook(feedback_bits, h.shape[0], rng)
    align = np.abs(book @ h.conj()) / norm
    idx = int(np.argmax(align))
    residual = float(1.0 - align[idx] ** 2)
    # clamp tiny negative round-off
    return idx, max(residual, 0.0)


def rvq_residual_samples(
    feedback_bits: int, antennas: int, draws: int, rng: np.random.Generator,
    batch: int = 2048,
) -> np.ndarray:
    """Quantization residuals over independent channels and codebooks.

    Batched so the (draws x 2^b x antennas) codebook tensor never
    materializes at once.
    """
    out = np.empty(draws)
    n_codes = 1 << feedback_bits
    done = 0
    while done < draws:
        m = min(batch, draws - done)
        h = rng.normal(size=(m, antennas)) + 1j * rng.normal(size=(m, antennas))
        h /= np.linalg.norm(h, axis=1, keepdims=True)
        c = rng.normal(size=(m, n_codes, antennas)) + 1j * rng.normal(size=(m, n_codes, antennas))
        c /= np.linalg.norm(c, axis=2, keepdims=True)
        align = np.abs(np.einsum("mca,ma->mc", c, h.conj()))
        out[done:done + m] = 1.0 - np.max(align, axis=1) ** 2
        done += m
    return np.clip(out, 0.0, 1.0)
