"""OFDM transmission over frequency-selective Rayleigh fading.

Conventions, fixed once for the whole package:

* DFT/IDFT are unitary (forward kernel exp(-j*2*pi*m*n/M) / sqrt(M)).
* Channel taps are i.i.d. circularly-symmetric complex Gaussian with
  total power one (per-tap variance 1/n_taps), constant per trial.
* The per-subcarrier frequency response is the length-M unnormalised
  FFT of the zero-padded taps; with a cyclic prefix at least as long
  as the channel memory, the time-domain path reduces exactly to a
  per-subcarrier multiplication by that response.
* At unit per-subcarrier signal power, noise with variance
  sigma2 = 10**(-snr_db/10) realises the requested SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

_SQRT_HALF = math.sqrt(0.5)


def crandn(rng, shape):
    """Circularly-symmetric complex normal samples, unit variance."""
    n = math.prod(shape) if isinstance(shape, tuple) else int(shape)
    flat = rng.standard_normal(2 * n)
    z = flat.view(np.complex128) * _SQRT_HALF
    return z.reshape(shape)


def snr_to_sigma2(snr_db):
    """Noise variance for a given SNR in dB at unit signal power."""
    return 10.0 ** (-snr_db / 10.0)


@dataclass(frozen=True)
class NoiseSpec:
    sigma2: float

    @classmethod
    def from_snr_db(cls, snr_db):
        return cls(snr_to_sigma2(snr_db))

    @property
    def snr_db(self):
        if self.sigma2 <= 0:
            raise ParameterError("sigma2 must be positive")
        return -10.0 * np.log10(self.sigma2)


@dataclass(frozen=True)
class ChannelRealization:
    """Per-user taps and their frequency response for one trial."""

    taps: np.ndarray = field(repr=False)
    freq: np.ndarray = field(repr=False)

    @property
    def n_users(self):
        return self.taps.shape[0]

    @property
    def n_taps(self):
        return self.taps.shape[1]

    @property
    def n_subcarriers(self):
        return self.freq.shape[1]


def channel_from_taps(taps, n_subcarriers):
    """Build a realization from explicit taps (rows = users)."""
    taps = np.atleast_2d(np.asarray(taps, dtype=complex))
    if taps.shape[1] > n_subcarriers:
        raise ParameterError("more taps than subcarriers")
    freq = np.fft.fft(taps, n=n_subcarriers, axis=1)
    return ChannelRealization(taps, freq)


def realize_channel(rng, n_users, n_taps, n_subcarriers):
    """Draw an independent Rayleigh channel for every user."""
    if n_users < 1 or n_taps < 1:
        raise ParameterError("need at least one user and one tap")
    taps = crandn(rng, (n_users, n_taps)) / np.sqrt(n_taps)
    return channel_from_taps(taps, n_subcarriers)


def identity_channel(n_users, n_subcarriers):
    """Flat unit channel (single tap of value 1) for every user."""
    taps = np.ones((n_users, 1), dtype=complex)
    return channel_from_taps(taps, n_subcarriers)


def transmit(x, taps, cp_len, sigma2, rng=None, noise=None):
    """Send frequency-domain symbols through the full OFDM chain.

    IDFT to time domain, prepend a cyclic prefix, convolve with the
    taps, strip the prefix, DFT back, add noise.  Kept around as the
    reference path; production decoding uses transmit_freq, which is
    numerically identical when cp_len covers the channel memory.
    """
    x = np.asarray(x, dtype=complex)
    taps = np.asarray(taps, dtype=complex)
    m = x.size
    if taps.ndim != 1:
        raise ParameterError("transmit handles one user's taps at a time")
    if cp_len < taps.size - 1:
        raise ParameterError(
            f"cyclic prefix {cp_len} shorter than channel memory "
            f"{taps.size - 1}")
    if cp_len > m:
        raise ParameterError("cyclic prefix longer than the symbol")
    x_t = np.fft.ifft(x) * np.sqrt(m)
    with_cp = np.concatenate([x_t[m - cp_len:], x_t])
    smeared = np.convolve(with_cp, taps)
    y_t = smeared[cp_len:cp_len + m]
    y = np.fft.fft(y_t) / np.sqrt(m)
    return _add_noise(y, sigma2, rng, noise)


def transmit_freq(x, freq_response, sigma2, rng=None, noise=None):
    """Per-subcarrier shortcut: y = H * x + w."""
    x = np.asarray(x, dtype=complex)
    freq_response = np.asarray(freq_response, dtype=complex)
    if freq_response.shape != x.shape:
        raise ParameterError("frequency response shape mismatch")
    return _add_noise(freq_response * x, sigma2, rng, noise)


def _add_noise(y, sigma2, rng, noise):
    if sigma2 < 0:
        raise ParameterError("noise variance must be non-negative")
    if noise is not None:
        noise = np.asarray(noise, dtype=complex)
        if noise.shape != y.shape:
            raise ParameterError("noise shape mismatch")
        return y + noise
    if sigma2 == 0:
        return y
    if rng is None:
        raise ParameterError("need an rng (or explicit noise) when sigma2 > 0")
    return y + crandn(rng, y.shape) * np.sqrt(sigma2)


def effective_matrix(codebook, freq_response):
    """Spreading matrix as seen after one user's channel.

    The channel acts per subcarrier, i.e. on rows of the codebook, so
    the effective measurement matrix is diag(H) times the codebook.
    """
    freq_response = np.asarray(freq_response)
    if freq_response.shape != (codebook.n_rows,):
        raise ParameterError("frequency response length must match rows")
    return freq_response[:, None] * codebook.matrix
