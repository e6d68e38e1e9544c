"""Gray-coded BPSK/QAM mapping with unit average energy."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

SUPPORTED_ORDERS = (2, 4, 16, 64)


def _gray_to_binary(g):
    b = g
    while g:
        g >>= 1
        b ^= g
    return b


def _pam_levels(bits_per_axis):
    # Label value is the Gray code of the level index, counted from the
    # top amplitude down, so adjacent amplitudes differ in one bit.
    n = 1 << bits_per_axis
    levels = np.empty(n)
    for label in range(n):
        idx = _gray_to_binary(label)
        levels[label] = (n - 1) - 2 * idx
    return levels


@dataclass(frozen=True)
class Constellation:
    order: int
    bits_per_symbol: int
    points: np.ndarray = field(repr=False)

    @classmethod
    def for_order(cls, order):
        if order not in SUPPORTED_ORDERS:
            raise ParameterError(
                f"modulation order {order} not supported "
                f"(choose from {SUPPORTED_ORDERS})")
        bps = order.bit_length() - 1
        if order == 2:
            points = np.array([1.0 + 0j, -1.0 + 0j])
        else:
            # Square QAM: first half of the label drives the in-phase
            # axis, second half the quadrature axis.
            half = bps // 2
            pam = _pam_levels(half)
            labels = np.arange(order)
            re = pam[labels >> half]
            im = pam[labels & ((1 << half) - 1)]
            points = (re + 1j * im) / np.sqrt(2.0 * (4 ** half - 1) / 3.0)
        assert abs(np.mean(np.abs(points) ** 2) - 1.0) < 1e-12
        return cls(order, bps, points)


_CACHE = {}


def get_constellation(order):
    """Memoized constellation lookup (they are immutable)."""
    c = _CACHE.get(order)
    if c is None:
        c = _CACHE[order] = Constellation.for_order(order)
    return c


def modulate(bits, constellation):
    """Map an MSB-first bit array onto constellation points.

    Bit count must be a multiple of bits_per_symbol.
    """
    bits = np.asarray(bits)
    bps = constellation.bits_per_symbol
    if bits.size % bps:
        raise ParameterError(
            f"bit count {bits.size} is not a multiple of {bps}")
    weights = 1 << np.arange(bps - 1, -1, -1)
    labels = bits.reshape(-1, bps).astype(np.int64) @ weights
    return constellation.points[labels]


def demodulate(symbols, constellation):
    """Hard nearest-neighbour decision back to bits.

    Ties go to the lowest label, so the map is total and deterministic.
    """
    symbols = np.asarray(symbols, dtype=complex)
    d2 = np.abs(symbols[:, None] - constellation.points[None, :]) ** 2
    labels = np.argmin(d2, axis=1)
    bps = constellation.bits_per_symbol
    shifts = np.arange(bps - 1, -1, -1)
    return ((labels[:, None] >> shifts) & 1).astype(np.uint8).ravel()
