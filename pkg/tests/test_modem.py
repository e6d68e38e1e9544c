import itertools

import numpy as np
import pytest

from hsvc.errors import ParameterError
from hsvc.modem import demodulate, get_constellation, modulate

ORDERS = (2, 4, 16, 64)


def test_unit_average_energy():
    for order in ORDERS:
        c = get_constellation(order)
        assert abs(np.mean(np.abs(c.points) ** 2) - 1.0) < 1e-12


def test_point_count_and_distinctness():
    for order in ORDERS:
        c = get_constellation(order)
        assert c.points.size == order
        assert c.bits_per_symbol == order.bit_length() - 1
        rounded = np.round(c.points, 9)
        assert len(set(zip(rounded.real, rounded.imag))) == order


def test_bpsk_convention():
    c = get_constellation(2)
    assert modulate(np.array([0], dtype=np.uint8), c)[0] == pytest.approx(1.0)
    assert modulate(np.array([1], dtype=np.uint8), c)[0] == pytest.approx(-1.0)


def test_qpsk_zero_label():
    c = get_constellation(4)
    sym = modulate(np.array([0, 0], dtype=np.uint8), c)[0]
    assert sym == pytest.approx((1 + 1j) / np.sqrt(2))


def test_qpsk_symbols_on_scaled_grid():
    c = get_constellation(4)
    bits = np.array(list(itertools.product((0, 1), repeat=8))).reshape(-1)
    bits = bits.astype(np.uint8)[: 8]
    syms = modulate(bits, c)
    assert syms.size == 4
    assert np.allclose(np.abs(syms), 1.0, atol=1e-12)
    grid = 1 / np.sqrt(2)
    assert np.allclose(np.abs(syms.real), grid, atol=1e-12)
    assert np.allclose(np.abs(syms.imag), grid, atol=1e-12)


def test_modulate_rejects_ragged_input():
    c = get_constellation(4)
    with pytest.raises(ParameterError):
        modulate(np.array([0, 1, 0], dtype=np.uint8), c)


def test_round_trip_exhaustive():
    """Every label of every constellation survives modulate-demodulate."""
    for order in ORDERS:
        c = get_constellation(order)
        width = c.bits_per_symbol
        for value in range(order):
            bits = np.array([(value >> (width - 1 - i)) & 1
                             for i in range(width)], dtype=np.uint8)
            back = demodulate(modulate(bits, c), c)
            assert np.array_equal(back, bits)


def test_round_trip_multi_symbol():
    rng = np.random.default_rng(11)
    for order in ORDERS:
        c = get_constellation(order)
        bits = rng.integers(0, 2, size=c.bits_per_symbol * 50).astype(np.uint8)
        assert np.array_equal(demodulate(modulate(bits, c), c), bits)


def test_demodulate_nearest_neighbor():
    c = get_constellation(2)
    assert list(demodulate(np.array([0.9 + 0.1j]), c)) == [0]
    assert list(demodulate(np.array([-0.3 + 2j]), c)) == [1]


def test_demodulate_tie_breaks_to_lowest_label():
    c = get_constellation(2)
    assert list(demodulate(np.array([0.0 + 0.0j]), c)) == [0]


def test_recovery_within_half_min_distance():
    rng = np.random.default_rng(7)
    for order in ORDERS:
        c = get_constellation(order)
        pts = c.points
        dmin = min(abs(a - b) for i, a in enumerate(pts)
                   for b in pts[i + 1:])
        bits = rng.integers(0, 2, size=c.bits_per_symbol * 64).astype(np.uint8)
        syms = modulate(bits, c)
        angles = rng.uniform(0, 2 * np.pi, size=syms.size)
        bumped = syms + 0.49 * dmin * np.exp(1j * angles)
        assert np.array_equal(demodulate(bumped, c), bits)


def test_unsupported_order_rejected():
    for bad in (0, 3, 8, 32, 128):
        with pytest.raises(ParameterError):
            get_constellation(bad)


def test_constellation_cache_reuses_tables():
    assert get_constellation(16) is get_constellation(16)
