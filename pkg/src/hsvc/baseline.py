"""Single-layer sparse vector coding baseline in sequential mode.

One packet carries one bit string: the first bits pick K active
positions of a length-N vector (plain combinadic rank), the rest are
modulated onto those positions.  The multi-user comparison transmits
a common packet followed by one private packet per user, splitting the
subcarrier budget of the hierarchical scheme evenly across the U+1
packets with the remainder going to the common one, so total bits and
total subcarriers match exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .channel import crandn, effective_matrix, realize_channel
from .combinadics import (CombinationSet, bits_to_int, int_to_bits,
                          rank_combination, unrank_combination)
from .errors import DecodeFailure, ParameterError, SingularSystemError
from .modem import SUPPORTED_ORDERS, demodulate, get_constellation, modulate
from .sparse_recovery import omp
from .spreading import generate_codebook, spread


@dataclass
class SvcConfig:
    n: int
    nonzeros: int
    subcarriers: int
    mod_order: int
    cp_len: int = 8
    taps: int = 4
    codebook_seed: int = 1

    def __post_init__(self):
        if not 1 <= self.nonzeros < self.n:
            raise ParameterError("need 1 <= nonzeros < n")
        if self.mod_order not in SUPPORTED_ORDERS:
            raise ParameterError(f"unsupported mod_order {self.mod_order}")
        if self.subcarriers < 1:
            raise ParameterError("subcarriers must be positive")
        if self.taps < 1 or self.cp_len < self.taps - 1:
            raise ParameterError("cp_len must cover the channel memory")
        if not 0 <= self.codebook_seed < 2 ** 64:
            raise ParameterError("codebook_seed must fit in 64 bits")
        self.index_bits = comb(self.n, self.nonzeros).bit_length() - 1
        self.value_bits = self.nonzeros * (self.mod_order.bit_length() - 1)
        self.capacity = self.index_bits + self.value_bits


def svc_encode(bits, config):
    bits = np.asarray(bits)
    if bits.size != config.capacity:
        raise ParameterError(
            f"payload must be exactly {config.capacity} bits")
    positions = unrank_combination(bits_to_int(bits[:config.index_bits]),
                                   config.n, config.nonzeros)
    symbols = modulate(bits[config.index_bits:],
                       get_constellation(config.mod_order))
    values = np.zeros(config.n, dtype=complex)
    values[list(positions.members)] = symbols
    return values


def svc_decode(y, phi, config):
    result = omp(y, phi, config.nonzeros)
    positions = CombinationSet(result.support.starts, config.n,
                               config.nonzeros)
    rank = rank_combination(positions)
    if rank >> config.index_bits:
        raise DecodeFailure(f"position rank {rank} outside the "
                            f"{config.index_bits}-bit codeword region")
    return np.concatenate([
        int_to_bits(rank, config.index_bits),
        demodulate(result.values, get_constellation(config.mod_order))])


def min_nonzeros_for(n_bits, n, mod_order):
    """Smallest K whose packet capacity covers n_bits."""
    bps = mod_order.bit_length() - 1
    for k in range(1, n):
        if comb(n, k).bit_length() - 1 + k * bps >= n_bits:
            return k
    raise ParameterError(
        f"{n_bits} bits never fit in a length-{n} packet")


@dataclass
class PacketPlan:
    name: str
    config: SvcConfig
    codebook: object
    payload_bits: int


@dataclass
class SequentialPlan:
    packets: tuple

    @property
    def total_subcarriers(self):
        return sum(p.config.subcarriers for p in self.packets)

    @property
    def total_bits(self):
        return sum(p.payload_bits for p in self.packets)


def plan_sequential(config):
    """Sequential-transmission resources matched to a hierarchical config.

    The U+1 packets reuse the vector length, modulation and channel
    shape of ``config``; each gets the smallest K whose capacity covers
    its share of the payload, and packet i draws its codebook from
    codebook_seed + 1 + i.
    """
    budget = config.subcarriers
    share = budget // (config.users + 1)
    common_m = budget - config.users * share
    if share < 1:
        raise ParameterError(
            f"{budget} subcarriers cannot be split over "
            f"{config.users + 1} packets")
    packets = []
    payloads = [("common", common_m, config.common_bits)]
    payloads += [(f"user{u}", share, config.user_bits[u])
                 for u in range(config.users)]
    for i, (name, m, n_bits) in enumerate(payloads):
        k = min_nonzeros_for(n_bits, config.n, config.mod_order)
        pkt_config = SvcConfig(
            n=config.n, nonzeros=k, subcarriers=m,
            mod_order=config.mod_order, cp_len=min(config.cp_len, m),
            taps=config.taps,
            codebook_seed=(config.codebook_seed + 1 + i) % 2 ** 64)
        codebook = generate_codebook(pkt_config.codebook_seed, m, config.n,
                                     k)
        packets.append(PacketPlan(name, pkt_config, codebook, n_bits))
    return SequentialPlan(tuple(packets))


def _pad_to(bits, width):
    out = np.zeros(width, dtype=np.uint8)
    out[:bits.size] = bits
    return out


def _send_packet(bits, packet, freq, sigma2, rng):
    """One packet through one user's channel; True means packet error."""
    sent = _pad_to(bits, packet.config.capacity)
    x = spread(svc_encode(sent, packet.config), packet.codebook)
    y = freq * x
    if sigma2 > 0:
        y = y + crandn(rng, y.shape) * np.sqrt(sigma2)
    try:
        got = svc_decode(y, effective_matrix(packet.codebook, freq),
                         packet.config)
    except (DecodeFailure, SingularSystemError):
        return True
    return not np.array_equal(got[:bits.size], bits)


def sequential_session(payload, plan, sigma2, rng):
    """Transmit common + per-user packets; per-user error flags.

    The common packet is broadcast once and received by every user over
    its own independent channel; each private packet sees a fresh
    channel draw.  User u's packet fails if either its copy of the
    common packet or its private packet fails.
    """
    common = plan.packets[0]
    privates = plan.packets[1:]
    n_users = len(privates)
    errors = np.zeros(n_users, dtype=bool)
    ch = realize_channel(rng, n_users, common.config.taps,
                         common.config.subcarriers)
    for u in range(n_users):
        errors[u] = _send_packet(payload.common, common, ch.freq[u],
                                 sigma2, rng)
    for u, packet in enumerate(privates):
        ch = realize_channel(rng, 1, packet.config.taps,
                             packet.config.subcarriers)
        errors[u] |= _send_packet(payload.private[u], packet, ch.freq[0],
                                  sigma2, rng)
    return errors
