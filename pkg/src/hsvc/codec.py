"""Hierarchical sparse vector codec.

Encoding puts one common bit stream and U private bit streams into a
single length-N block-sparse vector:

* common bits pick which U of the S sections are active (combinadic
  rank of the section subset),
* each active section belongs to one user; the user's first private
  bits place K_u blocks of length L_u inside the section, the rest are
  modulated onto the block entries left to right.

Decoding mirrors this: section-level block OMP recovers the common
bits, then successive interference cancellation walks the users in
descending block energy, attributing sections to users by the residual
of a multi-path block pursuit and subtracting each detected
contribution before the next, weaker one is decoded.

Block length doubles as the user signature: block lengths are required
to be pairwise distinct so the receiver can tell sections apart.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .combinadics import (BlockPlacement, CombinationSet, bits_to_int,
                          common_capacity, int_to_bits,
                          private_index_capacity, qam_capacity,
                          rank_block_placement, rank_combination,
                          unrank_block_placement, unrank_combination)
from .errors import DecodeFailure, ParameterError, SingularSystemError
from .modem import SUPPORTED_ORDERS, demodulate, get_constellation, modulate
from .sparse_recovery import bomp, mbomp

DEFAULT_CODEBOOK_SEED = 20260814


@dataclass
class HsvcConfig:
    """Static parameters of one HSVC link.

    n            sparse vector length (= sections * section_len)
    sections     number of sections S
    section_len  entries per section D
    users        number of users U
    block_counts per-user number of blocks K_u
    block_lens   per-user block length L_u (pairwise distinct)
    mod_order    constellation size (2, 4, 16 or 64)
    subcarriers  OFDM subcarriers M (rows of the codebook)
    cp_len       cyclic prefix length
    taps         channel memory (Rayleigh tap count)
    codebook_seed  seed of the +-1 spreading codebook
    """

    n: int
    sections: int
    section_len: int
    users: int
    block_counts: tuple
    block_lens: tuple
    mod_order: int
    subcarriers: int
    cp_len: int = 8
    taps: int = 4
    codebook_seed: int = DEFAULT_CODEBOOK_SEED

    def __post_init__(self):
        self.block_counts = tuple(int(k) for k in self.block_counts)
        self.block_lens = tuple(int(l) for l in self.block_lens)
        if self.n != self.sections * self.section_len:
            raise ParameterError(
                f"n = {self.n} is not sections * section_len "
                f"= {self.sections} * {self.section_len}")
        if not 1 <= self.users < self.sections:
            raise ParameterError("need 1 <= users < sections")
        if len(self.block_counts) != self.users or \
                len(self.block_lens) != self.users:
            raise ParameterError("per-user tuples must have one entry per user")
        if len(set(self.block_lens)) != self.users:
            raise ParameterError(
                "block lengths identify users and must be pairwise distinct")
        if self.mod_order not in SUPPORTED_ORDERS:
            raise ParameterError(f"unsupported mod_order {self.mod_order}")
        for k, l in zip(self.block_counts, self.block_lens):
            if k < 1 or l < 1:
                raise ParameterError("block counts and lengths must be positive")
            if self.section_len - k * (l - 1) < k:
                raise ParameterError(
                    f"{k} blocks of length {l} do not fit in a section "
                    f"of length {self.section_len}")
        if self.subcarriers < 1:
            raise ParameterError("subcarriers must be positive")
        if self.taps < 1 or self.cp_len < self.taps - 1:
            raise ParameterError("cp_len must cover the channel memory")
        if self.cp_len > self.subcarriers:
            raise ParameterError("cyclic prefix longer than the symbol")
        if not 0 <= self.codebook_seed < 2 ** 64:
            raise ParameterError("codebook_seed must fit in 64 bits")
        self.common_bits = common_capacity(self.sections, self.users)
        self.index_bits = tuple(
            private_index_capacity(self.section_len, k, l)
            for k, l in zip(self.block_counts, self.block_lens))
        self.value_bits = tuple(
            qam_capacity(k, l, self.mod_order)
            for k, l in zip(self.block_counts, self.block_lens))
        self.user_bits = tuple(i + v for i, v in
                               zip(self.index_bits, self.value_bits))
        self.total_bits = self.common_bits + sum(self.user_bits)
        self.k_non = sum(k * l for k, l in
                         zip(self.block_counts, self.block_lens))
        # Cancellation order: strongest (largest K*L block energy) first,
        # ties toward the lower user index.
        self.sic_order = tuple(sorted(
            range(self.users),
            key=lambda u: (-self.block_counts[u] * self.block_lens[u], u)))

    def assign_sections(self, section_set):
        """Section index owned by each user, given the active section set.

        Users sorted by descending block length take the chosen sections
        in ascending index order; both sides are deterministic, so the
        encoder and any test agree without side information.
        """
        by_len = sorted(range(self.users),
                        key=lambda u: (-self.block_lens[u], u))
        owner = [0] * self.users
        for sec, u in zip(section_set.members, by_len):
            owner[u] = sec
        return tuple(owner)


@dataclass
class Payload:
    """Common bit string plus one private bit string per user."""

    common: np.ndarray
    private: tuple

    def __eq__(self, other):
        if not isinstance(other, Payload):
            return NotImplemented
        return (len(self.private) == len(other.private)
                and np.array_equal(self.common, other.common)
                and all(np.array_equal(a, b)
                        for a, b in zip(self.private, other.private)))


def random_payload(config, rng):
    common = rng.integers(0, 2, size=config.common_bits, dtype=np.uint8)
    private = tuple(rng.integers(0, 2, size=b, dtype=np.uint8)
                    for b in config.user_bits)
    return Payload(common, private)


def _check_payload(payload, config):
    if payload.common.size != config.common_bits or \
            len(payload.private) != config.users or \
            any(p.size != b for p, b in
                zip(payload.private, config.user_bits)):
        raise ParameterError("payload lengths do not match the config")


@dataclass
class SparseVector:
    values: np.ndarray = field(repr=False)
    sections: CombinationSet
    placements: tuple
    owner_sections: tuple


def encode(payload, config):
    """Map a payload onto the block-sparse vector."""
    _check_payload(payload, config)
    section_set = unrank_combination(bits_to_int(payload.common),
                                     config.sections, config.users)
    owners = config.assign_sections(section_set)
    constellation = get_constellation(config.mod_order)
    values = np.zeros(config.n, dtype=complex)
    placements = []
    for u in range(config.users):
        bits = payload.private[u]
        n_idx = config.index_bits[u]
        placement = unrank_block_placement(
            bits_to_int(bits[:n_idx]), config.section_len,
            config.block_counts[u], config.block_lens[u])
        symbols = modulate(bits[n_idx:], constellation)
        base = owners[u] * config.section_len
        pos = 0
        for start in placement.starts:
            values[base + start:base + start + placement.block_len] = \
                symbols[pos:pos + placement.block_len]
            pos += placement.block_len
        placements.append(placement)
    return SparseVector(values, section_set, tuple(placements), owners)


def validate_sparse_vector(sv, config):
    """Structural checks on an encoded vector; raises on violation."""
    nz = np.flatnonzero(sv.values)
    expected = []
    for u in range(config.users):
        base = sv.owner_sections[u] * config.section_len
        expected.extend(base + c for c in sv.placements[u].columns())
    if sorted(expected) != list(nz):
        raise ParameterError("non-zeros do not match the declared support")
    if len(nz) != config.k_non:
        raise ParameterError("non-zero count differs from k_non")
    if sorted(sv.owner_sections) != list(sv.sections.members):
        raise ParameterError("owned sections differ from the active set")


def decode_common(y, phi, config):
    """Recover the active section set and the common bits.

    Section-level block OMP with one pick per user; a detected set whose
    rank falls outside the 2**common_bits codeword region is a decode
    failure (such sets are never produced by the encoder).
    """
    result = bomp(y, phi, config.section_len, config.sections, config.users)
    members = tuple(sorted(s // config.section_len
                           for s in result.support.starts))
    section_set = CombinationSet(members, config.sections, config.users)
    rank = rank_combination(section_set)
    if rank >> config.common_bits:
        raise DecodeFailure(f"section set rank {rank} outside the "
                            f"{config.common_bits}-bit codeword region")
    return section_set, int_to_bits(rank, config.common_bits)


def decode_private(y, phi, detected_sections, config, user):
    """SIC decoding of one user's private bits.

    Users are processed in descending block energy; at every step each
    still-unattributed section is fitted with the current user's block
    shape and the best-matching section (smallest residual, ties to the
    lowest index) is attributed and cancelled.  The walk stops at the
    requested user.

    Returns (placement, bits, diagnostics) where diagnostics maps the
    processed users to (section, residual_norm2).
    """
    if len(detected_sections.members) != config.users:
        raise ParameterError("detected section set has the wrong size")
    d = config.section_len
    residual = y
    pending = list(detected_sections.members)
    diagnostics = {}
    for v in config.sic_order:
        k_v, l_v = config.block_counts[v], config.block_lens[v]
        best = None
        for p in pending:
            sub = phi[:, p * d:(p + 1) * d]
            try:
                fit = mbomp(residual, sub, l_v, k_v)
            except (DecodeFailure, SingularSystemError):
                continue
            if best is None or fit.residual_norm2 < best[2].residual_norm2:
                best = (p, sub, fit)
        if best is None:
            raise DecodeFailure(
                f"no section can host user {v}'s block shape")
        p, sub, fit = best
        pending.remove(p)
        diagnostics[v] = (p, fit.residual_norm2)
        if v == user:
            placement = BlockPlacement(fit.support.starts, l_v, d)
            rank = rank_block_placement(placement)
            if rank >> config.index_bits[user]:
                raise DecodeFailure(
                    f"block placement rank {rank} outside the "
                    f"{config.index_bits[user]}-bit codeword region")
            constellation = get_constellation(config.mod_order)
            bits = np.concatenate([
                int_to_bits(rank, config.index_bits[user]),
                demodulate(fit.values, constellation)])
            return placement, bits, diagnostics
        residual = fit.residual
    raise ParameterError(f"user {user} outside [0, {config.users})")


@dataclass
class DecodeResult:
    status: str
    common_bits: np.ndarray | None = None
    private_bits: np.ndarray | None = None
    detected_sections: CombinationSet | None = None
    placement: BlockPlacement | None = None
    diagnostics: dict = field(default_factory=dict)
    reason: str = ""

    @property
    def ok(self):
        return self.status == "ok"


def decode(y, phi, config, user):
    """Full receiver for one user: common stage, then SIC private stage.

    Decode failures are reported in the result, not raised; a failed
    packet is counted as a block error by the caller.
    """
    if not 0 <= user < config.users:
        raise ParameterError(f"user {user} outside [0, {config.users})")
    try:
        sections, common_bits = decode_common(y, phi, config)
        placement, private_bits, diagnostics = decode_private(
            y, phi, sections, config, user)
    except (DecodeFailure, SingularSystemError) as exc:
        return DecodeResult(status="decode-failure", reason=str(exc))
    return DecodeResult(status="ok", common_bits=common_bits,
                        private_bits=private_bits,
                        detected_sections=sections,
                        placement=placement, diagnostics=diagnostics)
