"""Exact bit-to-combinatorics mappings for the sparse encoders.

Information bits select combinatorial objects (which sections of a long
vector are active, where symbol blocks sit inside a section).  Everything
here runs in exact integer arithmetic: capacities come from the bit length
of an exact binomial coefficient, never from floating point logs, and
rank/unrank walk the lexicographic order of sorted index tuples.

Bit strings are arrays of 0/1 with the most significant bit first, so the
integer behind a string ``b`` is ``sum(b[i] << (len(b)-1-i))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import OutOfRangeError, ParameterError


def int_to_bits(value, width):
    """Represent a non-negative integer as a width-long MSB-first 0/1 array."""
    if width < 0:
        raise ParameterError("bit width must be non-negative")
    if value < 0 or (value >> width):
        raise OutOfRangeError(f"{value} does not fit in {width} bits")
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)],
                    dtype=np.uint8)


def bits_to_int(bits):
    """Inverse of int_to_bits; accepts any iterable of 0/1."""
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


@dataclass(frozen=True)
class CombinationSet:
    """A sorted k-subset of {0, ..., n-1}."""

    members: tuple
    n: int
    k: int

    def __post_init__(self):
        if self.k < 0 or self.n < 0 or self.k > self.n:
            raise ParameterError(f"invalid subset shape k={self.k}, n={self.n}")
        if len(self.members) != self.k:
            raise ParameterError("member count does not match k")
        prev = -1
        for m in self.members:
            if not prev < m < self.n:
                raise ParameterError(
                    f"members must be strictly increasing in [0, {self.n})")
            prev = m


@dataclass(frozen=True)
class BlockPlacement:
    """Start indices of non-overlapping length-L blocks inside one section.

    Starts are strictly increasing, consecutive starts differ by at least
    ``block_len``, and the last block ends at or before ``section_len``.
    """

    starts: tuple
    block_len: int
    section_len: int

    def __post_init__(self):
        if self.block_len < 1 or self.section_len < 1:
            raise ParameterError("block and section lengths must be positive")
        prev = -self.block_len
        for s in self.starts:
            if s < 0 or s - prev < self.block_len:
                raise ParameterError("blocks must be disjoint and in order")
            prev = s
        if self.starts and self.starts[-1] + self.block_len > self.section_len:
            raise ParameterError("last block overruns the section")

    @property
    def count(self):
        return len(self.starts)

    def columns(self):
        """All vector positions covered by the blocks, in ascending order."""
        return [s + i for s in self.starts for i in range(self.block_len)]


def _floor_log2(x):
    assert x >= 1
    return x.bit_length() - 1


def common_capacity(n_sections, n_users):
    """Bits carried by the choice of which sections are active.

    Picking ``n_users`` distinct sections out of ``n_sections`` offers
    C(n_sections, n_users) outcomes; the usable payload is the floor of
    its base-2 log.
    """
    if n_users < 1 or n_sections < 1 or n_users >= n_sections:
        raise ParameterError(
            f"need 1 <= n_users < n_sections, got {n_users}, {n_sections}")
    return _floor_log2(comb(n_sections, n_users))


def private_index_capacity(section_len, n_blocks, block_len):
    """Bits carried by placing blocks inside a section.

    There are C(section_len - n_blocks*(block_len-1), n_blocks) ways to drop
    ``n_blocks`` disjoint length-``block_len`` runs into ``section_len``
    slots (collapse every block to a single marker and count subsets of the
    shortened section).
    """
    if n_blocks < 1 or block_len < 1:
        raise ParameterError("need at least one block of positive length")
    reduced = section_len - n_blocks * (block_len - 1)
    if reduced < n_blocks:
        raise ParameterError(
            f"{n_blocks} blocks of length {block_len} do not fit in a "
            f"section of length {section_len}")
    return _floor_log2(comb(reduced, n_blocks))


def qam_capacity(n_blocks, block_len, mod_order):
    """Bits carried by the modulated symbol values of one user."""
    if n_blocks < 1 or block_len < 1:
        raise ParameterError("need at least one block of positive length")
    if mod_order < 2 or mod_order & (mod_order - 1):
        raise ParameterError("modulation order must be a power of two >= 2")
    return n_blocks * block_len * _floor_log2(mod_order)


def unrank_combination(rank, n, k):
    """Return the k-subset of {0,...,n-1} at position ``rank`` in
    lexicographic order of sorted tuples."""
    total = comb(n, k)
    if not 0 <= rank < total:
        raise OutOfRangeError(f"rank {rank} outside [0, {total})")
    members = []
    x = 0
    r = rank
    for i in range(k):
        # Advance x past every candidate whose branch is exhausted by r.
        while True:
            branch = comb(n - 1 - x, k - 1 - i)
            if branch > r:
                break
            r -= branch
            x += 1
        members.append(x)
        x += 1
    return CombinationSet(tuple(members), n, k)


def rank_combination(cs):
    """Lexicographic position of a CombinationSet; inverse of unrank.

    The subsets skipped before member c contribute
    sum(C(n-1-x, k-1-i) for x in [prev, c)), which telescopes to
    C(n-prev, k-i) - C(n-c, k-i).
    """
    r = 0
    prev = 0
    n, k = cs.n, cs.k
    for i, c in enumerate(cs.members):
        r += comb(n - prev, k - i) - comb(n - c, k - i)
        prev = c + 1
    return r


def unrank_block_placement(rank, section_len, n_blocks, block_len):
    """Return the block placement at position ``rank``.

    Placements are ordered lexicographically by their start tuples.  The
    bijection with plain subsets: subtract i*(block_len-1) from the i-th
    start and the gaps collapse, leaving a sorted subset of the reduced
    section.
    """
    reduced = section_len - n_blocks * (block_len - 1)
    if reduced < n_blocks:
        raise ParameterError(
            f"{n_blocks} blocks of length {block_len} do not fit in a "
            f"section of length {section_len}")
    cs = unrank_combination(rank, reduced, n_blocks)
    starts = tuple(t + i * (block_len - 1) for i, t in enumerate(cs.members))
    return BlockPlacement(starts, block_len, section_len)


def rank_block_placement(placement):
    """Lexicographic position of a placement; inverse of unrank."""
    block_len = placement.block_len
    n_blocks = placement.count
    if n_blocks < 1:
        raise ParameterError("placement must contain at least one block")
    reduced = placement.section_len - n_blocks * (block_len - 1)
    members = tuple(s - i * (block_len - 1)
                    for i, s in enumerate(placement.starts))
    return rank_combination(CombinationSet(members, reduced, n_blocks))
