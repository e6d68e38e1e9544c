"""Greedy block-sparse recovery kernels.

Three pursuit variants share one greedy core:

* ``bomp``   selects whole aligned sections by correlation energy and
  jointly re-fits the picked columns by least squares after every pick.
* ``omp``    is the scalar special case (section length one).
* ``mbomp``  recovers blocks at arbitrary offsets inside one section by
  solving the aligned problem under each of the L cyclic column shifts
  and keeping the candidate with the smallest residual on the original
  matrix.

The cyclic shift convention is fixed by the identity

    A @ c == shift_cols(A, l) @ shift_vec(c, -l)

for every l, i.e. column i of the shifted matrix is column (i+l) mod D
of A, and shift_vec moves entry j to slot (j+l) mod D.  A block starting
at position s therefore sits at the aligned slot s - (s mod L) once the
matrix is shifted by l = s mod L, and aligned starts map back to the
original coordinates by adding the shift.

All ties break toward the lowest index so identical inputs always give
identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .errors import DecodeFailure, ParameterError, SingularSystemError


@dataclass(frozen=True)
class Support:
    """Disjoint (start, length) blocks inside a length-n vector."""

    blocks: tuple
    n: int

    def __post_init__(self):
        prev_end = 0
        for start, length in self.blocks:
            if length < 1 or start < prev_end:
                raise ParameterError("blocks must be disjoint and ordered")
            prev_end = start + length
        if prev_end > self.n:
            raise ParameterError("support overruns the vector")

    def columns(self):
        return [s + t for s, length in self.blocks for t in range(length)]

    @property
    def starts(self):
        return tuple(s for s, _ in self.blocks)


@dataclass(frozen=True)
class RecoveryResult:
    support: Support
    values: np.ndarray = field(repr=False)
    residual_norm2: float
    residual: np.ndarray = field(repr=False)


def shift_cols(a, shift):
    """Cyclic column shift: column i of the result is column (i+shift) mod D."""
    return np.roll(a, -shift, axis=1)


def shift_vec(v, shift):
    """Cyclic vector shift: entry j of v moves to slot (j+shift) mod D."""
    return np.roll(v, shift)


def ls_estimate(y, a_support):
    """Least-squares values on a fixed support via a QR factorization.

    Solved by LAPACK's QR-based gels driver (the explicit Gram inverse
    is avoided for conditioning reasons); a rank-deficient column set
    raises SingularSystemError, detected from the R diagonal.
    """
    a_support = np.asarray(a_support)
    if a_support.ndim != 2 or a_support.shape[1] < 1:
        raise ParameterError("support matrix must be M x k with k >= 1")
    k = a_support.shape[1]
    if np.iscomplexobj(a_support) or np.iscomplexobj(y):
        qr_, x, info = lapack.zgels(
            a_support.astype(np.complex128, copy=False),
            np.asarray(y, dtype=np.complex128))
    else:
        qr_, x, info = lapack.dgels(
            a_support.astype(np.float64, copy=False),
            np.asarray(y, dtype=np.float64))
    if info < 0:
        raise ParameterError(f"invalid least-squares input (arg {-info})")
    diag = np.abs(np.diagonal(qr_))
    tol = max(a_support.shape) * np.finfo(np.float64).eps * diag.max()
    if info > 0 or diag.min() <= tol:
        raise SingularSystemError("selected columns are rank deficient")
    return x[:k]


def bomp_fast_residual(r_prev, a_selected):
    """Residual update shortcut for an orthonormal selected block.

    With orthonormal columns the least-squares projection collapses to
    r - A (A^H r).  The orthonormality precondition is the caller's
    contract; it is checked here because the check is cheap relative to
    a silent wrong answer.
    """
    a_selected = np.asarray(a_selected)
    gram = a_selected.conj().T @ a_selected
    if not np.allclose(gram, np.eye(a_selected.shape[1]), atol=1e-8):
        raise ParameterError("selected block is not orthonormal")
    return r_prev - a_selected @ (a_selected.conj().T @ r_prev)


# Candidate geometry is config-static, so the index matrices that gather
# per-block energies are memoized by shape rather than rebuilt per call.
_GRID_CACHE = {}
_SHIFT_CACHE = {}


def _block_grid(n_blocks, block_len):
    key = (n_blocks, block_len)
    got = _GRID_CACHE.get(key)
    if got is None:
        starts = np.arange(n_blocks) * block_len
        idx = starts[:, None] + np.arange(block_len)[None, :]
        got = _GRID_CACHE[key] = (starts, idx)
    return got


def _shift_candidates(d, block_len):
    """Aligned candidate slots of every cyclic shift, wraparound excluded."""
    key = (d, block_len)
    got = _SHIFT_CACHE.get(key)
    if got is None:
        aligned_all = np.arange(0, d - block_len + 1, block_len)
        offsets = np.arange(block_len)
        got = []
        for shift in range(block_len):
            # A slot survives if the mapped-back block [slot+shift,
            # slot+shift+block_len) stays inside the section.
            aligned = aligned_all[aligned_all + shift + block_len <= d]
            if aligned.size:
                got.append((shift, aligned,
                            aligned[:, None] + offsets[None, :]))
        _SHIFT_CACHE[key] = got
    return got


def _greedy_blocks(y, a, cand_starts, block_len, n_select, idx=None):
    """Greedy selection of disjoint fixed-length blocks with joint re-fit.

    Candidates are given by their start columns (sorted, non-overlapping).
    Returns (chosen starts ascending, values, residual, residual_norm2).
    """
    n_cand = cand_starts.size
    if n_select > n_cand:
        raise ParameterError(
            f"cannot select {n_select} blocks from {n_cand} candidates")
    if idx is None:
        idx = cand_starts[:, None] + np.arange(block_len)[None, :]
    if n_select == n_cand:
        # Selection is forced; only the joint fit remains.
        cols = idx.ravel()
        values = ls_estimate(y, a[:, cols])
        r = y - a[:, cols] @ values
        return cand_starts, values, r, float(np.vdot(r, r).real)
    taken = np.zeros(n_cand, dtype=bool)
    chosen = []
    r = y
    values = None
    for _ in range(n_select):
        corr2 = np.abs(np.conj(r) @ a) ** 2
        if block_len == 1:
            energies = corr2[cand_starts]
        else:
            energies = corr2[idx].sum(axis=1)
        energies[taken] = -1.0
        pick = int(np.argmax(energies))
        taken[pick] = True
        chosen.append(pick)
        chosen.sort()
        cols = idx[chosen].ravel()
        values = ls_estimate(y, a[:, cols])
        r = y - a[:, cols] @ values
    rn2 = float(np.vdot(r, r).real)
    return cand_starts[chosen], values, r, rn2


def bomp(y, a, section_len, n_sections, sparsity):
    """Block OMP over uniform contiguous sections.

    Each of the ``sparsity`` iterations picks the section whose columns
    carry the largest matched-filter energy against the current
    residual, then re-fits all picked sections jointly.
    """
    y = np.asarray(y)
    a = np.asarray(a)
    if section_len < 1 or n_sections < 1 or a.shape[1] != section_len * n_sections:
        raise ParameterError(
            f"matrix with {a.shape[1]} columns is not {n_sections} "
            f"sections of length {section_len}")
    if not 1 <= sparsity <= n_sections:
        raise ParameterError("sparsity must be in [1, n_sections]")
    starts, idx = _block_grid(n_sections, section_len)
    chosen, values, r, rn2 = _greedy_blocks(y, a, starts, section_len,
                                            sparsity, idx)
    support = Support(tuple((int(s), section_len) for s in chosen), a.shape[1])
    return RecoveryResult(support, values, rn2, r)


def omp(y, a, sparsity):
    """Plain OMP: block OMP with scalar sections."""
    return bomp(y, a, 1, np.asarray(a).shape[1], sparsity)


def mbomp(y, a, block_len, sparsity):
    """Multi-path BOMP inside one section.

    Runs the aligned-block pursuit under every cyclic column shift
    l in {0, ..., block_len-1}; a block starting at s is aligned (and
    free of wraparound) in the problem shifted by s mod block_len.
    Candidate supports from all shifts are compared by their residual
    on the original matrix and the winner is re-fitted there.

    Supports whose blocks would need two different shifts are outside
    the candidate space; the pursuit then returns the best single-shift
    approximation.
    """
    y = np.asarray(y)
    a = np.asarray(a)
    d = a.shape[1]
    if block_len < 1 or sparsity < 1:
        raise ParameterError("block length and sparsity must be positive")
    if d - sparsity * (block_len - 1) < sparsity:
        raise ParameterError(
            f"{sparsity} blocks of length {block_len} do not fit in {d} columns")
    candidates = []
    for shift, aligned, idx in _shift_candidates(d, block_len):
        if aligned.size < sparsity:
            continue
        shifted = shift_cols(a, shift) if shift else a
        try:
            slots, values, resid, rn2 = _greedy_blocks(
                y, shifted, aligned, block_len, sparsity, idx)
        except SingularSystemError:
            continue
        # Slot s of the shifted matrix holds original columns
        # [s+shift, s+shift+block_len) in unchanged order, so the fitted
        # values and residual carry over to the original coordinates.
        starts = tuple(int(s) + shift for s in slots)
        candidates.append((starts, rn2, values, resid))
    if not candidates:
        raise DecodeFailure("no shift admits the requested number of blocks")
    # Deduplicate (different shifts can propose the same support) and pick
    # the smallest residual; ties go to the lexicographically lowest support.
    dedup = {}
    for starts, rn2, values, resid in candidates:
        cur = dedup.get(starts)
        if cur is None or rn2 < cur[0]:
            dedup[starts] = (rn2, values, resid)
    best = min(dedup, key=lambda s: (dedup[s][0], s))
    rn2, values, resid = dedup[best]
    support = Support(tuple((s, block_len) for s in best), d)
    return RecoveryResult(support, values, float(rn2), resid)
