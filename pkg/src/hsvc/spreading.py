"""Random sign spreading codebooks.

A codebook is an M x N matrix of +-1 entries scaled by 1/sqrt(k_non),
where k_non is the number of non-zero entries in the sparse vectors it
will spread.  With unit-energy symbols that scaling puts the average
transmit power per row at one.

Entries are drawn from a counter-based generator (NumPy Philox seeded
through SeedSequence(seed), entries = integers(0, 2) mapped to +-1, row
major), so a (seed, shape, k_non) triple pins the matrix down exactly.

File format (little endian), 32-byte header:

    offset  size  field
    0       8     magic "HSVCGCBK"
    8       2     format version (currently 1)
    10      4     n_rows
    14      4     n_cols
    18      4     k_non
    22      8     seed
    30      2     padding (zero)

An optional body of n_rows * n_cols signed bytes (+1/-1, row major)
follows for consumers that cannot re-run the generator; without a body
the loader regenerates the matrix from the header.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

MAGIC = b"HSVCGCBK"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sHIIIQ2x")


@dataclass(frozen=True)
class Codebook:
    matrix: np.ndarray = field(repr=False)
    seed: int
    k_non: int
    n_sections: int

    @property
    def n_rows(self):
        return self.matrix.shape[0]

    @property
    def n_cols(self):
        return self.matrix.shape[1]

    @property
    def section_len(self):
        return self.n_cols // self.n_sections

    @property
    def scale(self):
        return 1.0 / np.sqrt(self.k_non)


def generate_codebook(seed, n_rows, n_cols, k_non, n_sections=1):
    if n_rows < 1 or n_cols < 1:
        raise ParameterError("codebook dimensions must be positive")
    if k_non < 1:
        raise ParameterError("k_non must be at least 1")
    if n_sections < 1 or n_cols % n_sections:
        raise ParameterError(
            f"cannot split {n_cols} columns into {n_sections} sections")
    if not 0 <= seed < 2 ** 64:
        raise ParameterError("seed must fit in 64 bits")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    signs = rng.integers(0, 2, size=(n_rows, n_cols), dtype=np.int8)
    matrix = (2.0 * signs - 1.0) / np.sqrt(k_non)
    return Codebook(matrix, seed, k_non, n_sections)


def spread(values, codebook):
    """Project a length-N vector onto the M subcarriers."""
    values = np.asarray(values)
    if values.shape != (codebook.n_cols,):
        raise ParameterError(
            f"expected a vector of length {codebook.n_cols}, "
            f"got shape {values.shape}")
    return codebook.matrix @ values


def sub_matrix(codebook, section):
    """Columns of one section, as a view into the codebook."""
    if not 0 <= section < codebook.n_sections:
        raise ParameterError(f"section {section} out of range")
    d = codebook.section_len
    return codebook.matrix[:, section * d:(section + 1) * d]


def save_codebook(codebook, path, include_matrix=False):
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, codebook.n_rows,
                          codebook.n_cols, codebook.k_non, codebook.seed)
    with open(path, "wb") as fh:
        fh.write(header)
        if include_matrix:
            signs = np.sign(codebook.matrix.real).astype(np.int8)
            fh.write(signs.tobytes())


def load_codebook(path, n_sections=1):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ParameterError(f"{path}: truncated codebook header")
    magic, version, n_rows, n_cols, k_non, seed = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ParameterError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ParameterError(f"{path}: unsupported format version {version}")
    body = raw[_HEADER.size:]
    if not body:
        return generate_codebook(seed, n_rows, n_cols, k_non, n_sections)
    if len(body) != n_rows * n_cols:
        raise ParameterError(f"{path}: body size does not match header")
    signs = np.frombuffer(body, dtype=np.int8).reshape(n_rows, n_cols)
    if not np.all(np.abs(signs) == 1):
        raise ParameterError(f"{path}: body entries must be +-1")
    matrix = signs / np.sqrt(k_non)
    if n_sections < 1 or n_cols % n_sections:
        raise ParameterError(
            f"cannot split {n_cols} columns into {n_sections} sections")
    return Codebook(matrix, seed, k_non, n_sections)
