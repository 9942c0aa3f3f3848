"""Cauchy-matrix MDS encoding and (Z, F) non-perfect secret sharing.

A file is split into F-Z subfiles, stacked above Z uniformly random
vectors, and multiplied by an F x F Cauchy matrix to produce F shares.
Any Z shares are statistically independent of the file (checked in the
secrecy module); all F shares reconstruct it exactly.

Symbols are field elements (see field.BinaryField); share vectors are
numpy arrays of symbols.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .field import BinaryField


@dataclass(frozen=True)
class SymbolMatrix:
    """Dense matrix of field symbols, row-major."""

    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ValueError("matrix dimensions must be positive")
        if len(self.entries) != self.rows or any(
            len(r) != self.cols for r in self.entries
        ):
            raise ValueError("entry grid does not match declared shape")

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i]

    def hex_str(self) -> str:
        """Whitespace-separated hex symbols, one matrix row per line."""
        return "\n".join(" ".join(f"{e:x}" for e in row) for row in self.entries)


@dataclass(frozen=True)
class ShareMeta:
    """Geometry of one file's sharing: sizes, padding, symbol counts."""

    num_shares: int  # F
    num_random: int  # Z
    data_bits: int  # original file size
    padded_bits: int  # divisible by (F-Z) * l
    symbols_per_share: int

    @property
    def num_subfiles(self) -> int:
        return self.num_shares - self.num_random

    @property
    def share_bits(self) -> int:
        return self.padded_bits // self.num_subfiles


def cauchy_matrix(n: int, field: BinaryField) -> SymbolMatrix:
    """n x n Cauchy matrix with entry (i, j) = 1 / (x_i + y_j).

    Evaluation points are fixed for reproducibility: x_i = i - 1 and
    y_j = n + j - 1 as bit patterns, so 2n distinct field elements are
    needed (2n <= 2^l).  Every square submatrix of the result is
    invertible.
    """
    if n < 1:
        raise ValueError("matrix size must be positive")
    if 2 * n > field.order:
        raise ValueError(
            f"field GF(2^{field.l}) too small for a {n}x{n} Cauchy matrix "
            f"(need {2 * n} distinct elements)"
        )
    entries = tuple(
        tuple(field.inv(x ^ y) for y in range(n, 2 * n)) for x in range(n)
    )
    return SymbolMatrix(n, n, entries)


def invert_matrix(mat: SymbolMatrix, field: BinaryField) -> SymbolMatrix:
    """Gauss-Jordan inverse over the field; raises on a singular matrix."""
    if mat.rows != mat.cols:
        raise ValueError("only square matrices can be inverted")
    n = mat.rows
    a = [list(row) for row in mat.entries]
    inv = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ValueError("singular matrix")
        a[col], a[pivot] = a[pivot], a[col]
        inv[col], inv[pivot] = inv[pivot], inv[col]
        scale = field.inv(a[col][col])
        a[col] = [field.mul(scale, v) for v in a[col]]
        inv[col] = [field.mul(scale, v) for v in inv[col]]
        for r in range(n):
            if r == col or a[r][col] == 0:
                continue
            f = a[r][col]
            a[r] = [v ^ field.mul(f, w) for v, w in zip(a[r], a[col])]
            inv[r] = [v ^ field.mul(f, w) for v, w in zip(inv[r], inv[col])]
    return SymbolMatrix(n, n, tuple(tuple(row) for row in inv))


def _mat_vec_rows(
    matrix: SymbolMatrix, vectors: list[np.ndarray], field: BinaryField
) -> list[np.ndarray]:
    """Row i of the result = XOR_j matrix[i][j] * vectors[j], elementwise."""
    width = len(vectors[0])
    out = []
    for row in matrix.entries:
        acc = field.zeros(width)
        for coeff, vec in zip(row, vectors):
            if coeff:
                acc ^= field.scale(coeff, vec)
        out.append(acc)
    return out


def encode_shares(
    subfiles: list[np.ndarray],
    randomness: list[np.ndarray],
    enc: SymbolMatrix,
    field: BinaryField,
) -> list[np.ndarray]:
    """Produce F shares from F-Z subfiles and Z randomness vectors.

    The input column stacks the subfiles above the randomness; share j is
    the j-th row of enc applied symbol-wise to that column.
    """
    inputs = list(subfiles) + list(randomness)
    if enc.rows != enc.cols or enc.rows != len(inputs):
        raise ValueError(
            f"encoding matrix is {enc.rows}x{enc.cols} but got "
            f"{len(subfiles)} subfiles + {len(randomness)} randomness vectors"
        )
    lengths = {len(v) for v in inputs}
    if len(lengths) != 1:
        raise ValueError("subfile and randomness symbol-lengths differ")
    return _mat_vec_rows(enc, inputs, field)


@lru_cache(maxsize=64)
def _cached_inverse(enc: SymbolMatrix, field: BinaryField) -> SymbolMatrix:
    return invert_matrix(enc, field)


def reconstruct_file(
    shares: list[np.ndarray],
    enc: SymbolMatrix,
    field: BinaryField,
    num_random: int,
) -> list[np.ndarray]:
    """Solve enc * inputs = shares and return the F - Z subfile vectors."""
    if len(shares) != enc.rows:
        raise ValueError(f"need all {enc.rows} shares, got {len(shares)}")
    if not 0 <= num_random < enc.rows:
        raise ValueError("randomness count out of range")
    inputs = _mat_vec_rows(_cached_inverse(enc, field), list(shares), field)
    return inputs[: enc.rows - num_random]


# -- byte <-> symbol plumbing ------------------------------------------------


def _share_meta(data_bits: int, f: int, z: int, field: BinaryField) -> ShareMeta:
    if not 0 <= z < f:
        raise ValueError(f"need 0 <= Z < F, got Z={z}, F={f}")
    unit = (f - z) * field.l
    padded = -(-data_bits // unit) * unit
    return ShareMeta(f, z, data_bits, padded, padded // ((f - z) * field.l))


def bytes_to_subfiles(
    data: bytes, f: int, z: int, field: BinaryField
) -> tuple[list[np.ndarray], ShareMeta]:
    """Split a byte string into F-Z equal subfile symbol vectors.

    The bit stream is read MSB-first and zero-padded at the end so its
    length is divisible by (F-Z) * l; the original length is kept in the
    returned metadata and restored on reassembly.
    """
    meta = _share_meta(8 * len(data), f, z, field)
    value = int.from_bytes(data, "big") << (meta.padded_bits - meta.data_bits)
    total_syms = meta.padded_bits // field.l
    mask = field.order - 1
    symbols = [
        (value >> (meta.padded_bits - (t + 1) * field.l)) & mask
        for t in range(total_syms)
    ]
    per = meta.symbols_per_share
    subfiles = [
        field.vector(symbols[m * per : (m + 1) * per])
        for m in range(meta.num_subfiles)
    ]
    return subfiles, meta


def subfiles_to_bytes(
    subfiles: list[np.ndarray], meta: ShareMeta, field: BinaryField
) -> bytes:
    """Inverse of bytes_to_subfiles: reassemble bits and strip the padding."""
    value = 0
    for sub in subfiles:
        for sym in sub:
            value = (value << field.l) | int(sym)
    value >>= meta.padded_bits - meta.data_bits
    return value.to_bytes(meta.data_bits // 8, "big")


def random_vector(length: int, field: BinaryField, rng) -> np.ndarray:
    """Uniform symbol vector drawn from a seedable generator."""
    return field.vector([rng.getrandbits(field.l) for _ in range(length)])


def share_file(
    data: bytes, enc: SymbolMatrix, num_random: int, field: BinaryField, rng
) -> tuple[list[np.ndarray], list[np.ndarray], ShareMeta]:
    """Encode one file into F shares; returns (shares, randomness, meta)."""
    f = enc.rows
    subfiles, meta = bytes_to_subfiles(data, f, num_random, field)
    randomness = [
        random_vector(meta.symbols_per_share, field, rng) for _ in range(num_random)
    ]
    return encode_shares(subfiles, randomness, enc, field), randomness, meta


def unshare_file(
    shares: list[np.ndarray], enc: SymbolMatrix, meta: ShareMeta, field: BinaryField
) -> bytes:
    """Recover the original bytes from all F shares."""
    subfiles = reconstruct_file(shares, enc, field, meta.num_random)
    return subfiles_to_bytes(subfiles, meta, field)
