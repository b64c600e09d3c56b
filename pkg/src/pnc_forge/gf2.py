"""Linear algebra over GF(2).

Matrices are stored as one Python int per row (column 0 is the most significant
bit), so products reduce to AND + parity and row operations to XOR. Vectors at
the API boundary are 0/1 sequences; the ``*_int`` helpers work on the packed
integer form directly and are what the hot paths use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ContractViolation, SingularMatrixError


def bits_to_int(bits: Sequence[int]) -> int:
    """Pack a bit sequence, first element most significant."""
    value = 0
    for bit in bits:
        if bit not in (0, 1):
            raise ContractViolation(f"not a bit: {bit!r}")
        value = (value << 1) | int(bit)
    return value


def int_to_bits(value: int, length: int) -> np.ndarray:
    if value >> length:
        raise ContractViolation(f"{value} does not fit in {length} bits")
    return np.array([(value >> (length - 1 - i)) & 1 for i in range(length)], dtype=np.uint8)


def parity(value: int) -> int:
    return value.bit_count() & 1


@dataclass(frozen=True)
class BinaryMatrix:
    """An ``rows x cols`` matrix over GF(2), rows packed into ints."""

    rows: int
    cols: int
    data: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ContractViolation(f"matrix must be at least 1x1, got {self.rows}x{self.cols}")
        if len(self.data) != self.rows:
            raise ContractViolation("row count does not match data")
        limit = 1 << self.cols
        for row in self.data:
            if not 0 <= row < limit:
                raise ContractViolation(f"row {row:#x} has bits outside {self.cols} columns")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]]) -> BinaryMatrix:
        rows = [list(r) for r in rows]
        if not rows:
            raise ContractViolation("matrix needs at least one row")
        cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise ContractViolation("ragged rows")
        return cls(len(rows), cols, tuple(bits_to_int(r) for r in rows))

    @classmethod
    def from_array(cls, array) -> BinaryMatrix:
        arr = np.atleast_2d(np.asarray(array))
        return cls.from_rows(arr.tolist())

    @classmethod
    def from_int(cls, value: int, rows: int, cols: int) -> BinaryMatrix:
        """Inverse of :attr:`encoding`."""
        mask = (1 << cols) - 1
        data = tuple((value >> (cols * (rows - 1 - i))) & mask for i in range(rows))
        return cls(rows, cols, data)

    @classmethod
    def identity(cls, n: int) -> BinaryMatrix:
        return cls(n, n, tuple(1 << (n - 1 - i) for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BinaryMatrix:
        return cls(rows, cols, (0,) * rows)

    @property
    def encoding(self) -> int:
        """Integer value of the row-major bit string (entry [0][0] most significant)."""
        value = 0
        for row in self.data:
            value = (value << self.cols) | row
        return value

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def to_array(self) -> np.ndarray:
        return np.array([int_to_bits(r, self.cols) for r in self.data], dtype=np.uint8)

    def to_hex(self) -> str:
        """``RxC:hex`` form used in store files."""
        return f"{self.rows}x{self.cols}:{self.encoding:x}"

    @classmethod
    def from_hex(cls, text: str) -> BinaryMatrix:
        try:
            dims, payload = text.split(":")
            rows, cols = (int(x) for x in dims.split("x"))
            value = int(payload, 16)
        except ValueError as exc:
            raise ContractViolation(f"bad matrix literal {text!r}") from exc
        if value >> (rows * cols):
            raise ContractViolation(f"matrix literal {text!r} overflows its dimensions")
        return cls.from_int(value, rows, cols)

    def __getitem__(self, index: tuple[int, int]) -> int:
        i, j = index
        return (self.data[i] >> (self.cols - 1 - j)) & 1

    def __str__(self) -> str:
        return "\n".join(format(r, f"0{self.cols}b") for r in self.data)


def mat_mul_int(G: BinaryMatrix, x: int) -> int:
    """``G ⊗ x`` on packed vectors; output bit 0 (MSB) is row 0."""
    out = 0
    for row in G.data:
        out = (out << 1) | ((row & x).bit_count() & 1)
    return out


def mat_mul(G: BinaryMatrix, b: Sequence[int]) -> np.ndarray:
    if len(b) != G.cols:
        raise ContractViolation(f"vector length {len(b)} != matrix columns {G.cols}")
    return int_to_bits(mat_mul_int(G, bits_to_int(b)), G.rows)


def matrix_product(A: BinaryMatrix, B: BinaryMatrix) -> BinaryMatrix:
    if A.cols != B.rows:
        raise ContractViolation(f"cannot multiply {A.shape} by {B.shape}")
    data = []
    for row in A.data:
        acc = 0
        for j in range(A.cols):
            if (row >> (A.cols - 1 - j)) & 1:
                acc ^= B.data[j]
        data.append(acc)
    return BinaryMatrix(A.rows, B.cols, tuple(data))


def vstack(*mats: BinaryMatrix) -> BinaryMatrix:
    cols = {m.cols for m in mats}
    if len(cols) != 1:
        raise ContractViolation("vstack needs equal column counts")
    data = tuple(r for m in mats for r in m.data)
    return BinaryMatrix(len(data), cols.pop(), data)


def rank(G: BinaryMatrix) -> int:
    return len(echelon_basis(G.data))


def invert(G: BinaryMatrix) -> BinaryMatrix:
    """Gauss-Jordan inverse; raises :class:`SingularMatrixError` when rank < rows."""
    if G.rows != G.cols:
        raise ContractViolation(f"cannot invert non-square {G.rows}x{G.cols} matrix")
    n = G.rows
    left = list(G.data)
    right = [1 << (n - 1 - i) for i in range(n)]
    for col in range(n):
        bit = 1 << (n - 1 - col)
        pivot = next((r for r in range(col, n) if left[r] & bit), None)
        if pivot is None:
            raise SingularMatrixError(f"matrix is singular (rank {rank(G)} < {n})")
        left[col], left[pivot] = left[pivot], left[col]
        right[col], right[pivot] = right[pivot], right[col]
        for r in range(n):
            if r != col and left[r] & bit:
                left[r] ^= left[col]
                right[r] ^= right[col]
    return BinaryMatrix(n, n, tuple(right))


def enumerate_matrices(l: int, m_s: int, full_row_rank_only: bool = False) -> Iterator[BinaryMatrix]:
    """Yield every ``l x m_s`` matrix in ascending :attr:`BinaryMatrix.encoding` order."""
    if not 1 <= l <= m_s:
        raise ContractViolation(f"need 1 <= l <= m_s, got l={l}, m_s={m_s}")
    for value in range(1 << (l * m_s)):
        G = BinaryMatrix.from_int(value, l, m_s)
        if full_row_rank_only and rank(G) != l:
            continue
        yield G


# -- subspaces of GF(2)^n, vectors packed as ints -------------------------------------


def echelon_basis(vectors: Iterable[int]) -> list[int]:
    """Reduced row-echelon basis of the span, sorted by descending leading bit.

    Two vector sets span the same subspace iff their echelon bases are equal.
    """
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis = [min(b, b ^ v) for b in basis]
            basis.append(v)
            basis.sort(reverse=True)
    return basis


def reduce_vector(v: int, basis: Sequence[int]) -> int:
    """Residue of ``v`` against an echelon basis; zero iff ``v`` is in the span."""
    for b in basis:
        v = min(v, v ^ b)
    return v


def in_span(v: int, basis: Sequence[int]) -> bool:
    return reduce_vector(v, basis) == 0


def span_elements(basis: Sequence[int]) -> list[int]:
    elements = [0]
    for b in basis:
        elements += [e ^ b for e in elements]
    return sorted(elements)


def orthogonal_complement(basis: Sequence[int], n: int) -> list[int]:
    """Echelon basis of ``{x : <x, b> = 0 for all b in basis}`` inside GF(2)^n."""
    basis = echelon_basis(basis)
    pivots = [b.bit_length() - 1 for b in basis]
    free = [p for p in range(n) if p not in pivots]
    out = []
    for f in free:
        # x_f = 1, other free coordinates 0, pivot coordinates solve <x, b> = 0
        x = 1 << f
        for b, p in zip(basis, pivots):
            if parity(b & x):
                x |= 1 << p
        out.append(x)
    return echelon_basis(out)


def intersects_trivially(a: Sequence[int], b: Sequence[int]) -> bool:
    """True iff span(a) ∩ span(b) = {0}."""
    return len(echelon_basis(list(a) + list(b))) == len(echelon_basis(a)) + len(echelon_basis(b))


def rref(G: BinaryMatrix) -> BinaryMatrix:
    """Canonical full-row-rank representative of the row space of ``G``."""
    basis = echelon_basis(G.data)
    if not basis:
        raise ContractViolation("zero matrix has no row-space representative")
    return BinaryMatrix(len(basis), G.cols, tuple(basis))


def subspaces(ambient_basis: Sequence[int], dim: int) -> Iterator[list[int]]:
    """Yield echelon bases of every ``dim``-dimensional subspace of span(ambient_basis).

    Enumerates reduced row-echelon coefficient matrices over the ambient basis,
    so every subspace appears exactly once.
    """
    amb = echelon_basis(ambient_basis)
    d = len(amb)
    if dim > d or dim < 0:
        return
    if dim == 0:
        yield []
        return
    from itertools import combinations, product

    for pivots in combinations(range(d), dim):
        # free slots: for row r, columns after its pivot that are not pivots
        slots = [(r, c) for r, p in enumerate(pivots) for c in range(p + 1, d) if c not in pivots]
        for fill in product((0, 1), repeat=len(slots)):
            coeff_rows = [1 << (d - 1 - p) for p in pivots]
            for (r, c), bit in zip(slots, fill):
                if bit:
                    coeff_rows[r] |= 1 << (d - 1 - c)
            vecs = []
            for cr in coeff_rows:
                v = 0
                for k in range(d):
                    if (cr >> (d - 1 - k)) & 1:
                        v ^= amb[k]
                vecs.append(v)
            yield echelon_basis(vecs)
