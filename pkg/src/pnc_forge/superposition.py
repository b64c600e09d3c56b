"""Superimposed constellations, NCV clusters and minimum inter-cluster distance."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ContractViolation
from .gf2 import BinaryMatrix, mat_mul_int
from .modem import JointCombinationTable

# squared distance below which two superimposed points count as the same point
COINCIDENCE_TOL = 1e-9

# returned by min_intercluster_distance when every point sits in one cluster
NO_CROSS_PAIR = float("inf")


@dataclass(frozen=True)
class SuperimposedConstellation:
    channel: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    table: JointCombinationTable

    @property
    def m_s(self) -> int:
        return self.table.m_s


@dataclass(frozen=True)
class ClusterPartition:
    """Joint-message indices grouped by NCV value ``G ⊗ b`` (MSB = NCV row 0)."""

    mapping: BinaryMatrix
    labels: np.ndarray = field(repr=False)  # NCV value per joint message

    @property
    def clusters(self) -> Mapping[int, frozenset[int]]:
        out: dict[int, set[int]] = {}
        for k, x in enumerate(self.labels.tolist()):
            out.setdefault(x, set()).add(k)
        return {x: frozenset(v) for x, v in sorted(out.items())}

    def __len__(self) -> int:
        return len(np.unique(self.labels))


def sq_dist(a, b) -> np.ndarray:
    """``|a - b|^2`` as ``re^2 + im^2`` (no hypot, so results are bit-reproducible)."""
    d = np.asarray(a) - np.asarray(b)
    return d.real * d.real + d.imag * d.imag


def superimpose(h: Sequence[complex], table: JointCombinationTable) -> SuperimposedConstellation:
    h = np.asarray(h, dtype=complex).ravel()
    if h.size != table.n_mts:
        raise ContractViolation(f"channel has {h.size} taps for {table.n_mts} MTs")
    points = table.symbols @ h
    return SuperimposedConstellation(h, points, table)


def ncv_labels(G: BinaryMatrix, m_s: int) -> np.ndarray:
    """NCV value for every joint message ``0 .. 2^m_s - 1``."""
    if G.cols != m_s:
        raise ContractViolation(f"mapping has {G.cols} columns, messages have {m_s} bits")
    idx = np.arange(1 << m_s, dtype=np.int64)
    out = np.zeros_like(idx)
    for row in G.data:
        bit = np.zeros_like(idx)
        masked = idx & row
        while masked.any():
            bit ^= masked & 1
            masked >>= 1
        out = (out << 1) | bit
    return out


def partition_clusters(G: BinaryMatrix, table: JointCombinationTable) -> ClusterPartition:
    labels = ncv_labels(G, table.m_s)
    labels.setflags(write=False)
    return ClusterPartition(G, labels)


def min_intercluster_distance(sc: SuperimposedConstellation, part: ClusterPartition) -> float:
    """Smallest |s_i - s_k|^2 over point pairs that land in different clusters."""
    if part.labels.size != sc.points.size:
        raise ContractViolation("partition and constellation are not index-aligned")
    diff = sq_dist(sc.points[:, None], sc.points[None, :])
    cross = part.labels[:, None] != part.labels[None, :]
    if not cross.any():
        return NO_CROSS_PAIR
    return float(diff[cross].min())


def xor_distance_profile(points: np.ndarray) -> np.ndarray:
    """``w[d]`` = min |s_k - s_(k xor d)|^2 over k, for every XOR offset d (``w[0] = inf``).

    Since ``G ⊗ b_k != G ⊗ b_k'`` iff ``b_k xor b_k'`` is outside ker G, the
    minimum inter-cluster distance of any mapping is the minimum of ``w`` over
    offsets outside its kernel. Selection works off this table.
    """
    n = points.size
    idx = np.arange(n)
    offsets = idx[:, None] ^ idx[None, :]  # [d, k] -> k xor d
    w = sq_dist(points[offsets], points[None, :]).min(axis=1)
    w[0] = np.inf
    return w


def dmin_from_profile(w: np.ndarray, kernel_elements: Sequence[int]) -> float:
    mask = np.ones(w.size, dtype=bool)
    mask[list(kernel_elements)] = False
    if not mask.any():
        return NO_CROSS_PAIR
    return float(w[mask].min())


def coincident_pairs(points: np.ndarray, tol: float = COINCIDENCE_TOL) -> list[tuple[int, int]]:
    """All index pairs ``i < k`` whose points coincide within ``tol`` (squared distance)."""
    diff = sq_dist(points[:, None], points[None, :])
    i, k = np.nonzero(np.triu(diff < tol, 1))
    return list(zip(i.tolist(), k.tolist()))


def mapping_dmin(G: BinaryMatrix, h: Sequence[complex], table: JointCombinationTable) -> float:
    """Convenience wrapper: d_min of mapping ``G`` on channel ``h``."""
    return min_intercluster_distance(superimpose(h, table), partition_clusters(G, table))


def ncv_of(G: BinaryMatrix, b: int) -> int:
    return mat_mul_int(G, b)
