"""AP-side soft detection, CPU-side recovery and the CoMP forwarding baselines.

LLR sign convention throughout: positive means bit 0 is more likely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContractViolation
from .gf2 import BinaryMatrix, invert
from .modem import JointCombinationTable
from .superposition import ClusterPartition, SuperimposedConstellation, sq_dist, superimpose

LLR_MAX = 30.0
QUANT_RANGE = 8.0


@dataclass(frozen=True)
class BackhaulMessage:
    kind: str  # "pnc-ncv" or "comp-llr"
    payload: np.ndarray = field(repr=False)
    bit_count: int


def _label_bits(labels: np.ndarray, nbits: int) -> np.ndarray:
    """(points, nbits) bit table, column 0 = most significant bit of the label."""
    shifts = np.arange(nbits - 1, -1, -1)
    return ((labels[:, None] >> shifts) & 1).astype(bool)


def bit_llrs(
    r, points: np.ndarray, labels: np.ndarray, nbits: int, sigma2: float,
    clip: float = LLR_MAX, max_log: bool = False,
) -> np.ndarray:
    """Per-bit LLRs of ``labels`` given received samples ``r``; shape (samples, nbits)."""
    if not sigma2 > 0:
        raise ContractViolation("sigma2 must be positive")
    r = np.atleast_1d(np.asarray(r, dtype=complex))
    metric = -sq_dist(r[:, None], points[None, :]) / sigma2
    bits = _label_bits(np.asarray(labels), nbits)
    if max_log:
        out = np.empty((r.size, nbits))
        for t in range(nbits):
            ones = bits[:, t]
            out[:, t] = metric[:, ~ones].max(axis=1) - metric[:, ones].max(axis=1)
    else:
        # shifted exp-sums; a set that underflows sits > 700 nats away, far beyond the clip
        peak = metric.max(axis=1, keepdims=True)
        e = np.exp(metric - peak)
        tiny = np.finfo(float).tiny
        s0 = np.maximum(e @ (~bits).astype(float), tiny)
        s1 = np.maximum(e @ bits.astype(float), tiny)
        out = np.log(s0) - np.log(s1)
    return np.clip(out, -clip, clip)


def ncv_llr(r, sc: SuperimposedConstellation, part: ClusterPartition, sigma2: float, **kwargs) -> np.ndarray:
    """LLR of each NCV bit; a scalar ``r`` gives shape (1, l)."""
    if part.labels.size != sc.points.size:
        raise ContractViolation("partition and constellation are not index-aligned")
    return bit_llrs(r, sc.points, part.labels, part.mapping.rows, sigma2, **kwargs)


def ncv_hard(llr) -> np.ndarray:
    """Bit 0 unless the LLR is strictly negative."""
    return (np.asarray(llr) < 0).astype(np.uint8)


def gf2_apply(M: BinaryMatrix, bits: np.ndarray) -> np.ndarray:
    """``M ⊗ x`` for every column ``x`` of a (M.cols, n) bit array."""
    A = M.to_array().astype(np.int64)
    return ((A @ np.asarray(bits, dtype=np.int64)) & 1).astype(np.uint8)


def cpu_decode(ncvs: Sequence[np.ndarray], G_global: BinaryMatrix) -> np.ndarray:
    """Concatenate per-AP NCV bits and apply the inverse global mapping.

    Each entry of ``ncvs`` is (l_j,) for one symbol or (l_j, n) for n symbols;
    the result has the matching (m_s,) or (m_s, n) shape.
    """
    arrays = [np.asarray(x, dtype=np.uint8) for x in ncvs]
    single = arrays[0].ndim == 1
    stacked = np.concatenate([a.reshape(a.shape[0], -1) for a in arrays], axis=0)
    if stacked.shape[0] != G_global.rows:
        raise ContractViolation(f"{stacked.shape[0]} NCV bits for a {G_global.rows}-row global mapping")
    b_hat = gf2_apply(invert(G_global), stacked)
    return b_hat[:, 0] if single else b_hat


def comp_source_llr(r, h_row, table: JointCombinationTable, sigma2: float, **kwargs) -> np.ndarray:
    """Marginal LLR of every source bit (MT 1's bits first) at one AP."""
    sc = superimpose(h_row, table)
    labels = np.arange(len(table))
    return bit_llrs(r, sc.points, labels, table.m_s, sigma2, **kwargs)


def quantize_llr(llrs, bits_per_llr: int, L: float = QUANT_RANGE) -> tuple[np.ndarray, BackhaulMessage]:
    """Uniform mid-rise quantiser on [-L, L], saturating outside.

    The message's bit count is ``bits_per_llr`` times the number of LLRs.
    """
    if bits_per_llr < 1:
        raise ContractViolation("need at least one bit per LLR")
    x = np.asarray(llrs, dtype=float)
    levels = 1 << bits_per_llr
    step = 2.0 * L / levels
    idx = np.clip(np.floor((x + L) / step), 0, levels - 1).astype(np.int64)
    recon = -L + (idx + 0.5) * step
    return recon, BackhaulMessage("comp-llr", idx, int(bits_per_llr * x.size))


def pnc_backhaul_bits(rows_per_ap: Sequence[int]) -> int:
    return int(sum(rows_per_ap))


def comp_backhaul_bits(n_aps: int, m_s: int, bits_per_llr: int) -> int:
    return int(n_aps * m_s * bits_per_llr)
