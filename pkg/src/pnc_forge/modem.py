"""Gray-labelled square QAM constellations and joint symbol tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, ContractViolation
from .gf2 import bits_to_int

SCHEMES = {"bpsk": 1, "qpsk": 2, "qam16": 4}
_ALIASES = {"16qam": "qam16", "qam-16": "qam16", "4qam": "qpsk"}


def _gray_pam(bits: int) -> np.ndarray:
    """Amplitude for each label of a Gray-coded 2^bits-PAM, ascending levels.

    Label 0 sits on the most positive level so that BPSK maps 0 -> +1.
    """
    n = 1 << bits
    levels = np.arange(n - 1, -n, -2, dtype=float)
    out = np.empty(n)
    for pos in range(n):
        out[pos ^ (pos >> 1)] = levels[pos]
    return out


@dataclass(frozen=True)
class Constellation:
    name: str
    order_bits: int
    points: np.ndarray = field(repr=False, compare=False)

    @property
    def size(self) -> int:
        return 1 << self.order_bits

    def __hash__(self):
        return hash(self.name)


def scheme_name(name: str) -> str:
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in SCHEMES:
        raise ConfigError(f"unknown modulation {name!r}; expected one of {sorted(SCHEMES)}", "mods")
    return key


def make_constellation(name: str) -> Constellation:
    key = scheme_name(name)
    m = SCHEMES[key]
    if m == 1:
        pts = _gray_pam(1).astype(complex)
    else:
        # first half of the label drives the in-phase axis, second half quadrature
        half = m // 2
        pam = _gray_pam(half)
        labels = np.arange(1 << m)
        pts = pam[labels >> half] + 1j * pam[labels & ((1 << half) - 1)]
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    pts.setflags(write=False)
    return Constellation(key, m, pts)


def modulate(c: Constellation, bits: Sequence[int]) -> complex:
    if len(bits) != c.order_bits:
        raise ContractViolation(f"{c.name} takes {c.order_bits} bits, got {len(bits)}")
    return complex(c.points[bits_to_int(bits)])


def split_message(b: int, orders: Sequence[int]) -> tuple[int, ...]:
    """Split a packed joint message into per-MT labels, MT 1 in the top bits."""
    labels = []
    shift = sum(orders)
    for m in orders:
        shift -= m
        labels.append((b >> shift) & ((1 << m) - 1))
    return tuple(labels)


def merge_labels(labels: Sequence[int], orders: Sequence[int]) -> int:
    b = 0
    for label, m in zip(labels, orders):
        b = (b << m) | label
    return b


@dataclass(frozen=True)
class JointCombinationTable:
    """Every joint message ``b`` (ascending) with its per-MT symbol tuple.

    ``labels[k, i]`` is MT i's label in message k and ``symbols[k, i]`` its point.
    """

    schemes: tuple[Constellation, ...]
    labels: np.ndarray = field(repr=False, compare=False)
    symbols: np.ndarray = field(repr=False, compare=False)

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(c.order_bits for c in self.schemes)

    @property
    def m_s(self) -> int:
        return sum(self.orders)

    @property
    def n_mts(self) -> int:
        return len(self.schemes)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.schemes)

    def __len__(self) -> int:
        return 1 << self.m_s

    def __hash__(self):
        return hash(self.names)

    def __eq__(self, other):
        return isinstance(other, JointCombinationTable) and self.names == other.names


def joint_combinations(schemes: Sequence[Constellation | str]) -> JointCombinationTable:
    if not schemes:
        raise ContractViolation("need at least one MT")
    consts = tuple(make_constellation(s) if isinstance(s, str) else s for s in schemes)
    orders = [c.order_bits for c in consts]
    m_s = sum(orders)
    idx = np.arange(1 << m_s)
    labels = np.empty((idx.size, len(consts)), dtype=np.int64)
    shift = m_s
    for i, m in enumerate(orders):
        shift -= m
        labels[:, i] = (idx >> shift) & ((1 << m) - 1)
    symbols = np.column_stack([c.points[labels[:, i]] for i, c in enumerate(consts)])
    labels.setflags(write=False)
    symbols.setflags(write=False)
    return JointCombinationTable(consts, labels, symbols)


def parse_mods(text: str | Sequence[str]) -> tuple[str, ...]:
    parts = text.split(",") if isinstance(text, str) else list(text)
    names = tuple(scheme_name(p) for p in parts if p.strip())
    if not names:
        raise ConfigError("no modulation given", "mods")
    return names
