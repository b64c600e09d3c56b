"""Singular fade states of a two-MT superposition.

A state is stored in canonical form ``h = [1, gamma]``. Index 0 is always the
erasure state ``gamma = 0`` (MT 2 faded out), which collapses every message
pair that differs only in MT 2's bits; the remaining states are the finite
nonzero ratios ``gamma = h2 / h1 = -(s1 - s1') / (s2 - s2')`` that solve
``h1 (s1 - s1') + h2 (s2 - s2') = 0``, sorted by ``(|gamma|, arg gamma)``.

These are the coincidence points of the ``h1 = 1`` chart and make up the
counted state list. The opposite erasure, ``h1 = 0`` (MT 1 faded out), sits
at ``gamma = inf`` outside that chart. It is kept as the table's ``axis``
state and appended after the counted states wherever mappings are searched
or selected, because without it no candidate can isolate MT 2's bits.
"""

from __future__ import annotations

import cmath
import dataclasses
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ContractViolation, InvalidChannelError
from .gf2 import echelon_basis
from .modem import Constellation, JointCombinationTable, joint_combinations, make_constellation
from .superposition import COINCIDENCE_TOL, coincident_pairs, superimpose

RATIO_TOL = 1e-9


@dataclass(frozen=True)
class SingularFadeState:
    ratio: complex
    witnesses: tuple[tuple[int, int], ...] = field(repr=False)

    @property
    def is_erasure(self) -> bool:
        return self.ratio == 0 or self.at_infinity

    @property
    def at_infinity(self) -> bool:
        return cmath.isinf(self.ratio)

    @cached_property
    def clash_span(self) -> tuple[int, ...]:
        """Echelon basis of the XOR differences of all coincident message pairs.

        A mapping ``G`` sends every clash to one NCV iff ``G d = 0`` for every
        vector ``d`` in this span.
        """
        return tuple(echelon_basis(i ^ k for i, k in self.witnesses))

    @property
    def sort_key(self) -> tuple[float, float]:
        return _ratio_key(self.ratio)


@dataclass(frozen=True)
class SfsTable:
    """Counted chart states plus the ``h1 = 0`` axis state.

    ``image_map`` and ``ratios`` run over ``extended_states`` (the axis last);
    ``representatives`` lists the counted states' classes only.
    """

    table: JointCombinationTable
    states: tuple[SingularFadeState, ...]
    axis: SingularFadeState | None = None
    image_map: tuple[int, ...] | None = None

    @property
    def mod_pair(self) -> tuple[str, ...]:
        return self.table.names

    @property
    def all_states(self) -> tuple[SingularFadeState, ...]:
        return self.states

    @property
    def reduced(self) -> bool:
        return self.image_map is not None

    @property
    def extended_states(self) -> tuple[SingularFadeState, ...]:
        return self.states if self.axis is None else self.states + (self.axis,)

    @property
    def axis_index(self) -> int | None:
        return None if self.axis is None else len(self.states)

    @property
    def representatives(self) -> tuple[int, ...]:
        if self.image_map is None:
            raise ContractViolation("table has not been image-reduced")
        return tuple(sorted(set(self.image_map[: len(self.states)])))

    @property
    def extended_representatives(self) -> tuple[int, ...]:
        if self.image_map is None:
            raise ContractViolation("table has not been image-reduced")
        return tuple(sorted(set(self.image_map)))

    @property
    def reduced_states(self) -> tuple[SingularFadeState, ...]:
        return tuple(self.states[i] for i in self.representatives)

    @cached_property
    def ratios(self) -> np.ndarray:
        return np.array([s.ratio for s in self.extended_states], dtype=complex)

    def __len__(self) -> int:
        return len(self.states)


def _ratio_key(z: complex) -> tuple[float, float]:
    if z == 0:
        return (0.0, 0.0)
    phase = cmath.phase(z)
    # keep -pi and +pi together on the +pi side
    if phase <= -np.pi + 1e-12:
        phase = np.pi
    return (round(abs(z), 9), round(phase, 9))


def _distinct(values: np.ndarray, tol: float) -> list[complex]:
    out: list[complex] = []
    for v in values:
        if not out or np.min(np.abs(np.asarray(out) - v)) >= tol:
            out.append(complex(v))
    return out


def _differences(c: Constellation) -> np.ndarray:
    pts = c.points
    d = (pts[:, None] - pts[None, :]).ravel()
    return np.array(_distinct(d[np.abs(d) > 0], RATIO_TOL))


def singular_ratios(c1: Constellation, c2: Constellation) -> list[complex]:
    """Distinct finite nonzero ``h2 / h1`` at which an MT-1 move cancels an MT-2 move."""
    d1 = _differences(c1)
    d2 = _differences(c2)
    ratios = (-d1[:, None] / d2[None, :]).ravel()
    ratios = ratios[np.lexsort((ratios.imag.round(9), ratios.real.round(9)))]
    return _distinct(ratios, RATIO_TOL)


def enumerate_sfs(pair: Sequence[Constellation | str]) -> SfsTable:
    if len(pair) != 2:
        raise ContractViolation("singular fade states are defined for exactly two MTs")
    c1, c2 = (make_constellation(c) if isinstance(c, str) else c for c in pair)
    table = joint_combinations((c1, c2))
    ratios = [0j] + sorted(singular_ratios(c1, c2), key=_ratio_key)
    states = []
    for g in ratios:
        pts = superimpose([1.0, g], table).points
        states.append(SingularFadeState(complex(g), tuple(coincident_pairs(pts, COINCIDENCE_TOL))))
    pts = superimpose([0.0, 1.0], table).points
    axis = SingularFadeState(complex(np.inf, 0.0), tuple(coincident_pairs(pts, COINCIDENCE_TOL)))
    return SfsTable(table, tuple(states), axis)


def reduce_image_sfs(sfs: SfsTable) -> SfsTable:
    """Merge states that are resolved by exactly the same set of mapping matrices.

    The resolving set of a state is every ``G`` whose kernel contains the
    state's clash span, so two states have equal resolving sets iff their
    clash spans coincide. The representative of each class is its member with
    the smallest ``(|gamma|, arg gamma)``, i.e. the lowest index; the axis
    state comes last, so it never displaces a counted representative.
    """
    if not sfs.states:
        raise ContractViolation("no states to reduce")
    first: dict[tuple[int, ...], int] = {}
    image_map = []
    for idx, st in enumerate(sfs.extended_states):
        image_map.append(first.setdefault(st.clash_span, idx))
    return dataclasses.replace(sfs, image_map=tuple(image_map))


def build_sfs_table(mods: Sequence[str]) -> SfsTable:
    return reduce_image_sfs(enumerate_sfs(mods))


def nearest_ratio(ratios: np.ndarray, h: Sequence[complex]) -> tuple[int, float]:
    """Index of the ratio closest to ``h2 / h1`` and its distance in the ratio plane.

    An infinite entry (the ``h1 = 0`` axis) is measured in the inverted chart,
    at distance ``|h1 / h2|``. Without such an entry a channel with ``h1 = 0``
    goes to the finite entry of largest modulus at distance ``inf``.
    """
    h = np.asarray(h, dtype=complex).ravel()
    if h.size != 2:
        raise ContractViolation("fade-state lookup needs a 2-tap channel")
    if h[0] == 0 and h[1] == 0:
        raise InvalidChannelError("channel (0, 0) has no fade state")
    ratios = np.asarray(ratios, dtype=complex)
    at_inf = np.isinf(ratios)
    dist = np.full(ratios.shape, np.inf)
    with np.errstate(over="ignore"):  # extreme scale ratios overflow to inf, which is the right distance
        if h[0] != 0:
            dist[~at_inf] = np.abs(ratios[~at_inf] - h[1] / h[0])
        dist[at_inf] = abs(h[0]) / abs(h[1]) if h[1] != 0 else np.inf
    if h[0] == 0 and not at_inf.any():
        return int(np.argmax(np.abs(ratios))), float("inf")
    k = int(np.argmin(dist))  # first minimum wins ties
    return k, float(dist[k])


def nearest_sfs(h: Sequence[complex], sfs: SfsTable) -> tuple[int, float]:
    return nearest_ratio(sfs.ratios, h)
