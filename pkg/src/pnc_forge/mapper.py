"""Off-line candidate search, candidate store files and on-line mapping selection.

Candidates are stored as canonical row-space representatives: two full-rank
mappings with the same row space send messages to NCVs that differ only by an
invertible relabelling, so they have identical clusters, identical d_min and
make the same global matrices invertible. Each stored matrix is the reduced
row-echelon basis of its row space.

The on-line search maximises ``min_j d_min_j`` over the APs, then the sum of
the per-AP d_min values. Two routes are provided:

* ``method="exhaustive"`` evaluates every candidate pairing from the store
  with the cluster/d_min routines, exactly as the candidate tables suggest;
  it is exponential in m_s and meant for small constellations and tests.
* ``method="kernel"`` (default, two APs) works on kernels instead. A mapping's
  d_min is the smallest pairwise-offset distance outside its kernel, so the
  best mappings are found by growing both kernels greedily in order of
  increasing offset distance while keeping them complementary.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from . import gf2
from .errors import (
    ContractViolation,
    IncompatibleStoreError,
    SelectionFailure,
    SingularMatrixError,
    StoreParseError,
)
from .gf2 import BinaryMatrix
from .modem import JointCombinationTable, joint_combinations, parse_mods
from .sfs import SfsTable, SingularFadeState, build_sfs_table, nearest_ratio
from .superposition import (
    COINCIDENCE_TOL,
    NO_CROSS_PAIR,
    dmin_from_profile,
    min_intercluster_distance,
    partition_clusters,
    superimpose,
    xor_distance_profile,
)

log = logging.getLogger(__name__)

STORE_FORMAT = 1
LABELING = "gray"
BIT_ORDER = "mt1-msb"
ENUMERATION = "rref-ascending-v2"
# relative tolerance under which two offset distances count as tied
TIE_RTOL = 1e-9
# squared distances below this are floating-point residue of an exact clash
TIE_ATOL = 1e-20


def find_clashes(state: SingularFadeState, table: JointCombinationTable) -> list[frozenset[int]]:
    """Connected components of the coincidence relation at ``h = [1, gamma]``.

    Each clash is a set of joint messages (packed ints); only components with
    two or more members are reported, ordered by smallest member.
    """
    parent = list(range(len(table)))

    def root(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, k in state.witnesses:
        parent[root(i)] = root(k)
    groups: dict[int, set[int]] = {}
    for idx in range(len(table)):
        groups.setdefault(root(idx), set()).add(idx)
    clashes = [frozenset(g) for g in groups.values() if len(g) > 1]
    return sorted(clashes, key=min)


def resolves(G: BinaryMatrix, clashes: Sequence[frozenset[int]]) -> bool:
    """True when every clash maps to a single NCV under ``G``."""
    for clash in clashes:
        ncvs = {gf2.mat_mul_int(G, b) for b in clash}
        if len(ncvs) > 1:
            return False
    return True


# -- candidate store ------------------------------------------------------------------


@dataclass(frozen=True)
class CandidateStore:
    mods: tuple[str, ...]
    m_s: int
    ratios: tuple[complex, ...]
    image_map: tuple[int, ...]
    candidates: dict[int, dict[int, tuple[BinaryMatrix, ...]]] = field(repr=False)
    tolerance: float = COINCIDENCE_TOL
    labeling: str = LABELING
    bit_order: str = BIT_ORDER
    enumeration: str = ENUMERATION

    @property
    def representatives(self) -> tuple[int, ...]:
        return tuple(sorted(self.candidates))

    @cached_property
    def table(self) -> JointCombinationTable:
        return joint_combinations(self.mods)

    @cached_property
    def ratio_array(self) -> np.ndarray:
        return np.array(self.ratios, dtype=complex)

    @cached_property
    def _clash_spans(self) -> dict[int, tuple[int, ...]]:
        out = {}
        for rep, by_l in self.candidates.items():
            rows = [G.data[0] for G in by_l.get(1, ())]
            annihilator = gf2.echelon_basis(rows)
            out[rep] = tuple(gf2.orthogonal_complement(annihilator, self.m_s))
        return out

    def clash_span(self, rep: int) -> tuple[int, ...]:
        """Clash-difference span of a representative, recovered from its 1-row candidates."""
        return self._clash_spans[rep]

    def pool(self, rep: int, l: int) -> tuple[BinaryMatrix, ...]:
        return self.candidates[rep].get(l, ())

    def nearest(self, h: Sequence[complex]) -> tuple[int, int, float]:
        """(state index, representative index, ratio distance) nearest to ``h``."""
        k, dist = nearest_ratio(self.ratio_array, h)
        return k, self.image_map[k], dist

    def __eq__(self, other):
        if not isinstance(other, CandidateStore):
            return NotImplemented
        return (
            self.mods == other.mods
            and self.m_s == other.m_s
            and self.ratios == other.ratios
            and self.image_map == other.image_map
            and self.candidates == other.candidates
            and self.tolerance == other.tolerance
            and (self.labeling, self.bit_order, self.enumeration)
            == (other.labeling, other.bit_order, other.enumeration)
        )

    def __hash__(self):
        return hash((self.mods, self.ratios))


def offline_search(mods: Sequence[str] | str, method: str = "subspace", sfs: SfsTable | None = None) -> CandidateStore:
    """Build the candidate store for a modulation pair.

    ``method="subspace"`` lists the row spaces inside each state's annihilator
    directly; ``method="exhaustive"`` walks every full-rank ``l x m_s`` matrix
    in encoding order and tests it against the clashes (feasible for m_s <= 4).
    Both yield the same store.
    """
    mods = parse_mods(mods)
    if sfs is None:
        sfs = build_sfs_table(mods)
    table = sfs.table
    n = table.m_s
    candidates: dict[int, dict[int, tuple[BinaryMatrix, ...]]] = {}
    for rep in sfs.extended_representatives:
        state = sfs.extended_states[rep]
        by_l: dict[int, tuple[BinaryMatrix, ...]] = {}
        if method == "subspace":
            annihilator = gf2.orthogonal_complement(state.clash_span, n)
            for l in range(1, n + 1):
                mats = [BinaryMatrix(l, n, tuple(b)) for b in gf2.subspaces(annihilator, l)]
                by_l[l] = tuple(sorted(mats, key=lambda G: G.encoding))
        elif method == "exhaustive":
            clashes = find_clashes(state, table)
            for l in range(1, n + 1):
                found = {}
                for G in gf2.enumerate_matrices(l, n, full_row_rank_only=True):
                    if resolves(G, clashes):
                        canon = gf2.rref(G)
                        found.setdefault(canon.encoding, canon)
                by_l[l] = tuple(found[k] for k in sorted(found))
        else:
            raise ContractViolation(f"unknown off-line search method {method!r}")
        candidates[rep] = {l: mats for l, mats in by_l.items() if mats}
    return CandidateStore(
        mods=tuple(mods),
        m_s=n,
        ratios=tuple(s.ratio for s in sfs.extended_states),
        image_map=tuple(sfs.image_map),
        candidates=candidates,
    )


@lru_cache(maxsize=8)
def cached_store(mods: tuple[str, ...]) -> CandidateStore:
    return offline_search(mods)


def store_text(store: CandidateStore) -> str:
    lines = [
        "# pnc-forge candidate store",
        f"format {STORE_FORMAT}",
        f"mods {','.join(store.mods)}",
        f"labeling {store.labeling}",
        f"bit_order {store.bit_order}",
        f"enumeration {store.enumeration}",
        f"tolerance {store.tolerance!r}",
        f"m_s {store.m_s}",
        f"states {len(store.ratios)}",
    ]
    for i, (g, rep) in enumerate(zip(store.ratios, store.image_map)):
        lines.append(f"state {i} {g.real!r} {g.imag!r} {rep}")
    lines.append(f"representatives {len(store.candidates)}")
    for rep in store.representatives:
        for l, mats in sorted(store.candidates[rep].items()):
            lines.append(f"cand {rep} {l} {len(mats)} " + " ".join(G.to_hex() for G in mats))
    lines.append("end")
    return "\n".join(lines) + "\n"


def save_store(store: CandidateStore, path: str | Path) -> None:
    Path(path).write_text(store_text(store), encoding="ascii")


def parse_store(text: str) -> CandidateStore:
    lines = text.splitlines()
    if not lines or lines[-1] != "end":
        raise StoreParseError("store file is truncated (missing end marker)")
    header: dict[str, str] = {}
    ratios: list[complex] = []
    image_map: list[int] = []
    candidates: dict[int, dict[int, tuple[BinaryMatrix, ...]]] = {}
    n_reps = None
    try:
        for line in lines[:-1]:
            if not line or line.startswith("#"):
                continue
            key, _, rest = line.partition(" ")
            if key == "state":
                idx, re_, im_, rep = rest.split()
                if int(idx) != len(ratios):
                    raise StoreParseError(f"state {idx} out of order")
                ratios.append(complex(float(re_), float(im_)))
                image_map.append(int(rep))
            elif key == "cand":
                rep_s, l_s, count_s, *hexes = rest.split()
                rep, l, count = int(rep_s), int(l_s), int(count_s)
                if len(hexes) != count:
                    raise StoreParseError(f"candidate line for state {rep}, l={l} lists {len(hexes)} of {count}")
                mats = tuple(BinaryMatrix.from_hex(x) for x in hexes)
                candidates.setdefault(rep, {})[l] = mats
            elif key == "representatives":
                n_reps = int(rest)
            else:
                header[key] = rest
        fmt = int(header["format"])
        mods = parse_mods(header["mods"])
        m_s = int(header["m_s"])
        n_states = int(header["states"])
        tolerance = float(header["tolerance"])
        labeling, bit_order, enumeration = header["labeling"], header["bit_order"], header["enumeration"]
    except StoreParseError:
        raise
    except (KeyError, ValueError) as exc:
        raise StoreParseError(f"malformed store: {exc}") from exc
    if fmt != STORE_FORMAT:
        raise IncompatibleStoreError(f"store format {fmt}, expected {STORE_FORMAT}")
    for name, got, want in (
        ("labeling", labeling, LABELING),
        ("bit_order", bit_order, BIT_ORDER),
        ("enumeration", enumeration, ENUMERATION),
    ):
        if got != want:
            raise IncompatibleStoreError(f"store {name} is {got!r}, this build uses {want!r}")
    if len(ratios) != n_states:
        raise StoreParseError(f"header announces {n_states} states, found {len(ratios)}")
    reps = sorted(set(image_map))
    if n_reps is None or n_reps != len(reps) or any(r not in reps for r in candidates):
        raise StoreParseError("representative records do not match the image map")
    for rep in reps:
        candidates.setdefault(rep, {})
    return CandidateStore(
        mods=tuple(mods),
        m_s=m_s,
        ratios=tuple(ratios),
        image_map=tuple(image_map),
        candidates=candidates,
        tolerance=tolerance,
        labeling=labeling,
        bit_order=bit_order,
        enumeration=enumeration,
    )


def load_store(path: str | Path, verify_sample: int = 32, seed: int = 0) -> CandidateStore:
    """Read a store file, check its conventions and re-verify a sample of candidates."""
    try:
        text = Path(path).read_text(encoding="ascii")
    except UnicodeDecodeError as exc:
        raise StoreParseError(f"store is not ASCII text: {exc}") from exc
    store = parse_store(text)
    verify_store(store, sample=verify_sample, seed=seed)
    return store


def verify_store(store: CandidateStore, sample: int | None = None, seed: int = 0) -> None:
    """Check candidates against freshly enumerated clashes; ``sample=None`` checks all."""
    sfs = build_sfs_table(store.mods)
    if len(sfs.ratios) != len(store.ratios) or tuple(sfs.image_map) != store.image_map:
        raise IncompatibleStoreError("fade-state table differs from the one this build enumerates")
    if not np.allclose(sfs.ratios, store.ratio_array, rtol=0.0, atol=1e-9):
        raise IncompatibleStoreError("fade-state ratios differ from this build's enumeration")
    pool = [(rep, G) for rep, by_l in store.candidates.items() for mats in by_l.values() for G in mats]
    if sample is not None and len(pool) > sample:
        pool = random.Random(seed).sample(pool, sample)
    for rep, G in pool:
        if G.cols != store.m_s or gf2.rank(G) != G.rows:
            raise IncompatibleStoreError(f"candidate {G.to_hex()} for state {rep} is not full row rank")
        if any(gf2.mat_mul_int(G, d) for d in sfs.extended_states[rep].clash_span):
            raise IncompatibleStoreError(f"candidate {G.to_hex()} does not resolve state {rep}")


# -- on-line selection ----------------------------------------------------------------


@dataclass(frozen=True)
class SelectionResult:
    matrices: tuple[BinaryMatrix, ...]
    dmins: tuple[float, ...]
    sfs_index: tuple[int, ...]
    fallback: bool = False

    @property
    def rows_per_ap(self) -> tuple[int, ...]:
        return tuple(G.rows for G in self.matrices)

    @cached_property
    def global_matrix(self) -> BinaryMatrix:
        return gf2.vstack(*self.matrices)

    @cached_property
    def global_inverse(self) -> BinaryMatrix:
        return gf2.invert(self.global_matrix)

    @property
    def objective(self) -> tuple[float, float]:
        return min(self.dmins), float(sum(self.dmins))

    @property
    def key(self) -> tuple[int, ...]:
        """Hashable identity of the selected global matrix."""
        return tuple(x for G in self.matrices for x in (G.rows, G.encoding))


def identity_split(m_s: int, n_aps: int = 2) -> tuple[BinaryMatrix, ...]:
    """Rows of the identity dealt out in order, the first APs taking the extra rows."""
    base, extra = divmod(m_s, n_aps)
    I = BinaryMatrix.identity(m_s).data
    out, start = [], 0
    for j in range(n_aps):
        l = base + (1 if j < extra else 0)
        out.append(BinaryMatrix(l, m_s, I[start : start + l]))
        start += l
    return tuple(out)


def fallback_selection(h_per_ap: Sequence[Sequence[complex]], store: CandidateStore) -> SelectionResult:
    mats = identity_split(store.m_s, len(h_per_ap))
    dmins = tuple(
        min_intercluster_distance(superimpose(h, store.table), partition_clusters(G, store.table))
        for h, G in zip(h_per_ap, mats)
    )
    idx = tuple(store.nearest(h)[0] for h in h_per_ap)
    return SelectionResult(mats, dmins, idx, fallback=True)


def _tie_groups(profiles: Sequence[np.ndarray]) -> tuple[list[np.ndarray], np.ndarray]:
    """Shared integer levels for the offset distances of all APs.

    Values within TIE_RTOL of a level's first value join that level, so exact
    ties broken by rounding noise compare equal. Returns per-AP level arrays
    (offset 0 gets -1) and the representative value of each level.
    """
    finite = np.sort(np.concatenate([p[1:] for p in profiles]))
    level_of = np.empty(finite.size, dtype=np.int64)
    reps: list[float] = []
    for i, v in enumerate(finite):
        if not reps or v - reps[-1] > max(TIE_RTOL * abs(reps[-1]), TIE_ATOL):
            reps.append(float(v))
        level_of[i] = len(reps) - 1
    out = []
    for p in profiles:
        lv = np.full(p.size, -1, dtype=np.int64)
        lv[1:] = level_of[np.searchsorted(finite, p[1:])]
        out.append(lv)
    return out, np.array(reps)


def _threshold_ladder(levels: np.ndarray, required: Sequence[int]) -> tuple[list[int], list[list[int]]]:
    """Kernel bases needed to guarantee d_min >= each level.

    Entry ``i`` of the result is the span of ``required`` plus every offset
    whose level lies below ``lv[i]``; the ladder stops once the span fills the
    whole space.
    """
    order = np.argsort(levels[1:], kind="stable") + 1
    basis = gf2.echelon_basis(required)
    ladder_levels, ladder = [], []
    n_bits = int(np.log2(levels.size))
    pos = 0
    for lv in np.unique(levels[1:]):
        while pos < order.size and levels[order[pos]] < lv:
            d = gf2.reduce_vector(int(order[pos]), basis)
            if d:
                basis = sorted(basis + [d], reverse=True)
            pos += 1
        if len(basis) >= n_bits:
            break
        ladder_levels.append(int(lv))
        ladder.append(basis)
    return ladder_levels, ladder


def _disjoint(a: Sequence[int], b: Sequence[int]) -> bool:
    """span(a) ∩ span(b) = {0} for two independent vector sets."""
    pivots: dict[int, int] = {}
    for v in itertools.chain(a, b):
        while v:
            top = v.bit_length() - 1
            p = pivots.get(top)
            if p is None:
                pivots[top] = v
                break
            v ^= p
        else:
            return False
    return True


def _greedy_kernels(
    profiles: Sequence[np.ndarray],
    ladders: Sequence[tuple[list[int], list[list[int]]]],
    values: np.ndarray,
    n: int,
) -> tuple[list[list[int]], tuple[float, float]] | None:
    """Best pair of complementary kernels, one drawn from each AP's threshold ladder.

    Feasibility of "d_min_0 >= a and d_min_1 >= b" is monotone in both
    thresholds, so a staircase walk over the two ladders visits every
    Pareto-optimal pair. Returns (kernel bases, d_min pair), or None when the
    required spans already overlap.
    """
    (lad0, ker0), (lad1, ker1) = ladders
    if not lad0 or not lad1 or not _disjoint(ker0[0], ker1[0]):
        return None
    best = best_pair = None
    i1 = len(lad1) - 1
    for i0 in range(len(lad0)):
        while i1 >= 0 and not _disjoint(ker0[i0], ker1[i1]):
            i1 -= 1
        if i1 < 0:
            break
        a, b = values[lad0[i0]], values[lad1[i1]]
        obj = (min(a, b), a + b)
        if _better(obj, best):
            best, best_pair = obj, (i0, i1)
    if best_pair is None:
        return None
    K = [list(ker0[best_pair[0]]), list(ker1[best_pair[1]])]
    joint = gf2.echelon_basis(K[0] + K[1])
    # fill the rest of the space, giving each new direction to the smaller kernel
    for col in range(n - 1, -1, -1):
        e = 1 << col
        r = gf2.reduce_vector(e, joint)
        if not r:
            continue
        joint = sorted(joint + [r], reverse=True)
        j = 0 if len(K[0]) <= len(K[1]) else 1
        if len(K[j]) + 1 > n - 1:
            j = 1 - j
        K[j] = gf2.echelon_basis(K[j] + [e])
    dmins = tuple(dmin_from_profile(p, gf2.span_elements(k)) for p, k in zip(profiles, K))
    return K, dmins  # type: ignore[return-value]


def _kernel_to_mapping(kernel: Sequence[int], n: int) -> BinaryMatrix:
    rows = gf2.orthogonal_complement(kernel, n)
    return BinaryMatrix(len(rows), n, tuple(rows))


def _cmp(a: float, b: float) -> int:
    """Three-way compare treating values within TIE_RTOL (or TIE_ATOL) as equal."""
    if a == b or abs(a - b) <= max(TIE_RTOL * max(abs(a), abs(b)), TIE_ATOL):
        return 0
    return 1 if a > b else -1


def _objective_cmp(a: Sequence[float], b: Sequence[float]) -> int:
    return _cmp(a[0], b[0]) or _cmp(a[1], b[1])


def _better(a: tuple[float, float], b: tuple[float, float] | None) -> bool:
    return b is None or _objective_cmp(a, b) > 0


def online_select(
    h_per_ap: Sequence[Sequence[complex]],
    store: CandidateStore,
    sigma: float | None = None,
    pool: str = "nearest",
    method: str = "kernel",
) -> SelectionResult:
    """Pick one mapping per AP so the stacked global matrix is invertible and the
    weakest AP's minimum inter-cluster distance is as large as possible.

    ``sigma`` is accepted for interface stability; the objective is purely
    geometric. ``pool="nearest"`` restricts each AP to the candidates of the
    fade state nearest its channel, ``pool="all"`` admits every stored state
    and ``pool="free"`` drops the fade-state constraint altogether (every
    full-rank split is eligible; kernel route only).
    """
    del sigma
    h_per_ap = [np.asarray(h, dtype=complex).ravel() for h in h_per_ap]
    if any(h.size != 2 for h in h_per_ap):
        raise ContractViolation("each AP needs a 2-tap channel vector")
    if pool not in ("nearest", "all", "free"):
        raise ContractViolation(f"unknown candidate pool {pool!r}")
    if method == "kernel":
        if len(h_per_ap) != 2:
            raise ContractViolation("kernel selection handles exactly two APs")
        return _select_kernel(h_per_ap, store, pool)
    if method == "exhaustive":
        if pool == "free":
            raise ContractViolation("the exhaustive route only walks stored candidates")
        return _select_exhaustive(h_per_ap, store, pool)
    raise ContractViolation(f"unknown selection method {method!r}")


def _pool_stages(near, store: CandidateStore, pool: str):
    """Representative pools per AP, tried in order until one admits a selection.

    The nearest-state pools come first; if they cannot be combined, the AP whose
    channel is farther from its fade state is widened to every stored state,
    then both are.
    """
    reps = store.representatives
    if pool == "free":
        return [((None,), (None,))]
    if pool == "all":
        return [(reps, reps)]
    nearest = tuple((x[1],) for x in near)
    wide = 0 if near[0][2] > near[1][2] else 1
    widened = tuple(reps if j == wide else nearest[j] for j in range(2))
    return [nearest, widened, (reps, reps)]


def _select_kernel(h_per_ap, store: CandidateStore, pool: str) -> SelectionResult:
    n = store.m_s
    table = store.table
    profiles = [xor_distance_profile(superimpose(h, table).points) for h in h_per_ap]
    near = [store.nearest(h) for h in h_per_ap]
    levels, values = _tie_groups(profiles)
    ladder_cache: dict[tuple[int, int], tuple[list[int], list[list[int]]]] = {}

    def ladder(j: int, rep: int):
        if (j, rep) not in ladder_cache:
            required = () if rep is None else store.clash_span(rep)
            ladder_cache[(j, rep)] = _threshold_ladder(levels[j], required)
        return ladder_cache[(j, rep)]

    best = best_obj = None
    for pools in _pool_stages(near, store, pool):
        for r0, r1 in itertools.product(*pools):
            got = _greedy_kernels(profiles, (ladder(0, r0), ladder(1, r1)), values, n)
            if got is None:
                continue
            obj = (min(got[1]), float(sum(got[1])))
            if _better(obj, best_obj):
                best, best_obj = got, obj
        if best is not None:
            break
    if best is None:
        raise SelectionFailure("no complementary pair of candidate kernels exists")
    kernels, dmins = best
    mats = tuple(_kernel_to_mapping(k, n) for k in kernels)
    return SelectionResult(mats, tuple(float(d) for d in dmins), tuple(x[0] for x in near))


def _score_pool(h, reps, store: CandidateStore) -> dict[int, list[tuple[BinaryMatrix, float]]]:
    table = store.table
    sc = superimpose(h, table)
    by_l: dict[int, dict[int, tuple[BinaryMatrix, float]]] = {}
    for r in reps:
        for l, mats in store.candidates[r].items():
            seen = by_l.setdefault(l, {})
            for G in mats:
                if G.encoding not in seen:
                    seen[G.encoding] = (G, min_intercluster_distance(sc, partition_clusters(G, table)))
    return {l: sorted(v.values(), key=lambda t: t[0].encoding) for l, v in by_l.items()}


def _best_combination(scored, n: int):
    best = best_key = chosen = None
    for split in itertools.product(range(1, n + 1), repeat=len(scored)):
        if sum(split) != n:
            continue
        lists = [scored[j].get(l, []) for j, l in enumerate(split)]
        for combo in itertools.product(*lists):
            mats = [G for G, _ in combo]
            if gf2.rank(gf2.vstack(*mats)) != n:
                continue
            ds = [d for _, d in combo]
            obj = (min(ds), sum(ds))
            tie = tuple((G.rows, G.encoding) for G in mats)
            c = 1 if best is None else _objective_cmp(obj, best)
            if c > 0 or (c == 0 and tie < best_key):
                best, best_key, chosen = obj, tie, (tuple(mats), tuple(ds))
    return chosen


def _select_exhaustive(h_per_ap, store: CandidateStore, pool: str) -> SelectionResult:
    n = store.m_s
    near = [store.nearest(h) for h in h_per_ap]
    if len(h_per_ap) == 2:
        stages = _pool_stages(near, store, pool)
    else:
        reps = store.representatives
        stages = [tuple((x[1],) for x in near)] if pool == "nearest" else []
        stages.append(tuple(reps for _ in h_per_ap))
    chosen = None
    for pools in stages:
        scored = [_score_pool(h, reps, store) for h, reps in zip(h_per_ap, pools)]
        chosen = _best_combination(scored, n)
        if chosen is not None:
            break
    if chosen is None:
        raise SelectionFailure("no non-singular combination of candidate mappings")
    mats, ds = chosen
    return SelectionResult(mats, tuple(float(d) for d in ds), tuple(x[0] for x in near))


def select_or_fallback(h_per_ap, store: CandidateStore, **kwargs) -> SelectionResult:
    try:
        return online_select(h_per_ap, store, **kwargs)
    except SelectionFailure:
        log.info("on-line selection failed, using identity split")
        return fallback_selection(h_per_ap, store)


def check_unambiguous(result: SelectionResult) -> bool:
    """Noiseless round trip: every joint message survives encode + global inverse."""
    try:
        inv = result.global_inverse
    except SingularMatrixError:
        return False
    G = result.global_matrix
    return all(gf2.mat_mul_int(inv, gf2.mat_mul_int(G, b)) == b for b in range(1 << G.cols))


def objective_of(h_per_ap, mats: Sequence[BinaryMatrix], table: JointCombinationTable) -> tuple[float, float]:
    ds = [
        min_intercluster_distance(superimpose(h, table), partition_clusters(G, table))
        for h, G in zip(h_per_ap, mats)
    ]
    return min(ds), float(sum(ds))


__all__ = [
    "CandidateStore",
    "SelectionResult",
    "find_clashes",
    "offline_search",
    "online_select",
    "save_store",
    "load_store",
    "NO_CROSS_PAIR",
]
