import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pnc_forge import gf2, mapper
from pnc_forge.errors import ContractViolation, IncompatibleStoreError, StoreParseError
from pnc_forge.gf2 import BinaryMatrix
from pnc_forge.mapper import (
    check_unambiguous,
    find_clashes,
    identity_split,
    load_store,
    offline_search,
    online_select,
    resolves,
    save_store,
    select_or_fallback,
    store_text,
)
from pnc_forge.sfs import build_sfs_table
from pnc_forge.superposition import mapping_dmin

from oracles import best_split_bruteforce

SMALL = [("bpsk", "bpsk"), ("qpsk", "bpsk"), ("qpsk", "qpsk")]


@pytest.fixture(scope="module", params=SMALL, ids=lambda p: "+".join(p))
def store(request):
    return offline_search(request.param)


def cn(rng, size=2):
    return rng.normal(size=size) + 1j * rng.normal(size=size)


def at_state(ratio, h1, offset=0.0):
    """Channel on (or ``offset`` away from) the state with this ratio; ``inf`` is the h1 = 0 axis."""
    if np.isinf(ratio):
        return np.array([offset, h1])
    return np.array([h1, h1 * ratio + offset])


def test_bpsk_offline_example():
    s = offline_search(("bpsk", "bpsk"))
    table = build_sfs_table(("bpsk", "bpsk"))
    plus = next(i for i, st_ in enumerate(table.states) if np.isclose(st_.ratio, 1))
    rep = table.image_map[plus]
    l1 = s.pool(rep, 1)
    assert BinaryMatrix.from_rows([[1, 1]]) in l1
    assert BinaryMatrix.from_rows([[1, 0]]) not in l1


def test_candidates_resolve_and_are_full_rank(store):
    sfs = build_sfs_table(store.mods)
    for rep, by_l in store.candidates.items():
        clashes = find_clashes(sfs.extended_states[rep], store.table)
        assert store.m_s not in by_l  # an invertible G cannot merge a clash
        for l, mats in by_l.items():
            for G in mats:
                assert gf2.rank(G) == l == G.rows
                assert resolves(G, clashes)


def test_subspace_and_exhaustive_searches_agree(store):
    assert offline_search(store.mods, method="exhaustive") == store


def test_store_covers_every_resolving_row_space(store):
    """Every full-rank resolving matrix has its row space represented in the store."""
    sfs = build_sfs_table(store.mods)
    for rep in store.representatives:
        clashes = find_clashes(sfs.extended_states[rep], store.table)
        stored = {G.encoding for mats in store.candidates[rep].values() for G in mats}
        for l in range(1, store.m_s + 1):
            for G in gf2.enumerate_matrices(l, store.m_s, True):
                if resolves(G, clashes):
                    assert gf2.rref(G).encoding in stored


def test_store_determinism_and_round_trip(tmp_path, store):
    a, b = tmp_path / "a.pncs", tmp_path / "b.pncs"
    save_store(store, a)
    save_store(offline_search(store.mods), b)
    assert a.read_bytes() == b.read_bytes()
    loaded = load_store(a)
    assert loaded == store
    save_store(loaded, b)
    assert a.read_bytes() == b.read_bytes()


def test_store_incompatible_and_truncated(tmp_path):
    s = offline_search(("qpsk", "bpsk"))
    text = store_text(s)
    p = tmp_path / "x.pncs"
    p.write_text(text.replace("bit_order mt1-msb", "bit_order mt1-lsb"))
    with pytest.raises(IncompatibleStoreError):
        load_store(p)
    p.write_text(text.replace("labeling gray", "labeling natural"))
    with pytest.raises(IncompatibleStoreError):
        load_store(p)
    p.write_text(text.replace("format 1", "format 2"))
    with pytest.raises(IncompatibleStoreError):
        load_store(p)
    p.write_text(text[: len(text) // 2])
    with pytest.raises(StoreParseError):
        load_store(p)
    lines = text.splitlines()
    bad = [ln for ln in lines if not ln.startswith("cand")]
    p.write_text("\n".join(bad[:5] + bad[6:]) + "\n")
    with pytest.raises(StoreParseError):
        load_store(p)


def test_store_rejects_tampered_candidate(tmp_path):
    s = offline_search(("bpsk", "bpsk"))
    text = store_text(s).replace("1x2:3", "1x2:2")
    p = tmp_path / "t.pncs"
    p.write_text(text)
    with pytest.raises(IncompatibleStoreError):
        load_store(p, verify_sample=None)


def test_unambiguous_random_draws(store):
    rng = np.random.default_rng(11)
    for _ in range(300):
        res = select_or_fallback([cn(rng), cn(rng)], store)
        assert sum(res.rows_per_ap) == store.m_s
        assert gf2.rank(res.global_matrix) == store.m_s
        assert check_unambiguous(res)


def test_kernel_and_exhaustive_routes_agree(store):
    """Both selection routes reach the same objective on the same candidate pools."""
    rng = np.random.default_rng(5)
    R = store.ratio_array
    for i in range(120):
        hs = [cn(rng), cn(rng)]
        if i % 2 == 0:  # at or near fade states
            eps = (i % 4 == 0) * 1e-3
            hs = [at_state(R[rng.integers(len(R))], h[0], eps * complex(*rng.normal(size=2))) for h in hs]
        for pool in ("nearest", "all"):
            a = select_or_fallback(hs, store, pool=pool, method="kernel")
            b = select_or_fallback(hs, store, pool=pool, method="exhaustive")
            assert mapper._objective_cmp(a.objective, b.objective) == 0
            assert a.fallback == b.fallback


def test_reported_dmins_are_exact(store):
    rng = np.random.default_rng(8)
    for _ in range(100):
        hs = [cn(rng), cn(rng)]
        res = online_select(hs, store)
        for h, G, d in zip(hs, res.matrices, res.dmins):
            assert d == pytest.approx(mapping_dmin(G, h, store.table), rel=1e-12)


def test_optimal_against_all_full_rank_matrices_at_fade_states(store):
    """Both APs at (or within 1e-3 of) a fade state: no full-rank split beats the selection."""
    rng = np.random.default_rng(21)
    R = store.ratio_array
    for k1 in range(len(R)):
        for k2 in range(len(R)):
            eps = 1e-3 if (k1 + k2) % 2 else 0.0
            hs = [at_state(R[k], complex(*rng.normal(size=2)), eps * complex(*rng.normal(size=2))) for k in (k1, k2)]
            oracle = best_split_bruteforce(hs, store.table, mapper._objective_cmp)
            got = select_or_fallback(hs, store, pool="all").objective
            assert mapper._objective_cmp(got, oracle) == 0, (k1, k2, got, oracle)


def test_selection_at_each_qpsk_fade_state():
    s = offline_search(("qpsk", "qpsk"))
    rng = np.random.default_rng(4)
    for rep in s.representatives:
        h_sfs = at_state(s.ratios[rep], 1.0)
        res = online_select([h_sfs, cn(rng)], s)
        assert res.dmins[0] > 0
        assert mapping_dmin(BinaryMatrix.identity(s.m_s), h_sfs, s.table) == 0


def test_bpsk_two_ap_example_matches_oracle():
    s = offline_search(("bpsk", "bpsk"))
    hs = [np.array([1, 1 + 0j]), np.array([1, -1 + 0j])]
    res = select_or_fallback(hs, s)
    oracle = best_split_bruteforce(hs, s.table, mapper._objective_cmp)
    assert mapper._objective_cmp(res.objective, oracle) == 0
    assert check_unambiguous(res)


def test_far_from_fade_states_against_oracle():
    """Far from every fade state: the identity split never beats the exhaustive optimum,
    fade-state pools stay feasible, and the unconstrained pool reaches the optimum."""
    s = offline_search(("qpsk", "bpsk"))
    rng = np.random.default_rng(9)
    checked = 0
    while checked < 15:
        hs = [cn(rng), cn(rng)]
        if min(s.nearest(h)[2] for h in hs) <= 0.5:
            continue
        checked += 1
        oracle = best_split_bruteforce(hs, s.table, mapper._objective_cmp)
        ident = mapper.objective_of(hs, identity_split(s.m_s), s.table)
        assert mapper._objective_cmp(ident, oracle) <= 0
        for pool in ("nearest", "all"):
            res = select_or_fallback(hs, s, pool=pool)
            assert check_unambiguous(res)
            assert mapper._objective_cmp(res.objective, oracle) <= 0
        got = select_or_fallback(hs, s, pool="free").objective
        assert mapper._objective_cmp(got, oracle) == 0


def test_free_pool_matches_unrestricted_oracle(store):
    rng = np.random.default_rng(31)
    for _ in range(60):
        hs = [cn(rng), cn(rng)]
        oracle = best_split_bruteforce(hs, store.table, mapper._objective_cmp)
        assert mapper._objective_cmp(online_select(hs, store, pool="free").objective, oracle) == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10), st.floats(-np.pi, np.pi))
def test_selection_scale_invariant(seed, mag, phase):
    s = mapper.cached_store(("qpsk", "bpsk"))
    rng = np.random.default_rng(seed)
    hs = [cn(rng), cn(rng)]
    alpha = mag * np.exp(1j * phase)
    a = select_or_fallback(hs, s)
    b = select_or_fallback([alpha * h for h in hs], s)
    assert a.key == b.key


def test_identity_split_shape():
    mats = identity_split(3)
    assert [G.rows for G in mats] == [2, 1]
    assert gf2.vstack(*mats) == BinaryMatrix.identity(3)


def test_online_select_contracts(store):
    with pytest.raises(ContractViolation):
        online_select([[1, 1, 1], [1, 1]], store)
    with pytest.raises(ContractViolation):
        online_select([[1, 1], [1, 2]], store, pool="some")
    with pytest.raises(ContractViolation):
        online_select([[1, 1], [1, 2]], store, method="magic")


def test_fallback_on_failure(monkeypatch):
    s = offline_search(("bpsk", "bpsk"))

    def boom(*a, **k):
        raise mapper.SelectionFailure("forced")

    monkeypatch.setattr(mapper, "online_select", boom)
    res = select_or_fallback([[1, 1], [1, -1]], s)
    assert res.fallback and check_unambiguous(res)
