import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pnc_forge import gf2
from pnc_forge.errors import ContractViolation, InvalidChannelError
from pnc_forge.mapper import find_clashes, resolves
from pnc_forge.modem import make_constellation
from pnc_forge.sfs import build_sfs_table, enumerate_sfs, nearest_ratio, nearest_sfs, reduce_image_sfs
from pnc_forge.superposition import superimpose

from oracles import coincidences, superimposed

PAIRS = [("bpsk", "bpsk"), ("qpsk", "bpsk"), ("qpsk", "qpsk"), ("qam16", "qpsk")]


def ratio_oracle(m1, m2):
    """All distinct -(s1 - s1') / (s2 - s2') by a plain double loop."""
    p1, p2 = make_constellation(m1).points, make_constellation(m2).points
    out = []
    for a, b in itertools.permutations(p1, 2):
        for c, d in itertools.permutations(p2, 2):
            g = -(a - b) / (c - d)
            if all(abs(g - x) >= 1e-9 for x in out):
                out.append(g)
    return out


def test_bpsk_pair_states():
    table = enumerate_sfs(["bpsk", "bpsk"])
    finite = sorted(complex(s.ratio).real for s in table.states if not s.is_erasure)
    assert finite == [-1.0, 1.0]
    assert table.states[0].is_erasure


@pytest.mark.parametrize("mods", PAIRS)
def test_ratios_match_oracle(mods):
    table = enumerate_sfs(mods)
    finite = [s.ratio for s in table.states[1:]]
    expect = ratio_oracle(*mods)
    assert len(finite) == len(expect)
    for g in expect:
        assert min(abs(g - x) for x in finite) < 1e-9


def test_state_counts():
    assert len(enumerate_sfs(["qpsk", "qpsk"])) == 13
    assert len(enumerate_sfs(["qpsk", "bpsk"])) == 9
    assert len(enumerate_sfs(["qam16", "qpsk"])) == 73
    assert len(build_sfs_table(["qpsk", "qpsk"]).representatives) == 5


@pytest.mark.parametrize("mods", PAIRS)
def test_witness_validity_and_completeness(mods):
    table = enumerate_sfs(mods)
    for st_ in table.states:
        pts = superimposed([1, st_.ratio], table.table.symbols)
        scan = coincidences(pts)
        assert set(st_.witnesses) == scan
        assert scan, "every fade state must produce at least one clash"


def test_ordering_and_erasure_first():
    table = enumerate_sfs(["qpsk", "qpsk"])
    keys = [s.sort_key for s in table.states[1:]]
    assert keys == sorted(keys)
    assert table.states[0].ratio == 0


def _resolving_set(state, t):
    clashes = find_clashes(state, t)
    return frozenset(
        G.encoding
        for l in range(1, t.m_s + 1)
        for G in gf2.enumerate_matrices(l, t.m_s, True)
        if resolves(G, clashes)
    )


@pytest.mark.parametrize("mods", [("bpsk", "bpsk"), ("qpsk", "bpsk"), ("qpsk", "qpsk")])
def test_image_reduction_matches_resolving_set_oracle(mods):
    table = reduce_image_sfs(enumerate_sfs(mods))
    sets = [_resolving_set(s, table.table) for s in table.extended_states]
    for i, rep in enumerate(table.image_map):
        first = min(k for k in range(len(sets)) if sets[k] == sets[i])
        assert rep == first
    assert len(table.extended_representatives) == len(set(sets))
    assert len(table.representatives) == len(set(sets[: len(table.states)]))


def test_bpsk_reduction_merges_plus_and_minus_one():
    table = build_sfs_table(["bpsk", "bpsk"])
    assert len(table.representatives) == 2


def test_nearest_examples():
    table = enumerate_sfs(["qpsk", "qpsk"])
    for k, s in enumerate(table.states):
        idx, dist = nearest_sfs([1, s.ratio], table)
        assert (idx, dist) == (k, 0.0)
    assert nearest_sfs([1, 0], table)[0] == 0
    h = [1, 0.9 + 0.05j]
    brute = int(np.argmin([abs(h[1] - s.ratio) for s in table.states]))
    assert nearest_sfs(h, table)[0] == brute
    with pytest.raises(InvalidChannelError):
        nearest_sfs([0, 0], table)
    with pytest.raises(ContractViolation):
        nearest_sfs([1, 0, 0], table)


def test_nearest_h1_zero_goes_to_axis():
    table = enumerate_sfs(["qpsk", "qpsk"])
    assert nearest_sfs([0, 1j], table) == (table.axis_index, 0.0)
    idx, dist = nearest_sfs([1e-3, 1], table)
    assert idx == table.axis_index and dist == pytest.approx(1e-3)
    # without the axis entry the largest finite ratio is used
    idx, dist = nearest_ratio(table.ratios[:-1], [0, 1j])
    assert dist == float("inf")
    assert abs(table.ratios[idx]) == max(abs(s.ratio) for s in table.states)


@pytest.mark.parametrize("mods", PAIRS)
def test_axis_state(mods):
    """MT 1 faded out: every pair differing only in MT 1's bits clashes."""
    table = build_sfs_table(mods)
    t = table.table
    m2 = t.orders[1]
    assert table.axis.at_infinity and table.axis.is_erasure
    assert set(table.axis.witnesses) == coincidences(superimposed([0, 1], t.symbols))
    mt1_bits = sorted((1 << (m2 + i) for i in range(t.orders[0])), reverse=True)
    assert list(table.axis.clash_span) == mt1_bits
    assert len(table) == len(table.states)
    assert table.image_map[table.axis_index] == table.axis_index


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 5), st.floats(-np.pi, np.pi))
def test_nearest_is_scale_invariant(re, im, mag, phase):
    table = enumerate_sfs(["qpsk", "bpsk"])
    h = np.array([1.0, complex(re, im)])
    alpha = mag * np.exp(1j * phase)
    assert nearest_sfs(h, table)[0] == nearest_sfs(alpha * h, table)[0]


def test_clashes_are_disjoint_components():
    table = enumerate_sfs(["qpsk", "qpsk"])
    for s in table.states:
        clashes = find_clashes(s, table.table)
        members = [b for c in clashes for b in c]
        assert len(members) == len(set(members))
        pts = superimpose([1, s.ratio], table.table).points
        for c in clashes:
            vals = pts[list(c)]
            assert np.max(np.abs(vals - vals[0])) < 1e-4


def test_bpsk_clash_example():
    table = enumerate_sfs(["bpsk", "bpsk"])
    by_ratio = {round(s.ratio.real): s for s in table.states[1:]}
    assert find_clashes(by_ratio[1], table.table) == [frozenset({0b01, 0b10})]
    assert find_clashes(by_ratio[-1], table.table) == [frozenset({0b00, 0b11})]


def test_reduce_rejects_empty():
    table = enumerate_sfs(["bpsk", "bpsk"])
    import dataclasses

    with pytest.raises(ContractViolation):
        reduce_image_sfs(dataclasses.replace(table, states=(), axis=None))
