import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treelam.errors import DuplicateWeights
from treelam.fragmentation import (
    RankedMasses,
    build_merge_log,
    excursion_lengths,
    forest_components,
    frag_process_query,
    integer_frag,
    l1_distance,
    prim_exploration,
)
from treelam.plane_tree import LatticePath
from treelam.sampler import Seed, attach_weights

from conftest import random_tree


def test_ranked_masses_basics():
    rm = RankedMasses((1.0, 3.0, 0.0, 2.0))
    assert rm.values == (3.0, 2.0, 1.0)
    assert rm[0] == 3.0
    assert rm[10] == 0.0  # implicit zero tail
    assert len(rm) == 3
    assert RankedMasses.from_sizes([2, 2, 1]).normalized(5.0).values == (
        0.4,
        0.4,
        0.2,
    )


def test_l1_distance():
    a = RankedMasses((0.5, 0.3))
    b = RankedMasses((0.4, 0.3, 0.1))
    assert l1_distance(a, b) == pytest.approx(0.2)
    assert l1_distance(a, a) == 0.0


def test_forest_components_star(star4):
    w = {1: 0.2, 2: 0.5, 3: 0.8}
    assert forest_components(star4, w, 0.6).values == (3.0, 1.0)
    assert forest_components(star4, w, 1.0).values == (4.0,)
    assert forest_components(star4, w, 0.1).values == (1.0, 1.0, 1.0, 1.0)


def test_forest_components_fig(fig_tree):
    w = {1: 0.15, 2: 0.95, 3: 0.35, 4: 0.55, 5: 0.75, 6: 0.25}
    # s = 0.5 keeps edges 1, 3, 6: components {0,1,3}, {5,6}, {2}, {4}
    assert forest_components(fig_tree, w, 0.5).values == (3.0, 2.0, 1.0, 1.0)


def test_merge_log_replay(fig_tree):
    w = {1: 0.15, 2: 0.95, 3: 0.35, 4: 0.55, 5: 0.75, 6: 0.25}
    log = build_merge_log(fig_tree, w)
    assert len(log.events) == 6
    assert [e.weight for e in log.events] == sorted(w.values())
    # F(u) keeps weights <= 1-u
    assert frag_process_query(log, 0.5).values == (3.0, 2.0, 1.0, 1.0)
    assert frag_process_query(log, 0.0).values == (7.0,)
    assert frag_process_query(log, 1.0).values == tuple([1.0] * 7)
    assert "weight" in log.to_csv().splitlines()[0]


def test_merge_log_rejects_ties(star4):
    with pytest.raises(DuplicateWeights):
        build_merge_log(star4, {1: 0.5, 2: 0.5, 3: 0.1})


def test_integer_frag(fig_tree):
    order = [5, 1, 2, 3, 4, 6]
    assert integer_frag(fig_tree, order, 0.0).values == (7.0,)
    # t = 1 removes edge above 5: {5,6} splits off
    assert integer_frag(fig_tree, order, 1.0).values == (5.0, 2.0)
    assert integer_frag(fig_tree, order, 1.9).values == (5.0, 2.0)  # floor
    # t beyond zeta-1 is capped: all singletons
    assert integer_frag(fig_tree, order, 99.0).values == tuple([1.0] * 7)
    with pytest.raises(ValueError):
        integer_frag(fig_tree, [1, 2, 3], 1.0)


def test_excursion_lengths_oracles():
    assert excursion_lengths(LatticePath(np.array([0, 2, 1, 0, -1]))).values == (
        4.0,
    )
    # two strict-new-minimum drops: lengths 3 and 1
    assert excursion_lengths(
        LatticePath(np.array([0, 1, 0, -1, -2]))
    ).values == (3.0, 1.0)
    assert excursion_lengths(
        LatticePath(np.array([0, -1, -2, -3]))
    ).values == (1.0, 1.0, 1.0)


def test_prim_exploration_matches_components(star4):
    w = {1: 0.2, 2: 0.5, 3: 0.8}
    path = prim_exploration(star4, w, 0.6)
    assert excursion_lengths(path).values == (3.0, 1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 80), st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_three_routes_agree(V, seed, s):
    """forest_components == excursion lengths of the Prim exploration ==
    merge-log replay, exactly."""
    rng = np.random.default_rng(seed)
    tree, _ = random_tree(rng, V)
    w = attach_weights(tree, Seed(int(rng.integers(2**62))))
    direct = forest_components(tree, w, s)
    via_prim = excursion_lengths(prim_exploration(tree, w, s))
    via_log = frag_process_query(build_merge_log(tree, w), 1.0 - s)
    assert direct.values == via_prim.values
    assert direct.values == via_log.values
    assert sum(direct.values) == V


@settings(max_examples=15, deadline=None)
@given(st.integers(3, 60), st.integers(0, 2**32 - 1))
def test_fragmentation_refines(V, seed):
    """Components only split as u grows (s shrinks)."""
    rng = np.random.default_rng(seed)
    tree, _ = random_tree(rng, V)
    w = attach_weights(tree, Seed(int(rng.integers(2**62))))

    def labels(s):
        lab = np.arange(V)
        for v in tree.lex_order():
            v = int(v)
            p = int(tree.parents[v])
            if p >= 0 and w[v] <= s:
                lab[v] = lab[p]
        return lab

    for s_lo, s_hi in [(0.2, 0.6), (0.5, 0.9), (0.0, 1.0)]:
        lo, hi = labels(s_lo), labels(s_hi)
        # same label at the finer level implies same label at the coarser one
        for a in range(V):
            for b in range(V):
                if lo[a] == lo[b]:
                    assert hi[a] == hi[b]


@settings(max_examples=10, deadline=None)
@given(st.integers(3, 50), st.integers(0, 2**32 - 1))
def test_integer_frag_monotone(V, seed):
    rng = np.random.default_rng(seed)
    tree, _ = random_tree(rng, V)
    order = [int(v) for v in rng.permutation(range(1, V))]
    prev = None
    for t in range(V):
        masses = integer_frag(tree, order, float(t))
        assert len(masses) == t + 1  # each removal adds one component
        assert sum(masses.values) == V
        if prev is not None:
            assert masses[0] <= prev[0]  # top mass shrinks
        prev = masses
