import math

import numpy as np
import pytest

from treelam.degree_sequence import theta_check
from treelam.errors import NotABridge, NotLaminar
from treelam.excursion import (
    GridPath,
    brownian_bridge,
    continuum_reduced_tree,
    ei_bridge,
    frag_from_excursion,
    h_exc,
    reduced_tree_from_distances,
    tree_distance,
    vervaat,
)
from treelam.sampler import Seed

FIG1_SIGMA = 1.0 / math.sqrt(7.0)
FIG1_BETAS = (2.0 / math.sqrt(7.0), 1.0 / math.sqrt(7.0), 1.0 / math.sqrt(7.0))


def tent(m: int, h: float = 1.0) -> GridPath:
    """Triangular excursion of height h peaking at 1/2."""
    t = np.arange(m + 1) / m
    return GridPath(m=m, values=h * (1.0 - np.abs(2.0 * t - 1.0)))


# --- bridges -----------------------------------------------------------------


def test_brownian_bridge_endpoints():
    b = brownian_bridge(256, Seed(1))
    assert b.is_bridge()
    assert b.jumps == ()
    assert len(b.values) == 257
    with pytest.raises(ValueError):
        brownian_bridge(0, Seed(1))


def test_brownian_bridge_variance():
    # Var B(1/2) = 1/4 for a standard bridge
    mids = [brownian_bridge(64, Seed(0, k)).values[32] for k in range(4000)]
    assert np.var(mids) == pytest.approx(0.25, abs=0.02)


def test_ei_bridge_pure_jump():
    # sigma = 0, one beta: X(t) = 1{U <= t} - t exactly on the grid
    theta = theta_check(0.0, [1.0])
    m = 128
    x = ei_bridge(theta, 1, m, Seed(4))
    assert len(x.jumps) == 1
    idx = x.jumps[0].grid_index
    grid = np.arange(m + 1) / m
    expect = (np.arange(m + 1) >= idx).astype(float) - grid
    expect[0] = expect[-1] = 0.0
    assert np.allclose(x.values, expect)


def test_ei_bridge_is_bridge_and_jump_count():
    theta = theta_check(FIG1_SIGMA, FIG1_BETAS)
    x = ei_bridge(theta, 3, 1024, Seed(2))
    assert x.is_bridge()
    assert [j.rank for j in sorted(x.jumps, key=lambda j: j.rank)] == [1, 2, 3]
    assert sorted(j.size for j in x.jumps) == sorted(FIG1_BETAS)
    with pytest.raises(ValueError):
        ei_bridge(theta, 4, 1024, Seed(2))


# --- vervaat -----------------------------------------------------------------


def test_vervaat_gives_excursion():
    for k in range(10):
        x = ei_bridge(theta_check(FIG1_SIGMA, FIG1_BETAS), 3, 512, Seed(3, k))
        exc, rho = vervaat(x)
        assert exc.is_excursion()
        assert exc.values.min() == 0.0
        # jump sizes survive the relocation
        assert sorted(j.size for j in exc.jumps) == sorted(j.size for j in x.jumps)


def test_vervaat_idempotent_on_excursion():
    e = tent(64)
    out, rho = vervaat(e)
    assert rho == 0
    assert np.array_equal(out.values, e.values)


def test_vervaat_sawtooth():
    # bridge -t then +(1-t): argmin just before the jump; rotation gives 1-t
    theta = theta_check(0.0, [1.0])
    m = 64
    x = ei_bridge(theta, 1, m, Seed(4))
    exc, rho = vervaat(x)
    assert rho == x.jumps[0].grid_index - 1
    grid = np.arange(m + 1) / m
    expect = 1.0 - grid
    expect[0] = 0.0
    assert np.allclose(exc.values[1:], expect[1:])
    assert exc.jumps[0].grid_index == 1


def test_vervaat_requires_bridge():
    v = np.linspace(0.0, 0.5, 11)
    with pytest.raises(NotABridge):
        vervaat(GridPath(m=10, values=v))


# --- the continuous height excursion ------------------------------------------


def test_h_exc_identity_without_jumps():
    exc, _ = vervaat(brownian_bridge(512, Seed(5)))
    H, recs = h_exc(exc)
    assert recs == []
    assert np.array_equal(H.values, exc.values)


def test_h_exc_single_jump_star():
    # theta = (0, (1)): the height collapses to ~0 (a star-like limit)
    theta = theta_check(0.0, [1.0])
    m = 256
    exc, _ = vervaat(ei_bridge(theta, 1, m, Seed(6)))
    H, recs = h_exc(exc)
    assert len(recs) == 1
    assert H.values.max() <= 2.0 / m
    assert H.values.min() >= 0.0


def test_h_exc_invariants_mixed_theta():
    theta = theta_check(FIG1_SIGMA, FIG1_BETAS)
    for k in range(10):
        exc, _ = vervaat(ei_bridge(theta, 3, 2048, Seed(7, k)))
        H, recs = h_exc(exc)
        assert H.values.min() >= -1e-9
        assert abs(H.values[0]) <= 1e-12 and abs(H.values[-1]) <= 1e-12
        sizes = {j.rank: j.size for j in exc.jumps}
        for r in recs:
            assert np.all(r.values >= 0.0)
            assert np.all(r.values <= sizes[r.rank] + 1e-12)
            assert np.all(np.diff(r.values) <= 1e-12)  # monotone down
            # starts at the full jump size unless the excursion is shallower
            want = min(sizes[r.rank], float(exc.values[r.start]))
            assert r.values[0] == pytest.approx(want)


# --- fragmentation of a drifted excursion -------------------------------------


def test_frag_from_excursion_zero_drift():
    assert frag_from_excursion(tent(128), 0.0).values == (1.0,)


def test_frag_tent_oracle():
    # running inf of tent - t*s stays 0 until the falling side crosses the
    # chord: top mass 2h/(2h+t), remainder dust of size 1/m
    m = 2**12
    # valid while t < 2h (the rising side must outpace the drift)
    for h, t in [(1.0, 1.0), (1.0, 0.5), (0.5, 0.9)]:
        masses = frag_from_excursion(tent(m, h), t)
        assert abs(masses[0] - 2 * h / (2 * h + t)) <= 2.0 / m
        assert masses[1] <= 2.0 / m
        assert sum(masses.values) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        frag_from_excursion(tent(m), -1.0)


def test_frag_masses_decrease_in_t():
    exc, _ = vervaat(brownian_bridge(2048, Seed(8)))
    tops = [frag_from_excursion(exc, t)[0] for t in [0.0, 0.5, 1.0, 2.0, 4.0]]
    assert all(a >= b - 1e-12 for a, b in zip(tops, tops[1:]))


# --- tree distance and reduced trees ------------------------------------------


def test_tree_distance_tent():
    f = tent(1024)
    assert tree_distance(f, 0.25, 0.5) == pytest.approx(0.5)
    assert tree_distance(f, 0.25, 0.75) == pytest.approx(0.0, abs=1e-12)
    assert tree_distance(f, 0.0, 0.5) == pytest.approx(1.0)
    assert tree_distance(f, 0.3, 0.3) == 0.0


def test_reduced_tree_from_distances_cherry():
    # root--(2)--branch, leaf edges 1 and 3
    D = np.array([[0.0, 3.0, 5.0], [3.0, 0.0, 4.0], [5.0, 4.0, 0.0]])
    rt = reduced_tree_from_distances(D, 1e-9)
    assert rt.exactly_q_leaves
    assert sorted(rt.edge_lengths.values()) == [1.0, 2.0, 3.0]
    assert sorted(rt.leaf_labels.values()) == [1, 2]
    # distances reproduce exactly
    assert _rt_dist(rt, 0, 1) == pytest.approx(3.0)
    assert _rt_dist(rt, 0, 2) == pytest.approx(5.0)
    assert _rt_dist(rt, 1, 2) == pytest.approx(4.0)


from conftest import rt_distance as _rt_dist  # noqa: E402


def test_reduced_tree_not_laminar():
    r2 = math.sqrt(2.0)
    D = np.array(
        [[0, 1, r2, 1], [1, 0, 1, r2], [r2, 1, 0, 1], [1, r2, 1, 0]],
        dtype=float,
    )
    with pytest.raises(NotLaminar):
        reduced_tree_from_distances(D, 1e-9)


def test_continuum_reduced_tree_tent():
    f = tent(2**12)
    rt = continuum_reduced_tree(f, [0.2, 0.5], tol=1e-3)
    # chain: root --0.4-- (point at 0.2) --0.6-- (point at 0.5)
    assert sorted(rt.edge_lengths.values()) == pytest.approx([0.4, 0.6], abs=4e-3)
    assert not rt.exactly_q_leaves  # the label-1 point is internal
    with pytest.raises(ValueError):
        continuum_reduced_tree(f, [0.1] * 13, tol=1e-3)


def test_continuum_reduced_tree_symmetric_pair():
    f = tent(2**12)
    rt = continuum_reduced_tree(f, [0.25, 0.6], tol=1e-3)
    # leaves at heights 0.5 and 0.8 branching at height min = 0.5... the
    # branch point is the 0.25-side point itself; distances still match
    D = np.array(
        [
            [0.0, 0.5, 0.8],
            [0.5, 0.0, tree_distance(f, 0.25, 0.6)],
            [0.8, tree_distance(f, 0.25, 0.6), 0.0],
        ]
    )
    for (a, b), want in [((0, 1), 0.5), ((0, 2), 0.8)]:
        assert _rt_dist(rt, a, b) == pytest.approx(want, abs=4e-3)
