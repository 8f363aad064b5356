import numpy as np
import pytest

from treelam.degree_sequence import validate
from treelam.plane_tree import LatticePath, from_lukasiewicz
from treelam.sampler import Seed, sample_tree


def tree_from_values(values):
    return from_lukasiewicz(LatticePath(np.asarray(values)))


@pytest.fixture
def star4():
    """Root with three leaves."""
    return tree_from_values([0, 2, 1, 0, -1])


@pytest.fixture
def path4():
    """Path tree on 4 vertices (three unary, one leaf)."""
    return tree_from_values([0, 0, 0, 0, -1])


@pytest.fixture
def fig_tree():
    """The 7-vertex tree with contour [0,1,2,1,2,3,2,1,0,1,2,1,0]."""
    return tree_from_values([0, 1, 2, 1, 1, 0, 0, -1])


def random_degree_sequence(rng, V):
    """Uniform-ish valid degree sequence on V vertices: any multiset of V
    child counts summing to V-1 works."""
    ks = rng.multinomial(V - 1, np.full(V, 1.0 / V))
    counts = {}
    for k in ks:
        counts[int(k)] = counts.get(int(k), 0) + 1
    return validate(counts)


def random_tree(rng, V):
    ds = random_degree_sequence(rng, V)
    return sample_tree(ds, Seed(int(rng.integers(2**62)))), ds


def rt_distance(rt, la, lb):
    """Distance between labels (0 = root) in a ReducedTree."""
    node = {lab: v for v, lab in rt.leaf_labels.items()}
    node[rt.root_label] = rt.shape.root

    def path_up(v):
        out = {}
        d = 0.0
        while True:
            out[v] = d
            p = int(rt.shape.parents[v])
            if p < 0:
                return out
            d += rt.edge_lengths[v]
            v = p

    ua, ub = path_up(node[la]), path_up(node[lb])
    return min(ua[v] + ub[v] for v in ua if v in ub)


def all_trees(zeta):
    """All plane trees with exactly zeta vertices (Catalan(zeta-1) many)."""
    out = []

    def rec(prefix, s, placed):
        if placed == zeta:
            if s == -1:
                out.append(tree_from_values(np.concatenate([[0], np.cumsum(prefix)])))
            return
        lo = -1
        hi = zeta - placed - 1  # can't exceed the remaining budget
        for inc in range(lo, hi + 1):
            s2 = s + inc
            if placed < zeta - 1 and s2 < 0:
                continue
            if placed == zeta - 1 and s2 != -1:
                continue
            prefix.append(inc)
            rec(prefix, s2, placed + 1)
            prefix.pop()

    rec([], 0, 0)
    return out
