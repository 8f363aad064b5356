"""Edge-deletion fragmentation of a weighted tree.

The forest at level s keeps the edges with weight <= s.  The process is
materialized once as a MergeLog (the coalescence direction, built by
union-find over edges in increasing weight) and replayed for queries.
The Prim exploration path gives the component sizes as sub-excursion
lengths, exactly; that identity is the main internal oracle.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import DuplicateWeights
from .plane_tree import LatticePath, PlaneTree, prim_path

__all__ = [
    "RankedMasses",
    "MergeEvent",
    "MergeLog",
    "forest_components",
    "build_merge_log",
    "frag_process_query",
    "integer_frag",
    "prim_exploration",
    "excursion_lengths",
    "l1_distance",
]


@dataclass(frozen=True)
class RankedMasses:
    """Non-increasing nonnegative masses; zero tail left implicit."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values if v > 0)
        if any(vals[i] < vals[i + 1] for i in range(len(vals) - 1)):
            vals = tuple(sorted(vals, reverse=True))
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_sizes(cls, sizes) -> "RankedMasses":
        return cls(tuple(sorted((float(s) for s in sizes), reverse=True)))

    def normalized(self, total: float) -> "RankedMasses":
        return RankedMasses(tuple(v / total for v in self.values))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i] if i < len(self.values) else 0.0


def l1_distance(a: RankedMasses, b: RankedMasses) -> float:
    """l1 norm of the difference, padding the shorter sequence with zeros."""
    n = max(len(a), len(b))
    return float(sum(abs(a[i] - b[i]) for i in range(n)))


def _keep_mask(tree: PlaneTree, predicate) -> np.ndarray:
    keep = np.zeros(tree.zeta, dtype=np.bool_)
    for v in range(tree.zeta):
        if v != tree.root:
            keep[v] = predicate(v)
    return keep


def _components_from_mask(tree: PlaneTree, keep: np.ndarray) -> RankedMasses:
    if tree._is_lex_labeled():
        sizes = _kernels.filtered_component_sizes(tree.parents, keep)
        return RankedMasses.from_sizes(sizes.tolist())
    # generic fallback: accumulate child sizes in reverse topological order
    order = tree.lex_order()
    size = np.ones(tree.zeta, dtype=np.int64)
    for v in order[::-1]:
        v = int(v)
        p = int(tree.parents[v])
        if p >= 0 and keep[v]:
            size[p] += size[v]
    sizes = [int(size[v]) for v in range(tree.zeta) if v == tree.root or not keep[v]]
    return RankedMasses.from_sizes(sizes)


def forest_components(tree: PlaneTree, weights: Mapping[int, float], s: float) -> RankedMasses:
    """Ranked component sizes keeping edges with weight <= s."""
    return _components_from_mask(tree, _keep_mask(tree, lambda v: weights[v] <= s))


@dataclass(frozen=True)
class MergeEvent:
    weight: float
    root_small: int  # surviving representative (smaller vertex index)
    root_large: int  # absorbed representative
    size_small: int
    size_large: int
    merged_size: int


@dataclass(frozen=True)
class MergeLog:
    events: tuple[MergeEvent, ...]
    zeta: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["weight", "size_a", "size_b"])
        for e in self.events:
            w.writerow([repr(e.weight), e.size_small, e.size_large])
        return buf.getvalue()


def build_merge_log(tree: PlaneTree, weights: Mapping[int, float]) -> MergeLog:
    """Union-find over edges in increasing weight; zeta-1 events."""
    edges = sorted((weights[v], v) for v in range(tree.zeta) if v != tree.root)
    if len({w for w, _ in edges}) != len(edges):
        raise DuplicateWeights("merge log requires distinct weights")
    parent = list(range(tree.zeta))
    size = [1] * tree.zeta

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    events: list[MergeEvent] = []
    for w, v in edges:
        a, b = find(v), find(int(tree.parents[v]))
        small, large = (a, b) if a < b else (b, a)
        events.append(
            MergeEvent(
                weight=w,
                root_small=small,
                root_large=large,
                size_small=size[small],
                size_large=size[large],
                merged_size=size[small] + size[large],
            )
        )
        parent[large] = small
        size[small] += size[large]
    return MergeLog(tuple(events), tree.zeta)


def frag_process_query(log: MergeLog, u: float) -> RankedMasses:
    """Ranked masses F(u): components after keeping edges of weight <= 1-u."""
    s = 1.0 - u
    sizes = {}
    for e in log.events:
        if e.weight > s:
            break
        sa = sizes.pop(e.root_small, 1)
        sb = sizes.pop(e.root_large, 1)
        sizes[e.root_small] = sa + sb
    merged_total = sum(sizes.values())
    singletons = log.zeta - merged_total
    return RankedMasses.from_sizes(list(sizes.values()) + [1] * singletons)


def integer_frag(tree: PlaneTree, edge_order: Sequence[int], t: float) -> RankedMasses:
    """Component sizes after deleting the first floor(t) (capped) edges.

    ``edge_order`` is a permutation of the edges, each given by its child
    endpoint.
    """
    if sorted(edge_order) != sorted(v for v in range(tree.zeta) if v != tree.root):
        raise ValueError("edge_order must be a permutation of the non-root vertices")
    k = min(int(np.floor(t)), tree.zeta - 1)
    removed = set(edge_order[:k])
    return _components_from_mask(tree, _keep_mask(tree, lambda v: v not in removed))


def prim_exploration(tree: PlaneTree, weights: Mapping[int, float], s: float) -> LatticePath:
    """Exploration path W^(s): Prim order of the full tree, counting only
    children attached through edges of weight <= s."""
    _, order = prim_path(tree, weights)
    incs = np.empty(tree.zeta, dtype=np.int64)
    for i, v in enumerate(order):
        k_s = sum(1 for c in tree.children[int(v)] if weights[c] <= s)
        incs[i] = k_s - 1
    return LatticePath(np.concatenate([[0], np.cumsum(incs)]))


def excursion_lengths(path: LatticePath) -> RankedMasses:
    """Ranked lengths of the index intervals between strict new minima."""
    v = path.values
    runmin = np.minimum.accumulate(v)
    drops = np.flatnonzero(v[1:] < runmin[:-1]) + 1
    if drops.shape[0] == 0:
        return RankedMasses.from_sizes([v.shape[0] - 1])
    lengths = np.diff(np.concatenate([[0], drops]))
    return RankedMasses.from_sizes(lengths.tolist())
