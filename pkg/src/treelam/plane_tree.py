"""Rooted plane trees, their vertex orderings and integer encoding paths.

Vertices are indexed 0..zeta-1.  Trees built by ``from_lukasiewicz`` are
labeled in lexicographic (depth-first, left-to-right) order, which is the
canonical internal convention; all operations only rely on the
parent/children structure so relabeled trees work too.
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from ._four_point import four_point_gains
from .degree_sequence import DegreeSequence, child_sequence
from .errors import DegreeMismatch, DuplicateWeights, NotExcursion

__all__ = [
    "PlaneTree",
    "LatticePath",
    "ReducedTree",
    "JumpRecord",
    "from_lukasiewicz",
    "to_lukasiewicz",
    "reverse_lukasiewicz",
    "prim_path",
    "height_process",
    "contour",
    "branch_counts",
    "modified_lukasiewicz",
    "reduce",
    "discrete_splits",
    "default_truncation",
]


@dataclass(frozen=True)
class LatticePath:
    """Integer path values[0..L], values[0] = 0."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64)
        object.__setattr__(self, "values", v)
        if v.shape[0] < 1 or v[0] != 0:
            raise NotExcursion("path must start at 0")

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def is_lukasiewicz(self) -> bool:
        v = self.values
        return (
            v.shape[0] >= 2
            and v[-1] == -1
            and np.all(v[:-1] >= 0)
            and np.all(np.diff(v) >= -1)
        )


class PlaneTree:
    """Rooted plane tree given by parent array and ordered children lists."""

    __slots__ = ("parents", "children", "root")

    def __init__(self, parents: Sequence[int], children: list[list[int]] | None = None):
        self.parents = np.asarray(parents, dtype=np.int64)
        n = self.parents.shape[0]
        roots = np.flatnonzero(self.parents < 0)
        if roots.shape[0] != 1:
            raise ValueError("tree must have exactly one root")
        self.root = int(roots[0])
        if children is None:
            children = [[] for _ in range(n)]
            for v in range(n):
                p = int(self.parents[v])
                if p >= 0:
                    children[p].append(v)
        self.children = children

    @property
    def zeta(self) -> int:
        """Number of vertices."""
        return self.parents.shape[0]

    def num_children(self, v: int) -> int:
        return len(self.children[v])

    def lex_order(self) -> np.ndarray:
        """Depth-first left-to-right vertex order starting at the root."""
        order = np.empty(self.zeta, dtype=np.int64)
        stack = [self.root]
        i = 0
        while stack:
            v = stack.pop()
            order[i] = v
            i += 1
            stack.extend(reversed(self.children[v]))
        return order

    def depths(self) -> np.ndarray:
        if self._is_lex_labeled():
            return _kernels.depths(self.parents)
        d = np.zeros(self.zeta, dtype=np.int64)
        for v in self.lex_order():
            p = int(self.parents[v])
            if p >= 0:
                d[v] = d[p] + 1
        return d

    def _is_lex_labeled(self) -> bool:
        # parents always below children works for the depth/size kernels
        return bool(np.all(self.parents[1:] < np.arange(1, self.zeta)))

    def degree_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for ch in self.children:
            counts[len(ch)] = counts.get(len(ch), 0) + 1
        return counts

    def to_json(self) -> str:
        return json.dumps({"parents": [int(p) for p in self.parents],
                           "children": self.children})

    @classmethod
    def from_json(cls, text: str) -> "PlaneTree":
        data = json.loads(text)
        return cls(data["parents"], [list(c) for c in data["children"]])

    def to_csv(self) -> str:
        """Canonical one-line CSV of Lukasiewicz increments."""
        incs = to_lukasiewicz(self).increments
        return ",".join(str(int(x)) for x in incs)

    @classmethod
    def from_csv(cls, text: str) -> "PlaneTree":
        incs = [int(x) for x in text.strip().split(",")]
        values = np.concatenate([[0], np.cumsum(incs)])
        return from_lukasiewicz(LatticePath(values))


@dataclass(frozen=True)
class ReducedTree:
    """Tree spanned by the root and marked vertices, with edge lengths.

    ``shape`` keeps only root, marked vertices and branching points;
    ``edge_lengths[v]`` is the length of the edge above shape-vertex v.
    """

    shape: PlaneTree
    edge_lengths: dict[int, float]
    leaf_labels: dict[int, int]  # shape vertex -> label in 1..q
    root_label: int = 0
    duplicates_collapsed: bool = False
    exactly_q_leaves: bool = True

    def to_json(self) -> str:
        return json.dumps(
            {
                "parents": [int(p) for p in self.shape.parents],
                "children": self.shape.children,
                "edge_lengths": {str(k): v for k, v in self.edge_lengths.items()},
                "leaf_labels": {str(k): v for k, v in self.leaf_labels.items()},
                "root_label": self.root_label,
                "duplicates_collapsed": self.duplicates_collapsed,
                "exactly_q_leaves": self.exactly_q_leaves,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "ReducedTree":
        d = json.loads(text)
        return cls(
            shape=PlaneTree(d["parents"], [list(c) for c in d["children"]]),
            edge_lengths={int(k): float(v) for k, v in d["edge_lengths"].items()},
            leaf_labels={int(k): int(v) for k, v in d["leaf_labels"].items()},
            root_label=d["root_label"],
            duplicates_collapsed=d["duplicates_collapsed"],
            exactly_q_leaves=d["exactly_q_leaves"],
        )


@dataclass(frozen=True)
class JumpRecord:
    """Reflection record of one large jump of the Lukasiewicz path."""

    index: int  # hub rank i (1-based into the sorted child sequence)
    t_loc: int  # path index at which the jumped value appears
    return_loc: int  # first path index where the path has dropped 1 below the pre-jump level
    reflected: np.ndarray  # R_i on [t_loc, return_loc] inclusive


def from_lukasiewicz(path: LatticePath) -> PlaneTree:
    """Decode a Lukasiewicz excursion into its plane tree (lex labeling)."""
    if not path.is_lukasiewicz():
        raise NotExcursion("path dips below 0 early or does not end at -1")
    incs = path.increments.astype(np.int64)
    parents = _kernels.decode_parents(incs)
    children: list[list[int]] = [[] for _ in range(incs.shape[0])]
    for v in range(1, incs.shape[0]):
        children[int(parents[v])].append(v)
    return PlaneTree(parents, children)


def to_lukasiewicz(tree: PlaneTree) -> LatticePath:
    order = tree.lex_order()
    incs = np.array([tree.num_children(int(v)) - 1 for v in order], dtype=np.int64)
    return LatticePath(np.concatenate([[0], np.cumsum(incs)]))


def reverse_lukasiewicz(tree: PlaneTree) -> LatticePath:
    """Path of the reverse-lexicographic (children right-to-left) order."""
    incs = np.empty(tree.zeta, dtype=np.int64)
    stack = [tree.root]
    i = 0
    while stack:
        v = stack.pop()
        incs[i] = tree.num_children(v) - 1
        i += 1
        stack.extend(tree.children[v])  # reversed vs lex: rightmost popped first
    return LatticePath(np.concatenate([[0], np.cumsum(incs)]))


def prim_path(tree: PlaneTree, weights: Mapping[int, float]) -> tuple[LatticePath, np.ndarray]:
    """Prim order: repeatedly cross the cheapest frontier edge.

    ``weights`` maps each non-root vertex (child endpoint of its parent
    edge) to a weight; all weights must be distinct.
    """
    vals = [weights[v] for v in range(tree.zeta) if v != tree.root]
    if len(set(vals)) != len(vals):
        raise DuplicateWeights("Prim order requires pairwise distinct weights")
    order = np.empty(tree.zeta, dtype=np.int64)
    incs = np.empty(tree.zeta, dtype=np.int64)
    frontier: list[tuple[float, int]] = []
    v = tree.root
    i = 0
    while True:
        order[i] = v
        incs[i] = tree.num_children(v) - 1
        i += 1
        for c in tree.children[v]:
            heapq.heappush(frontier, (weights[c], c))
        if not frontier:
            break
        _, v = heapq.heappop(frontier)
    return LatticePath(np.concatenate([[0], np.cumsum(incs)])), order


def height_process(tree: PlaneTree) -> np.ndarray:
    """H(i) = depth of the i-th vertex in lex order, with H(zeta) = 0."""
    d = tree.depths()
    out = np.zeros(tree.zeta + 1, dtype=np.int64)
    out[: tree.zeta] = d[tree.lex_order()]
    return out


def contour(tree: PlaneTree) -> np.ndarray:
    """Contour function on times 0..2*zeta; flat at 0 on [2*zeta-2, 2*zeta]."""
    n = tree.zeta
    out = np.zeros(2 * n + 1, dtype=np.int64)
    t = 0
    depth = 0
    # iterative DFS emitting depth at each visit (first and after each child)
    stack: list[tuple[int, int]] = [(tree.root, 0)]  # (vertex, next child slot)
    out[0] = 0
    while stack:
        v, slot = stack.pop()
        if slot < tree.num_children(v):
            stack.append((v, slot + 1))
            stack.append((tree.children[v][slot], 0))
            t += 1
            depth += 1
            out[t] = depth
        else:
            if depth == 0:
                break  # back at the root: done, tail stays 0
            t += 1
            depth -= 1
            out[t] = depth
    return out


def branch_counts(tree: PlaneTree) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-vertex counts of vertices branching off the ancestral line.

    L(v) / R(v) count children of strict ancestors of v lying strictly to
    the left / right of the root-to-v path; LR = L + R.  Computed by a
    direct ancestor walk (independent of any path encoding).
    """
    n = tree.zeta
    pos = np.zeros(n, dtype=np.int64)  # index of v among its parent's children
    nchild = np.zeros(n, dtype=np.int64)
    for v in range(n):
        nchild[v] = len(tree.children[v])
        for j, c in enumerate(tree.children[v]):
            pos[c] = j
    return _branch_walk_out(tree, pos, nchild)


def _branch_walk_out(tree, pos, nchild):
    n = tree.zeta
    try:
        L, R = _kernels.branch_walk(tree.parents, pos, nchild, tree.root)
        return L, R, L + R
    except Exception:  # pragma: no cover - numba unavailable/typing issue
        pass
    L = np.zeros(n, dtype=np.int64)
    R = np.zeros(n, dtype=np.int64)
    for v in range(n):
        u = v
        lv = rv = 0
        while u != tree.root:
            p = int(tree.parents[u])
            lv += pos[u]
            rv += tree.num_children(p) - 1 - pos[u]
            u = p
        L[v] = lv
        R[v] = rv
    return L, R, L + R


def default_truncation(b_n: float, child_seq: Sequence[int]) -> int:
    """Default hub-truncation policy: I_n = #{i: d(i) >= sqrt(b_n)}, capped."""
    thresh = np.sqrt(b_n)
    count = sum(1 for d in child_seq if d >= thresh)
    return min(count, int(np.floor(thresh)))


def modified_lukasiewicz(
    tree: PlaneTree, ds: DegreeSequence, I_n: int
) -> tuple[LatticePath, list[JumpRecord]]:
    """Subtract the reflected contributions of the I_n largest jumps.

    Jump locations of equal-degree hubs are assigned left to right along
    the path.  With I_n = 0 the path is returned unchanged.
    """
    if ds.counts != tree.degree_counts():
        raise DegreeMismatch("degree sequence does not match the tree")
    W = to_lukasiewicz(tree).values
    seq = child_sequence(ds)
    I_n = int(I_n)
    if I_n < 0 or I_n > len(seq):
        raise ValueError("I_n out of range")
    G = W.astype(np.int64).copy()
    records: list[JumpRecord] = []
    if I_n == 0:
        return LatticePath(G), records

    incs = np.diff(W)
    # vertices with a given child count, left to right along the path
    locs_by_degree: dict[int, list[int]] = {}
    for rank in range(1, I_n + 1):
        d = seq[rank - 1]
        if d not in locs_by_degree:
            locs_by_degree[d] = list(np.flatnonzero(incs == d - 1))
        t_vertex = locs_by_degree[d].pop(0)
        t_loc = int(t_vertex) + 1  # path index where the jumped value appears
        base = int(W[t_loc - 1])
        # first index at or after t_loc where the path is one below the base;
        # downward steps are -1 so the level base-1 is hit exactly
        below = np.flatnonzero(W[t_loc:] == base - 1)
        return_loc = t_loc + int(below[0])
        reflected = np.minimum.accumulate(W[t_loc : return_loc + 1]) - base
        G[t_loc : return_loc + 1] -= reflected
        records.append(
            JumpRecord(index=rank, t_loc=t_loc, return_loc=return_loc, reflected=reflected)
        )
    return LatticePath(G), records


def reduce(tree: PlaneTree, marked: Sequence[int]) -> ReducedTree:
    """Tree spanned by root and marked vertices, keeping branch points only."""
    if len(marked) == 0:
        raise ValueError("marked must be nonempty")
    distinct: list[int] = []
    for v in marked:
        if v not in distinct:
            distinct.append(int(v))
    duplicates = len(distinct) < len(marked)

    kept = set()
    for v in distinct:
        u = v
        while u not in kept:
            kept.add(u)
            if u == tree.root:
                break
            u = int(tree.parents[u])
    kept.add(tree.root)

    kept_children: dict[int, list[int]] = {
        v: [c for c in tree.children[v] if c in kept] for v in kept
    }
    marked_set = set(distinct)
    retained = {
        v
        for v in kept
        if v == tree.root or v in marked_set or len(kept_children[v]) >= 2
    }

    # map retained original vertices to 0..k-1 in lex order, root first
    lex_rank = {int(v): i for i, v in enumerate(tree.lex_order())}
    ordering = sorted(retained, key=lambda v: lex_rank[v])
    assert ordering[0] == tree.root or lex_rank[tree.root] == 0
    new_id = {v: i for i, v in enumerate(sorted(ordering, key=lambda v: lex_rank[v]))}

    parents = [-1] * len(retained)
    lengths: dict[int, float] = {}
    for v in retained:
        if v == tree.root:
            continue
        u = int(tree.parents[v])
        dist = 1
        while u not in retained:
            u = int(tree.parents[u])
            dist += 1
        parents[new_id[v]] = new_id[u]
        lengths[new_id[v]] = float(dist)
    children: list[list[int]] = [[] for _ in retained]
    for v in sorted(retained, key=lambda v: lex_rank[v]):
        if v != tree.root:
            children[parents[new_id[v]]].append(new_id[v])
    shape = PlaneTree(parents, children)

    labels = {new_id[v]: i + 1 for i, v in enumerate(distinct)}
    leaves = [v for v in range(shape.zeta) if not shape.children[v]]
    exactly_q = len(leaves) == len(distinct) and all(v in labels for v in leaves)
    return ReducedTree(
        shape=shape,
        edge_lengths=lengths,
        leaf_labels=labels,
        root_label=0,
        duplicates_collapsed=duplicates,
        exactly_q_leaves=exactly_q,
    )


def _pair_distances(tree: PlaneTree, points: Sequence[int]) -> np.ndarray:
    """Graph-distance matrix between the given vertices (root walks)."""
    d = tree.depths()
    q = len(points)
    D = np.zeros((q, q), dtype=np.float64)
    ancestors = []
    for v in points:
        anc = {}
        u = int(v)
        while True:
            anc[u] = d[u]
            if u == tree.root:
                break
            u = int(tree.parents[u])
        ancestors.append(anc)
    for a in range(q):
        for b in range(a + 1, q):
            u = int(points[b])
            while u not in ancestors[a]:
                u = int(tree.parents[u])
            lca_depth = d[u]
            D[a, b] = D[b, a] = d[points[a]] + d[points[b]] - 2 * lca_depth
    return D


def discrete_splits(tree: PlaneTree, marked: Sequence[int]) -> dict[frozenset, float]:
    """Four-point split gains g_n(omega) over subsets of {0..q}.

    Index 0 is the root; 1..q are the marked vertices in lex order.
    g_n(omega) > 0 iff a single tree edge separates the omega-part from
    its complement, in which case it equals that edge's length in the
    reduced tree.
    """
    lex_rank = {int(v): i for i, v in enumerate(tree.lex_order())}
    pts = [tree.root] + sorted({int(v) for v in marked}, key=lambda v: lex_rank[v])
    D = _pair_distances(tree, pts)
    return four_point_gains(D)
