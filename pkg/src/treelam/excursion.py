"""Continuum side on a uniform grid of [0,1].

Exchangeable-increment bridges (Brownian part plus centered jumps at
uniform locations), the Vervaat transform, the excursion-with-jumps to
continuous-excursion correction (subtracting one reflected process per
jump), fragmentation of a drifted excursion, and reduced trees read off
the pseudo-metric r_f.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from ._four_point import four_point_gains, laminar_splits
from .degree_sequence import ThetaParams
from .errors import NotABridge, NotLaminar
from .fragmentation import RankedMasses
from .plane_tree import PlaneTree, ReducedTree
from .sampler import Seed

__all__ = [
    "GridPath",
    "Jump",
    "ReflectedProcess",
    "brownian_bridge",
    "ei_bridge",
    "vervaat",
    "h_exc",
    "frag_from_excursion",
    "tree_distance",
    "continuum_reduced_tree",
    "reduced_tree_from_distances",
]

_EPS = 1e-12


@dataclass(frozen=True)
class Jump:
    grid_index: int
    size: float
    rank: int  # hub rank i >= 1


@dataclass(frozen=True)
class GridPath:
    """Real path sampled at k/m, k = 0..m, with annotated jumps."""

    m: int
    values: np.ndarray
    jumps: tuple[Jump, ...] = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape[0] != self.m + 1:
            raise ValueError("values must have length m+1")
        object.__setattr__(self, "values", v)
        object.__setattr__(
            self, "jumps", tuple(sorted(self.jumps, key=lambda j: j.grid_index))
        )

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.m + 1) / self.m

    def is_bridge(self) -> bool:
        return abs(self.values[0]) <= _EPS and abs(self.values[-1]) <= _EPS

    def is_excursion(self) -> bool:
        return self.is_bridge() and float(self.values.min()) >= -_EPS

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["t", "value"])
        for k in range(self.m + 1):
            w.writerow([repr(k / self.m), repr(float(self.values[k]))])
        return buf.getvalue()

    def jumps_json(self) -> str:
        return json.dumps(
            [
                {"grid_index": j.grid_index, "size": j.size, "rank": j.rank}
                for j in self.jumps
            ]
        )


@dataclass(frozen=True)
class ReflectedProcess:
    """Running-minimum reflection of one jump, supported on [start, end]."""

    rank: int
    start: int
    end: int
    values: np.ndarray  # on grid indices start..end inclusive


def brownian_bridge(m: int, seed: Seed) -> GridPath:
    """Gaussian bridge: cumulative N(0, 1/m) increments tied down at 1."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = seed.rng()
    steps = rng.normal(0.0, np.sqrt(1.0 / m), m)
    values = np.zeros(m + 1)
    values[1:] = np.cumsum(steps)
    values -= np.arange(m + 1) / m * values[-1]
    values[-1] = 0.0
    return GridPath(m=m, values=values)


def ei_bridge(theta: ThetaParams, K: int, m: int, seed: Seed) -> GridPath:
    """X(t) = sigma*B(t) + sum_{i<=K} beta_i (1{U_i <= t} - t) on the grid."""
    if K > len(theta.betas):
        raise ValueError("K exceeds the number of betas")
    rng = seed.rng()
    steps = rng.normal(0.0, np.sqrt(1.0 / m), m)
    bridge = np.zeros(m + 1)
    bridge[1:] = np.cumsum(steps)
    bridge -= np.arange(m + 1) / m * bridge[-1]
    bridge[-1] = 0.0
    values = theta.sigma * bridge
    grid = np.arange(m + 1) / m
    jumps = []
    U = rng.random(K)
    for i in range(K):
        beta = theta.betas[i]
        idx = max(1, int(np.ceil(U[i] * m)))
        values[idx:] += beta
        values -= beta * grid
        jumps.append(Jump(grid_index=idx, size=beta, rank=i + 1))
    values[0] = 0.0
    values[-1] = 0.0
    return GridPath(m=m, values=values, jumps=tuple(jumps))


def vervaat(x: GridPath) -> tuple[GridPath, int]:
    """Cyclic rotation of a bridge at its first grid argmin; jumps relocate."""
    if not x.is_bridge():
        raise NotABridge("vervaat requires both endpoints at 0")
    v = x.values
    rho = int(np.argmin(v[: x.m]))
    if rho == 0:
        return x, 0
    out = np.empty(x.m + 1)
    idx = (np.arange(x.m) + rho) % x.m
    out[: x.m] = v[idx] - v[rho]
    out[x.m] = 0.0
    out[0] = 0.0
    jumps = tuple(
        Jump(grid_index=(j.grid_index - rho) % x.m, size=j.size, rank=j.rank)
        for j in x.jumps
    )
    return GridPath(m=x.m, values=out, jumps=jumps), rho


def h_exc(xexc: GridPath) -> tuple[GridPath, list[ReflectedProcess]]:
    """Subtract one reflected process per jump, giving a continuous excursion.

    For jump i at grid index t with size beta: the pre-jump level is the
    grid proxy X[t] - beta; the window ends at the first later index where
    X has returned to that level (within 1e-12); on the window
    R_i = clip(running min of X - level, 0, beta).
    """
    X = xexc.values
    m = xexc.m
    H = X.copy()
    records: list[ReflectedProcess] = []
    for j in xexc.jumps:
        t = j.grid_index
        # grid proxy for the left limit; the true pre-jump level is >= 0
        base = max(X[t] - j.size, 0.0)
        after = np.flatnonzero(X[t + 1 :] <= base + _EPS)
        end = t + 1 + int(after[0]) if after.shape[0] else m
        r = np.clip(np.minimum.accumulate(X[t : end + 1]) - base, 0.0, j.size)
        H[t : end + 1] -= r
        records.append(ReflectedProcess(rank=j.rank, start=t, end=end, values=r))
    if xexc.jumps:
        # overlapping windows can over-subtract by O(m^-1/2) at a jump cell
        # (the grid running min misses the sub-cell dip); the limit is >= 0
        np.maximum(H, 0.0, out=H)
    return GridPath(m=m, values=H), records


def frag_from_excursion(g: GridPath, t: float) -> RankedMasses:
    """Ranked lengths of the constancy intervals of the running infimum of
    g(s) - t*s."""
    if t < 0:
        raise ValueError("t must be >= 0")
    y = g.values - t * g.grid
    inf = np.minimum.accumulate(y)
    drops = np.flatnonzero(inf[1:] < inf[:-1] - _EPS) + 1
    if drops.shape[0] == 0:
        return RankedMasses((1.0,))
    bounds = np.concatenate([[0], drops, [g.m]])
    lengths = np.diff(bounds) / g.m
    return RankedMasses.from_sizes(lengths[lengths > 0].tolist())


def tree_distance(f: GridPath, x: float, y: float) -> float:
    """r_f(x, y) = f(x) + f(y) - 2 min of f between them (grid-snapped)."""
    i = int(round(min(max(x, 0.0), 1.0) * f.m))
    j = int(round(min(max(y, 0.0), 1.0) * f.m))
    if i > j:
        i, j = j, i
    v = f.values
    return float(v[i] + v[j] - 2.0 * v[i : j + 1].min())


def reduced_tree_from_distances(D: np.ndarray, tol: float) -> ReducedTree:
    """Assemble the tree with root 0 and leaves 1..q from a distance matrix.

    Positive four-point gains give the splits; nesting them yields the
    shape, and the gain of a split is the length of the edge above it.
    """
    q = D.shape[0] - 1
    try:
        splits, gains = laminar_splits(D, tol)
    except ValueError as exc:
        raise NotLaminar(str(exc)) from exc

    # parent of each split: the smallest strictly-containing split
    ordered = sorted(splits, key=len)
    node_of = {s: i + 1 for i, s in enumerate(ordered)}  # 0 is the root
    parents = [-1] + [0] * len(ordered)
    for s in ordered:
        best = None
        for t in ordered:
            if s < t and (best is None or len(t) < len(best)):
                best = t
        parents[node_of[s]] = node_of[best] if best is not None else 0
    children: list[list[int]] = [[] for _ in range(len(ordered) + 1)]
    for s in sorted(ordered, key=lambda s: min(s)):
        children[parents[node_of[s]]].append(node_of[s])
    shape = PlaneTree(parents, children)

    lengths = {node_of[s]: float(gains[s]) for s in ordered}
    labels: dict[int, int] = {}
    for lab in range(1, q + 1):
        holder = None
        for s in ordered:  # smallest split containing the label
            if lab in s:
                holder = s
                break
        labels[node_of[holder] if holder is not None else 0] = lab
    leaves = [v for v in range(shape.zeta) if not shape.children[v]]
    exactly_q = len(leaves) == q and all(v in labels for v in leaves)
    return ReducedTree(
        shape=shape,
        edge_lengths=lengths,
        leaf_labels=labels,
        root_label=0,
        exactly_q_leaves=exactly_q,
    )


def continuum_reduced_tree(f: GridPath, points: list[float], tol: float) -> ReducedTree:
    """Reduced tree of the pseudo-metric r_f spanned by grid point 0 and
    the given points."""
    if len(points) > 12:
        raise ValueError("at most 12 points (2^(q+1) subsets)")
    pts = [0.0] + list(points)
    n = len(pts)
    D = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            D[a, b] = D[b, a] = tree_distance(f, pts[a], pts[b])
    return reduced_tree_from_distances(D, tol)
