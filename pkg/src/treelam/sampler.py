"""Exact-uniform sampling of trees with a given degree sequence.

The sampler permutes the child multiset uniformly and applies the cycle
lemma: among the cyclic rotations of an increment word summing to -1,
exactly one is a Lukasiewicz excursion (the one starting right after the
first prefix-sum minimum).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .degree_sequence import DegreeSequence, child_sequence
from .errors import TooLarge
from .plane_tree import LatticePath, PlaneTree, from_lukasiewicz

__all__ = [
    "Seed",
    "EdgeWeights",
    "ExpClocks",
    "sample_tree",
    "sample_increments",
    "enumerate_trees",
    "attach_weights",
    "exp_clocks",
    "uniform_vertices",
    "cycle_rotation",
]


@dataclass(frozen=True)
class Seed:
    """Reproducibility handle: identical (master, stream) => identical draws."""

    master: int
    stream: int = 0

    def rng(self) -> np.random.Generator:
        return np.random.default_rng([self.master & (2**64 - 1), self.stream])

    def child(self, k: int) -> "Seed":
        """Derived stream for the k-th parallel replica."""
        return Seed(self.master, self.stream * 1_000_003 + k + 1)


@dataclass(frozen=True)
class EdgeWeights:
    """Uniform [0,1] weights keyed by the child endpoint of each edge."""

    w: dict[int, float]

    def __getitem__(self, v: int) -> float:
        return self.w[v]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["child", "weight"])
        for v in sorted(self.w):
            writer.writerow([v, repr(self.w[v])])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "EdgeWeights":
        rows = list(csv.reader(io.StringIO(text)))
        return cls({int(r[0]): float(r[1]) for r in rows[1:] if r})


@dataclass(frozen=True)
class ExpClocks:
    """Exp(1) clocks keyed by the child endpoint of each edge."""

    gamma: dict[int, float]

    def __getitem__(self, v: int) -> float:
        return self.gamma[v]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["child", "clock"])
        for v in sorted(self.gamma):
            writer.writerow([v, repr(self.gamma[v])])
        return buf.getvalue()


def cycle_rotation(increments: np.ndarray) -> np.ndarray:
    """The unique rotation of an increment word (sum -1) that is an excursion."""
    s = np.cumsum(increments)
    if s[-1] != -1:
        raise ValueError("increments must sum to -1")
    p = int(np.argmin(s)) + 1  # start right after the first prefix minimum
    if p == increments.shape[0]:
        return increments
    return np.concatenate([increments[p:], increments[:p]])


def sample_increments(ds: DegreeSequence, rng: np.random.Generator) -> np.ndarray:
    """Increment word of a uniform tree with degree sequence ds."""
    seq = np.asarray(child_sequence(ds), dtype=np.int64) - 1
    return cycle_rotation(rng.permutation(seq))


def sample_tree(ds: DegreeSequence, seed: Seed) -> PlaneTree:
    incs = sample_increments(ds, seed.rng())
    return from_lukasiewicz(LatticePath(np.concatenate([[0], np.cumsum(incs)])))


def enumerate_trees(ds: DegreeSequence) -> list[PlaneTree]:
    """All distinct plane trees with degree sequence ds (V <= 14 guard)."""
    V = ds.num_vertices
    if V > 14:
        raise TooLarge(f"enumeration guarded at V <= 14, got {V}")
    remaining = dict(ds.counts)
    prefix: list[int] = []
    out: list[PlaneTree] = []

    def rec(placed: int, s: int) -> None:
        if placed == V:
            if s == -1:
                values = np.concatenate([[0], np.cumsum(np.array(prefix) - 1)])
                out.append(from_lukasiewicz(LatticePath(values)))
            return
        for k in list(remaining):
            if remaining[k] == 0:
                continue
            s2 = s + k - 1
            if placed < V - 1 and s2 < 0:
                continue
            remaining[k] -= 1
            prefix.append(k)
            rec(placed + 1, s2)
            prefix.pop()
            remaining[k] += 1

    rec(0, 0)
    return out


def attach_weights(tree: PlaneTree, seed: Seed) -> EdgeWeights:
    """I.i.d. uniform [0,1] weight per edge; re-drawn until pairwise distinct."""
    rng = seed.rng()
    children = [v for v in range(tree.zeta) if v != tree.root]
    while True:
        vals = rng.random(len(children))
        if len(np.unique(vals)) == len(children):
            return EdgeWeights(dict(zip(children, vals.tolist())))


def exp_clocks(tree: PlaneTree, seed: Seed) -> ExpClocks:
    rng = seed.rng()
    children = [v for v in range(tree.zeta) if v != tree.root]
    while True:
        vals = rng.exponential(1.0, len(children))
        if len(np.unique(vals)) == len(children):
            return ExpClocks(dict(zip(children, vals.tolist())))


def uniform_vertices(
    tree: PlaneTree, q: int, seed: Seed
) -> tuple[np.ndarray, np.ndarray]:
    """q vertices chosen as the floor(V*U_k)-th in lex order; returns sorted U."""
    if q < 1:
        raise ValueError("q must be >= 1")
    rng = seed.rng()
    U = rng.random(q)
    order = tree.lex_order()
    vertices = order[np.floor(tree.zeta * U).astype(np.int64)]
    return vertices, np.sort(U)
