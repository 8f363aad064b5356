"""Non-crossing chord laminations of the closed unit disk.

Angles are clockwise turns in [0,1): the point at angle t is
exp(-2*pi*i*t).  Chords coming from a tree edge join the first and last
contour visits of the deeper endpoint, divided by 2*zeta, so the exact
rationals g/2zeta stay representable.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import CrossingChords, NotLaminar
from .excursion import GridPath
from .fragmentation import RankedMasses
from .plane_tree import PlaneTree, ReducedTree
from .sampler import ExpClocks, Seed

__all__ = [
    "Chord",
    "Lamination",
    "LamEventList",
    "chords_from_tree",
    "lamination_at",
    "dynamic_lamination",
    "reduced_lamination",
    "poisson_lamination",
    "face_masses",
    "hausdorff",
    "process_distance",
    "svg_export",
]


@dataclass(frozen=True)
class Chord:
    a: float
    b: float

    def __post_init__(self):
        a, b = self.a, self.b
        if not (0.0 <= a < 1.0 and 0.0 <= b < 1.0):
            raise ValueError("angles must lie in [0,1) turns")
        if a > b:
            a, b = b, a
        object.__setattr__(self, "a", float(a))
        object.__setattr__(self, "b", float(b))

    @property
    def degenerate(self) -> bool:
        return self.a == self.b

    @property
    def span(self) -> float:
        return self.b - self.a

    def endpoints_xy(self) -> np.ndarray:
        ang = -2.0 * math.pi * np.array([self.a, self.b])
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)


@dataclass(frozen=True)
class Lamination:
    chords: tuple[Chord, ...]

    def __post_init__(self):
        # a lamination is a set of chords: drop duplicates
        uniq = {(c.a, c.b): c for c in self.chords}
        object.__setattr__(
            self, "chords", tuple(sorted(uniq.values(), key=lambda c: (c.a, -c.b)))
        )

    def nondegenerate(self) -> list[Chord]:
        return [c for c in self.chords if not c.degenerate]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["a", "b"])
        for c in self.chords:
            w.writerow([repr(c.a), repr(c.b)])
        return buf.getvalue()


@dataclass(frozen=True)
class LamEventList:
    events: tuple[tuple[float, Chord], ...]

    def __post_init__(self):
        ev = tuple(sorted(self.events, key=lambda e: e[0]))
        object.__setattr__(self, "events", ev)

    def at(self, t: float) -> Lamination:
        return Lamination(tuple(c for s, c in self.events if s <= t))

    def before(self, horizon: float) -> list[tuple[float, Chord]]:
        return [e for e in self.events if e[0] <= horizon]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["time", "a", "b"])
        for t, c in self.events:
            w.writerow([repr(t), repr(c.a), repr(c.b)])
        return buf.getvalue()


def chords_from_tree(tree: PlaneTree) -> dict[int, Chord]:
    """Chord per edge, keyed by child endpoint.

    The deeper endpoint v of an edge is first visited by the contour at
    time 2*lex(v) - depth(v) and last left at that time plus twice
    (subtree size - 1); angles are those times over 2*zeta.
    """
    n = tree.zeta
    order = tree.lex_order()
    lex_rank = np.empty(n, dtype=np.int64)
    lex_rank[order] = np.arange(n)
    depth = tree.depths()
    if tree._is_lex_labeled():
        sub = _kernels.subtree_sizes(tree.parents)
    else:
        sub = np.ones(n, dtype=np.int64)
        for v in order[::-1]:
            p = int(tree.parents[int(v)])
            if p >= 0:
                sub[p] += sub[int(v)]
    out: dict[int, Chord] = {}
    for v in range(n):
        if v == tree.root:
            continue
        g = 2 * int(lex_rank[v]) - int(depth[v])
        d = g + 2 * (int(sub[v]) - 1)
        out[v] = Chord(g / (2 * n), d / (2 * n))
    return out


def lamination_at(tree: PlaneTree, edge_order: Sequence[int], t: float) -> Lamination:
    """Chords of the first floor(t) (capped at zeta-1) edges of the order."""
    chords = chords_from_tree(tree)
    k = min(int(math.floor(t)), tree.zeta - 1)
    return Lamination(tuple(chords[v] for v in edge_order[:k]))


def dynamic_lamination(tree: PlaneTree, clocks: ExpClocks) -> LamEventList:
    """One event per edge at its exponential clock time."""
    vals = list(clocks.gamma.values())
    if len(set(vals)) != len(vals):
        raise ValueError("clock values must be distinct")
    chords = chords_from_tree(tree)
    return LamEventList(tuple((clocks.gamma[v], chords[v]) for v in chords))


def _arc_midpoint(alpha: float, beta: float) -> float:
    """Midpoint of the clockwise arc from alpha to beta."""
    return (alpha + ((beta - alpha) % 1.0) / 2.0) % 1.0


def reduced_lamination(
    rt: ReducedTree, arcs: Sequence[float], seed: Seed = Seed(0)
) -> tuple[Lamination, LamEventList]:
    """Chords between arc midpoints realizing each split of the reduced tree.

    arcs = positions a_0..a_q, sorted clockwise from 1.  If the tree does
    not have exactly q leaves the circle-only singleton is returned.
    Event times are exponential with rate the edge length.
    """
    q = len(arcs) - 1
    arcs = [float(a) % 1.0 for a in arcs]
    if sorted(arcs) != list(arcs):
        raise ValueError("arcs must be sorted clockwise (increasing turns)")
    if not rt.exactly_q_leaves or len(rt.leaf_labels) != q:
        return Lamination(()), LamEventList(())

    # labels in the subtree below each shape vertex
    below: dict[int, set[int]] = {v: set() for v in range(rt.shape.zeta)}
    for v in rt.shape.lex_order()[::-1]:
        v = int(v)
        if v in rt.leaf_labels:
            below[v].add(rt.leaf_labels[v])
        p = int(rt.shape.parents[v])
        if p >= 0:
            below[p] |= below[v]

    rng = seed.rng()
    chords = []
    times = []
    for v in range(rt.shape.zeta):
        if v == rt.shape.root:
            continue
        labs = sorted(below[v])
        lo, hi = labs[0], labs[-1]
        if labs != list(range(lo, hi + 1)):
            raise NotLaminar(f"subtree labels {labs} are not consecutive")
        a = _arc_midpoint(arcs[lo - 1], arcs[lo])
        b = _arc_midpoint(arcs[hi], arcs[(hi + 1) % (q + 1)])
        chords.append(Chord(a, b))
        times.append(rng.exponential(1.0 / rt.edge_lengths[v]))
    lam = Lamination(tuple(chords))
    return lam, LamEventList(tuple(zip(times, chords)))


def poisson_lamination(
    f: GridPath, horizon: float, seed: Seed, max_events: int = 100_000
) -> LamEventList:
    """Chords of a Poisson point process with intensity 1/(d-g) under the
    graph of f, each at a uniform time in [0, horizon].

    Sampled exactly by the level decomposition: a level y contributes one
    unit of intensity per excursion interval of {f > y}, and x is uniform
    within the chosen interval.  The documented density cap min(1/(d-g), m)
    never binds on the grid (intervals are at least one cell wide).
    """
    if not f.is_excursion():
        raise ValueError("poisson_lamination requires an excursion")
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    rng = seed.rng()
    v = f.values
    ymax = float(v.max())
    if horizon == 0 or ymax <= 0:
        return LamEventList(())
    # upper bound on the number of excursion intervals at any level
    interior = v[1:-1]
    kmax = max(1, int(np.sum((interior > np.roll(v, 1)[1:-1]) & (interior >= np.roll(v, -1)[1:-1]))))
    n_cand = rng.poisson(horizon * ymax * kmax)
    if n_cand > 50 * max_events:
        raise ValueError("dominating intensity too large; reduce horizon or m")
    events = []
    for _ in range(int(n_cand)):
        y = rng.uniform(0.0, ymax)
        above = v > y
        # maximal runs of grid points above the level
        edges = np.diff(above.astype(np.int8))
        starts = np.flatnonzero(edges == 1) + 1
        ends = np.flatnonzero(edges == -1)
        k = starts.shape[0]
        if k == 0 or rng.random() >= k / kmax:
            continue
        j = rng.integers(k)
        g = (starts[j] - 1) / f.m  # last grid point below the level, left side
        d = (ends[j] + 1) / f.m  # first grid point below the level, right side
        x = rng.uniform(g, d)  # uniform in the interval = density 1/(d-g)
        del x  # chord depends only on (g, d)
        events.append((rng.uniform(0.0, horizon), Chord(g % 1.0, d % 1.0 if d < 1 else 0.0)))
        if len(events) > max_events:
            raise ValueError("too many events; reduce horizon")
    return LamEventList(tuple(events))


def _sweep_events(chords: Sequence[Chord]):
    """Endpoint events sorted so that closings precede openings at equal
    angles, outer chords open first and inner chords close first."""
    ev = []
    for c in chords:
        ev.append((c.a, 1, -c.b, c))
        ev.append((c.b, 0, -c.a, c))
    ev.sort(key=lambda e: (e[0], e[1], e[2]))
    return ev


def face_masses(L: Lamination) -> RankedMasses:
    """Masses (boundary arc measure, in turns) of the faces of the disk cut
    along the chords.  k non-degenerate chords make k+1 faces."""
    chords = L.nondegenerate()
    masses = []
    stack: list[list] = [[None, 0.0]]  # [chord, span consumed by children]
    for ang, kind, _, c in _sweep_events(chords):
        if kind == 1:  # opening
            top = stack[-1][0]
            if top is not None and c.b > top.b:
                raise CrossingChords(f"{c} crosses {top}")
            stack.append([c, 0.0])
        else:  # closing: must close the innermost open chord
            if stack[-1][0] is not c:
                raise CrossingChords(f"{c} crosses {stack[-1][0]}")
            _, consumed = stack.pop()
            masses.append(c.span - consumed)
            stack[-1][1] += c.span
    masses.append(1.0 - stack[0][1])  # outer face
    return RankedMasses.from_sizes(masses)


def _chord_points(c: Chord, spacing: float) -> np.ndarray:
    p = c.endpoints_xy()
    length = float(np.linalg.norm(p[1] - p[0]))
    k = max(2, int(math.ceil(length / spacing)) + 1)
    t = np.linspace(0.0, 1.0, k)[:, None]
    return p[0] * (1 - t) + p[1] * t


def _dist_to_segments(points: np.ndarray, segs: list[np.ndarray]) -> np.ndarray:
    """Min distance from each point to the circle and the given segments."""
    best = 1.0 - np.linalg.norm(points, axis=1)  # distance to the unit circle
    for p in segs:
        a, b = p[0], p[1]
        ab = b - a
        denom = float(ab @ ab)
        if denom == 0.0:
            d = np.linalg.norm(points - a, axis=1)
        else:
            t = np.clip((points - a) @ ab / denom, 0.0, 1.0)
            proj = a + t[:, None] * ab
            d = np.linalg.norm(points - proj, axis=1)
        best = np.minimum(best, d)
    return best


def hausdorff(L1: Lamination, L2: Lamination, tol: float) -> float:
    """Hausdorff distance between circle-union-chords sets, within tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    spacing = tol / 2.0
    segs1 = [c.endpoints_xy() for c in L1.nondegenerate()]
    segs2 = [c.endpoints_xy() for c in L2.nondegenerate()]

    def one_sided(chords, segs_other):
        worst = 0.0
        for c in chords:
            pts = _chord_points(c, spacing)
            worst = max(worst, float(_dist_to_segments(pts, segs_other).max()))
        return worst

    return max(one_sided(L1.nondegenerate(), segs2), one_sided(L2.nondegenerate(), segs1))


def process_distance(
    P1: LamEventList, P2: LamEventList, horizon: float, tol: float
) -> float:
    """Upper bound on the Skorokhod J1 distance between two lamination
    processes, by dynamic programming over monotone alignments of their
    event sequences (time distortion vs Hausdorff mismatch)."""
    e1 = P1.before(horizon)
    e2 = P2.before(horizon)
    n1, n2 = len(e1), len(e2)
    if n1 == n2 and all(c1 == c2 for (_, c1), (_, c2) in zip(e1, e2)):
        # identical chord sequences: align one-to-one, only times differ
        return max((abs(t1 - t2) for (t1, _), (t2, _) in zip(e1, e2)), default=0.0)
    if n1 * n2 > 250_000:
        raise ValueError("too many events for alignment DP")

    lam1 = [Lamination(tuple(c for _, c in e1[:i])) for i in range(n1 + 1)]
    lam2 = [Lamination(tuple(c for _, c in e2[:j])) for j in range(n2 + 1)]
    cost_memo: dict[tuple[int, int], float] = {}

    def cost(i: int, j: int) -> float:
        if (i, j) not in cost_memo:
            set1 = {(c.a, c.b) for c in lam1[i].chords}
            set2 = {(c.a, c.b) for c in lam2[j].chords}
            cost_memo[i, j] = 0.0 if set1 == set2 else hausdorff(lam1[i], lam2[j], tol)
        return cost_memo[i, j]

    INF = float("inf")
    dp = np.full((n1 + 1, n2 + 1), INF)
    dp[0, 0] = 0.0
    for i in range(n1 + 1):
        for j in range(n2 + 1):
            if i == j == 0:
                continue
            best = INF
            if i > 0 and j > 0:
                best = min(best, max(dp[i - 1, j - 1], abs(e1[i - 1][0] - e2[j - 1][0])))
            if i > 0:
                best = min(best, dp[i - 1, j])
            if j > 0:
                best = min(best, dp[i, j - 1])
            dp[i, j] = max(best, cost(i, j)) if best < INF else INF
    return float(dp[n1, n2])


def svg_export(obj, path: str) -> None:
    """Deterministic SVG: unit circle plus chords as line segments."""
    if isinstance(obj, PlaneTree):
        lam = Lamination(tuple(chords_from_tree(obj).values()))
    elif isinstance(obj, Lamination):
        lam = obj
    else:
        raise TypeError("svg_export takes a Lamination or a PlaneTree")
    lines = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1.1 -1.1 2.2 2.2" '
        'width="600" height="600">',
        '<circle cx="0" cy="0" r="1" fill="none" stroke="black" stroke-width="0.01"/>',
    ]
    for c in lam.nondegenerate():
        p = c.endpoints_xy()
        lines.append(
            f'<line x1="{p[0,0]:.6f}" y1="{p[0,1]:.6f}" '
            f'x2="{p[1,0]:.6f}" y2="{p[1,1]:.6f}" '
            'stroke="black" stroke-width="0.005"/>'
        )
    lines.append("</svg>")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IOError(str(exc)) from exc
