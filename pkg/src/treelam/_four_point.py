"""Four-point split gains of a tree-like distance matrix.

For points indexed 0..q with distance matrix D, the gain of a bipartition
(omega, complement) is

    g(omega) = min over x1,x2 in omega, y1,y2 in complement of
        (D[x1,y1] + D[x1,y2] + D[x2,y1] + D[x2,y2]) / 4
        - (D[x1,x2] + D[y1,y2]) / 2

which is positive iff a single edge of the spanning tree separates the
two parts, and then equals that edge's length.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = ["four_point_gains", "laminar_splits"]


def _gain(D: np.ndarray, omega: Sequence[int], comp: Sequence[int]) -> float:
    w = np.asarray(omega, dtype=np.intp)
    c = np.asarray(comp, dtype=np.intp)
    A = D[np.ix_(w, c)]
    cross = (
        A[:, None, :, None]
        + A[:, None, None, :]
        + A[None, :, :, None]
        + A[None, :, None, :]
    ) / 4.0
    within = D[np.ix_(w, w)][:, :, None, None] / 2.0 + D[np.ix_(c, c)][None, None, :, :] / 2.0
    return float(np.min(cross - within))


def four_point_gains(D: np.ndarray) -> dict[frozenset, float]:
    """Gain for every subset of {0..q}; trivial subsets get 0 by convention."""
    n = D.shape[0]
    out: dict[frozenset, float] = {
        frozenset(): 0.0,
        frozenset(range(n)): 0.0,
    }
    full = list(range(n))
    # iterate over subsets not containing 0, fill the complement too
    for mask in range(1, 1 << (n - 1)):
        omega = [i + 1 for i in range(n - 1) if mask >> i & 1]
        comp = [i for i in full if i not in omega]
        if not comp:
            continue
        g = _gain(D, omega, comp)
        out[frozenset(omega)] = g
        out[frozenset(comp)] = g
    return out


def laminar_splits(D: np.ndarray, tol: float) -> tuple[list[frozenset], dict[frozenset, float]]:
    """Positive splits as subsets not containing 0, checked for laminarity.

    Returns (splits sorted by size then smallest element, their gains).
    Raises ValueError if two positive splits overlap without nesting.
    """
    gains = four_point_gains(D)
    n = D.shape[0]
    splits = [
        s
        for s, g in gains.items()
        if g > tol and 0 < len(s) < n and 0 not in s
    ]
    splits.sort(key=lambda s: (len(s), min(s)))
    for i in range(len(splits)):
        for j in range(i + 1, len(splits)):
            a, b = splits[i], splits[j]
            if a & b and not (a <= b or b <= a):
                raise ValueError(f"splits {set(a)} and {set(b)} overlap without nesting")
    return splits, {s: gains[s] for s in splits}
