"""Sequential hot loops, jitted with numba.

Everything here is a plain function of numpy arrays so the pure-Python
fallback (numba unavailable or disabled) stays usable in tests.
"""
from __future__ import annotations

import numpy as np

try:  # pragma: no cover - exercised implicitly
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def decode_parents(increments):
    """Parent array of the plane tree encoded by Lukasiewicz increments.

    increments[i] = (children of lex vertex i) - 1.  Returns parents with
    parents[0] = -1.  Assumes the path is a valid excursion.
    """
    n = increments.shape[0]
    parents = np.empty(n, dtype=np.int64)
    parents[0] = -1
    # stack of (vertex, remaining child slots)
    stack_v = np.empty(n, dtype=np.int64)
    stack_c = np.empty(n, dtype=np.int64)
    top = 0
    stack_v[0] = 0
    stack_c[0] = increments[0] + 1
    for i in range(1, n):
        while top >= 0 and stack_c[top] == 0:
            top -= 1
        parents[i] = stack_v[top]
        stack_c[top] -= 1
        top += 1
        stack_v[top] = i
        stack_c[top] = increments[i] + 1
    return parents


@njit(cache=True)
def filtered_component_sizes(parents, keep):
    """Component sizes after deleting every edge (v, parent v) with keep[v] False.

    parents must list children after their parents (lex order does).
    Returns the array of component sizes, one per component root.
    """
    n = parents.shape[0]
    size = np.ones(n, dtype=np.int64)
    for v in range(n - 1, 0, -1):
        if keep[v]:
            size[parents[v]] += size[v]
    count = 1
    for v in range(1, n):
        if not keep[v]:
            count += 1
    out = np.empty(count, dtype=np.int64)
    out[0] = size[0]
    j = 1
    for v in range(1, n):
        if not keep[v]:
            out[j] = size[v]
            j += 1
    return out


@njit(cache=True)
def branch_walk(parents, pos, nchild, root):
    """Per-vertex left/right branching counts by walking the ancestor line.

    pos[v] = index of v among its parent's children; nchild[v] = number of
    children of v.
    """
    n = parents.shape[0]
    L = np.zeros(n, dtype=np.int64)
    R = np.zeros(n, dtype=np.int64)
    for v in range(n):
        u = v
        lv = 0
        rv = 0
        while u != root:
            p = parents[u]
            lv += pos[u]
            rv += nchild[p] - 1 - pos[u]
            u = p
        L[v] = lv
        R[v] = rv
    return L, R


@njit(cache=True)
def subtree_sizes(parents):
    n = parents.shape[0]
    size = np.ones(n, dtype=np.int64)
    for v in range(n - 1, 0, -1):
        size[parents[v]] += size[v]
    return size


@njit(cache=True)
def depths(parents):
    n = parents.shape[0]
    d = np.zeros(n, dtype=np.int64)
    for v in range(1, n):
        d[v] = d[parents[v]] + 1
    return d
