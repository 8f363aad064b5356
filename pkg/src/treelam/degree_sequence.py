"""Degree sequences of rooted plane trees and their finite-n diagnostics.

A degree sequence is a sparse map ``{i: N_i}`` counting vertices with
``i`` children.  A tree on ``V = sum N_i`` vertices exists iff
``V = 1 + sum i*N_i`` (one more vertex than edges).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import ConstraintViolation, Empty, NotNormalized, TooFewPoints

__all__ = [
    "DegreeSequence",
    "DegreeStats",
    "ThetaParams",
    "validate",
    "stats",
    "child_sequence",
    "theta_check",
    "hypothesis_report",
]


@dataclass(frozen=True)
class DegreeSequence:
    """Immutable sparse counts {child-count i: number of vertices N_i}."""

    counts: Mapping[int, int]

    def __post_init__(self):
        # normalize to a plain dict with zero entries dropped, sorted keys
        clean = {int(i): int(n) for i, n in self.counts.items() if n != 0}
        object.__setattr__(self, "counts", dict(sorted(clean.items())))

    @property
    def num_vertices(self) -> int:
        return sum(self.counts.values())

    @property
    def num_edges(self) -> int:
        return sum(i * n for i, n in self.counts.items())

    def to_json(self) -> str:
        return json.dumps({"counts": {str(i): n for i, n in self.counts.items()}})

    @classmethod
    def from_json(cls, text: str) -> "DegreeSequence":
        data = json.loads(text)
        return validate({int(i): int(n) for i, n in data["counts"].items()})

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["i", "N_i"])
        for i, n in self.counts.items():
            w.writerow([i, n])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DegreeSequence":
        rows = list(csv.reader(io.StringIO(text)))
        counts: dict[int, int] = {}
        for row in rows[1:]:
            if not row:
                continue
            counts[int(row[0])] = counts.get(int(row[0]), 0) + int(row[1])
        return validate(counts)


@dataclass(frozen=True)
class DegreeStats:
    num_vertices: int
    num_edges: int
    sigma2: int  # sum_i i*(i-1)*N_i
    max_degree: int
    child_sequence: tuple[int, ...]  # non-increasing, length V


@dataclass(frozen=True)
class ThetaParams:
    """Continuum parameters (sigma; beta_1 >= beta_2 >= ...)."""

    sigma: float
    betas: tuple[float, ...]
    normalized: bool
    condition_b: bool
    condition_a4: bool
    divergent_beta: bool = False

    @property
    def is_brownian(self) -> bool:
        return not self.betas or all(b == 0.0 for b in self.betas)


def validate(counts: Mapping[int, int]) -> DegreeSequence:
    """Check the tree constraint and wrap the counts.

    Raises ConstraintViolation if sum N_i != 1 + sum i*N_i, Empty if
    there is no vertex at all.
    """
    for i, n in counts.items():
        if i < 0 or n < 0:
            raise ConstraintViolation(f"negative entry ({i}: {n})")
    ds = DegreeSequence(counts)
    if ds.num_vertices == 0:
        raise Empty("degree sequence has no vertices")
    if ds.num_vertices != 1 + ds.num_edges:
        raise ConstraintViolation(
            f"sum N_i = {ds.num_vertices} but 1 + sum i*N_i = {1 + ds.num_edges}"
        )
    return ds


def stats(ds: DegreeSequence) -> DegreeStats:
    """Vertex/edge counts, the variance term sum i(i-1)N_i, and d(1)>=d(2)>=..."""
    seq = child_sequence(ds)
    return DegreeStats(
        num_vertices=ds.num_vertices,
        num_edges=ds.num_edges,
        sigma2=sum(i * (i - 1) * n for i, n in ds.counts.items()),
        max_degree=seq[0] if seq else 0,
        child_sequence=seq,
    )


def child_sequence(ds: DegreeSequence) -> tuple[int, ...]:
    """The multiset of child counts, sorted non-increasing (length V)."""
    out: list[int] = []
    for i, n in ds.counts.items():
        out.extend([i] * n)
    out.sort(reverse=True)
    return tuple(out)


def counts_from_child_sequence(seq: Iterable[int]) -> DegreeSequence:
    counts: dict[int, int] = {}
    for k in seq:
        counts[k] = counts.get(k, 0) + 1
    return validate(counts)


def theta_check(
    sigma: float,
    betas: Sequence[float],
    strict: bool = False,
    divergent_beta: bool = False,
    tol: float = 1e-9,
) -> ThetaParams:
    """Sort betas, set the normalization / condition flags.

    ``divergent_beta`` is a caller-supplied marker meaning the finite list
    stands in for a sequence with infinite sum (we never represent one).
    """
    if sigma < 0 or any(b < 0 for b in betas):
        raise ValueError("sigma and betas must be nonnegative")
    bs = tuple(sorted((float(b) for b in betas), reverse=True))
    total = sigma * sigma + sum(b * b for b in bs)
    normalized = abs(total - 1.0) <= tol
    if strict and not normalized:
        raise NotNormalized(f"sigma^2 + sum beta^2 = {total!r}")
    condition_b = sigma > 0 and not divergent_beta
    condition_a4 = sigma > 0 or divergent_beta
    return ThetaParams(
        sigma=float(sigma),
        betas=bs,
        normalized=normalized,
        condition_b=condition_b,
        condition_a4=condition_a4,
        divergent_beta=divergent_beta,
    )


def _trend(values: Sequence[float]) -> str:
    diffs = [values[k + 1] - values[k] for k in range(len(values) - 1)]
    if all(d > 0 for d in diffs):
        return "increasing"
    if all(d < 0 for d in diffs):
        return "decreasing"
    if all(abs(diffs[k + 1]) <= abs(diffs[k]) for k in range(len(diffs) - 1)):
        return "stabilizing"
    return "mixed"


def hypothesis_report(family: Sequence[tuple[DegreeSequence, float]]) -> dict:
    """Tabulate finite-n ratios for a family of (degree sequence, b_n).

    Reports, per entry: d(i)/b_n for i <= 10, sum (i-1)^2 N_i / b_n^2 and
    V_n/b_n, plus monotone-trend verdicts.  No asymptotic claim is made:
    the limiting conditions are untestable at any single n; we only check
    whether the tabulated ratios move monotonically / stabilize.
    """
    if len(family) < 2:
        raise TooFewPoints("need at least two family members")
    rows = []
    for ds, b_n in family:
        if b_n <= 0:
            raise ValueError("b_n must be positive")
        st = stats(ds)
        ratio_var = sum((i - 1) ** 2 * n for i, n in ds.counts.items()) / (b_n * b_n)
        rows.append(
            {
                "V": st.num_vertices,
                "b_n": b_n,
                "top_degrees_over_bn": [d / b_n for d in st.child_sequence[:10]],
                "variance_ratio": ratio_var,
                "V_over_bn": st.num_vertices / b_n,
            }
        )
    if any(rows[k + 1]["V"] < rows[k]["V"] for k in range(len(rows) - 1)):
        raise ValueError("family must be sorted by V_n increasing")

    beta_hats = rows[-1]["top_degrees_over_bn"]
    verdicts = {
        "A1_vertices_grow": _trend([r["V"] for r in rows]) == "increasing",
        "A2_degree_ratio_trend": _trend(
            [r["top_degrees_over_bn"][0] for r in rows]
        ),
        "A3_variance_ratio_trend": _trend([r["variance_ratio"] for r in rows]),
        "A4_plausible": rows[-1]["variance_ratio"] > sum(b * b for b in beta_hats[:10]) - 1e-9,
        "B_plausible": math.isfinite(sum(beta_hats)) and rows[-1]["variance_ratio"] > 0,
    }
    return {"rows": rows, "beta_hat": beta_hats, "verdicts": verdicts}
