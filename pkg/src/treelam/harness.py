"""Experiment drivers: degree-sequence builders, fast vectorized sampling
of path statistics at large n, KS comparisons between the discrete and
continuum pipelines, and report generation."""
from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np

from . import _kernels
from .degree_sequence import (
    DegreeSequence,
    ThetaParams,
    child_sequence,
    theta_check,
    validate,
)
from .errors import Infeasible, TooFewSamples
from .excursion import ei_bridge, frag_from_excursion, h_exc, vervaat
from .fragmentation import RankedMasses, integer_frag, l1_distance
from .lamination import LamEventList, chords_from_tree, face_masses, lamination_at, process_distance
from .plane_tree import from_lukasiewicz, LatticePath
from .sampler import Seed, cycle_rotation, exp_clocks, sample_tree

__all__ = [
    "KSResult",
    "ExperimentConfig",
    "ks_two_sample",
    "build_degree_sequence",
    "run_experiment",
    "discrete_statistic_samples",
    "continuum_statistic_samples",
    "lamination_coupling_distance",
]


@dataclass(frozen=True)
class KSResult:
    statistic: float
    p_value: float
    n1: int
    n2: int


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> KSResult:
    """Two-sample KS statistic with the standard asymptotic p-value series."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    n1, n2 = a.shape[0], b.shape[0]
    if n1 < 10 or n2 < 10:
        raise TooFewSamples("need at least 10 samples per side")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / n1
    cdf_b = np.searchsorted(b, grid, side="right") / n2
    D = float(np.abs(cdf_a - cdf_b).max())
    ne = n1 * n2 / (n1 + n2)
    lam = (math.sqrt(ne) + 0.12 + 0.11 / math.sqrt(ne)) * D
    if lam < 1e-6:  # the alternating series is degenerate at 0
        return KSResult(statistic=D, p_value=1.0, n1=n1, n2=n2)
    p = 2.0 * sum((-1) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam) for k in range(1, 101))
    return KSResult(statistic=D, p_value=float(min(max(p, 0.0), 1.0)), n1=n1, n2=n2)


def build_degree_sequence(
    kind: str, n: int, theta: ThetaParams
) -> tuple[DegreeSequence, float]:
    """Construct a degree sequence with V ~ n matching theta, plus its b_n.

    kinds: "binary" (leaves + 2-children bulk), "geometric-tail"
    (N_i ~ 2^-i), "hubs+binary" (one vertex of degree ~ beta_i*b_n per
    beta, binary bulk).  b_n is chosen so the rescaled degree variance is
    ~ sigma^2 + sum beta^2.
    """
    if n < 10:
        raise Infeasible("n too small")
    norm = theta.sigma**2 + sum(b * b for b in theta.betas)
    if kind == "binary":
        k = (n - 1) // 2
        ds = validate({0: k + 1, 2: k})
        return ds, math.sqrt((2 * k + 1) / norm)
    if kind == "geometric-tail":
        imax = 20
        weights = np.array([i * 0.5**i for i in range(1, imax + 1)])
        target_e = n - 1
        counts = {
            i: int(round(target_e * (0.5**i * i) / weights.sum() / i))
            for i in range(1, imax + 1)
        }
        counts = {i: c for i, c in counts.items() if c > 0}
        e = sum(i * c for i, c in counts.items())
        counts[1] = counts.get(1, 0) + max(0, target_e - e)
        v = 1 + sum(i * c for i, c in counts.items())
        counts[0] = v - sum(counts.values())
        if counts[0] < 0:
            raise Infeasible("geometric tail rounding failed")
        ds = validate(counts)
        var = sum((i - 1) ** 2 * c for i, c in counts.items())
        return ds, math.sqrt(var / norm)
    if kind == "hubs+binary":
        betas = [b for b in theta.betas if b > 0]
        b_n = math.sqrt(n)
        for _ in range(100):
            hubs = [int(round(b * b_n)) for b in betas]
            if any(h < 3 for h in hubs):
                raise Infeasible("hubs too small at this n; increase n")
            B = sum(hubs)
            k = (n - 1 - B) // 2
            if k < 1:
                raise Infeasible("hubs consume the whole vertex budget")
            var = 1 + 2 * k + B - len(hubs) + sum((h - 1) ** 2 for h in hubs)
            b_new = math.sqrt(var / norm)
            if abs(b_new - b_n) < 1e-9:
                b_n = b_new
                break
            b_n = b_new
        hubs = [int(round(b * b_n)) for b in betas]
        B = sum(hubs)
        k = (n - 1 - B) // 2
        counts: dict[int, int] = {}
        for h in hubs:
            counts[h] = counts.get(h, 0) + 1
        counts[2] = counts.get(2, 0) + k
        # leaves from the tree constraint: V = 1 + E
        e = sum(i * c for i, c in counts.items())
        counts[0] = 1 + e - sum(counts.values())
        if counts[0] < 0:
            raise Infeasible("negative leaf count")
        return validate(counts), b_n
    raise ValueError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# fast vectorized discrete statistics (used at n ~ 1e5)


def _sample_path_values(base: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    incs = cycle_rotation(rng.permutation(base))
    values = np.empty(incs.shape[0] + 1, dtype=np.int64)
    values[0] = 0
    np.cumsum(incs, out=values[1:])
    return values


def _height_of_vertex(W: np.ndarray, i: int) -> int:
    """Depth of the i-th lex vertex from the Lukasiewicz values alone:
    the ancestors of i are the j < i with min W(j+1..i) >= W(j)."""
    if i == 0:
        return 0
    sm = np.minimum.accumulate(W[i:0:-1])[::-1]  # sm[j] = min W[j+1..i]
    return int(np.sum(W[:i] <= sm))


def discrete_statistic_samples(
    ds: DegreeSequence,
    b_n: float,
    theta: ThetaParams,
    kind: str,
    num: int,
    seed: Seed,
    t: float = 1.0,
) -> np.ndarray:
    """num i.i.d. samples of the rescaled discrete statistic."""
    base = np.asarray(child_sequence(ds), dtype=np.int64) - 1
    V = base.shape[0]
    rng = seed.rng()
    out = np.empty(num)
    for r in range(num):
        W = _sample_path_values(base, rng)
        if kind == "lukasiewicz":
            out[r] = W[V // 2] / b_n
        elif kind == "heights":
            i = int(np.floor(V * rng.random()))
            out[r] = (theta.sigma**2 / 2.0) * (b_n / V) * _height_of_vertex(W, i)
        elif kind == "fragmentation":
            parents = _kernels.decode_parents(np.diff(W))
            s = 1.0 - t * b_n / V
            keep = rng.random(V) <= s
            keep[0] = False
            sizes = _kernels.filtered_component_sizes(parents, keep)
            out[r] = sizes.max() / V
        else:
            raise ValueError(f"unknown statistic kind {kind!r}")
    return out


def continuum_statistic_samples(
    theta: ThetaParams,
    kind: str,
    num: int,
    m: int,
    seed: Seed,
    t: float = 1.0,
    cache_dir: str | None = None,
) -> np.ndarray:
    """num i.i.d. samples of the continuum statistic, optionally cached."""
    K = len([b for b in theta.betas if b > 0])
    key = None
    if cache_dir:
        raw = json.dumps(
            [theta.sigma, list(theta.betas), kind, num, m, seed.master, seed.stream, t]
        )
        key = os.path.join(
            cache_dir, hashlib.sha256(raw.encode()).hexdigest()[:24] + ".npy"
        )
        if os.path.exists(key):
            return np.load(key)
    rng = seed.rng()
    out = np.empty(num)
    for r in range(num):
        x = ei_bridge(theta, K, m, seed.child(r))
        exc, _ = vervaat(x)
        if kind == "lukasiewicz":
            out[r] = exc.values[m // 2]
        elif kind == "heights":
            H, _ = h_exc(exc)
            out[r] = H.values[int(round(rng.random() * m))]
        elif kind == "fragmentation":
            out[r] = frag_from_excursion(exc, t)[0]
        else:
            raise ValueError(f"unknown statistic kind {kind!r}")
    if key:
        os.makedirs(cache_dir, exist_ok=True)
        np.save(key, out)
    return out


# ---------------------------------------------------------------------------
# experiment configs and drivers


@dataclass
class ExperimentConfig:
    kind: str  # lukasiewicz | heights | fragmentation | masses | lamination
    builder: str = "binary"
    n: int = 10_000
    sigma: float = 1.0
    betas: tuple[float, ...] = ()
    samples: int = 500
    t: float = 1.0
    m: int = 2**14
    seeds: tuple[int, ...] = (101, 202, 303)
    p_threshold: float = 0.01
    zetas: tuple[int, ...] = (100, 1000, 10_000)  # lamination kind only
    replicas: int = 50  # lamination kind only
    a_n_rule: str = "b_n"
    cache_dir: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        for k in ("betas", "seeds", "zetas"):
            if k in data:
                data[k] = tuple(data[k])
        return cls(**data)

    def hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def _ks_experiment(cfg: ExperimentConfig) -> dict:
    theta = theta_check(cfg.sigma, cfg.betas)
    ds, b_n = build_degree_sequence(cfg.builder, cfg.n, theta)
    results = []
    passed = True
    per_seed_samples = {}
    for s in cfg.seeds:
        disc = discrete_statistic_samples(
            ds, b_n, theta, cfg.kind, cfg.samples, Seed(s, 1), t=cfg.t
        )
        cont = continuum_statistic_samples(
            theta, cfg.kind, cfg.samples, cfg.m, Seed(s, 2), t=cfg.t,
            cache_dir=cfg.cache_dir,
        )
        ks = ks_two_sample(disc, cont)
        results.append({"seed": s, "D": ks.statistic, "p": ks.p_value})
        per_seed_samples[s] = (disc, cont)
        passed = passed and ks.p_value > cfg.p_threshold
    return {
        "kind": cfg.kind,
        "b_n": b_n,
        "V": ds.num_vertices,
        "ks": results,
        "passed": passed,
        "samples": per_seed_samples,
    }


def _masses_experiment(cfg: ExperimentConfig) -> dict:
    theta = theta_check(cfg.sigma, cfg.betas)
    ds, b_n = build_degree_sequence(cfg.builder, min(cfg.n, 2000), theta)
    rows = []
    passed = True
    for s in cfg.seeds:
        tree = sample_tree(ds, Seed(s, 1))
        zeta = tree.zeta
        rng = Seed(s, 2).rng()
        order = [int(v) for v in rng.permutation([v for v in range(zeta) if v != tree.root])]
        for t in [0.0, 1.0, zeta / 10, zeta / 2, zeta - 1.0]:
            lam = lamination_at(tree, order, t)
            fm = face_masses(lam)
            comp = integer_frag(tree, order, t)
            bound = 2 * (math.floor(t) + 1) / zeta
            dev = max(
                abs(fm[i] - comp[i] / zeta) for i in range(max(len(fm), len(comp)))
            )
            # a degenerate (leaf-edge) chord is a zero-mass face pinched at
            # a circle point; with those, faces == components exactly
            faces = len(fm) + (len(lam.chords) - len(lam.nondegenerate()))
            ok = faces == len(comp) and dev <= bound + 1e-12
            rows.append({"seed": s, "t": t, "deviation": dev, "bound": bound, "ok": ok})
            passed = passed and ok
    return {"kind": "masses", "rows": rows, "passed": passed}


def lamination_coupling_distance(zeta: int, seed: Seed) -> float:
    """Distance between the dynamic and integer-time lamination processes
    of one uniform binary tree, with times scaled by a_n/zeta (a_n =
    sqrt(zeta))."""
    theta = theta_check(1.0, ())
    ds, _ = build_degree_sequence("binary", zeta, theta)
    tree = sample_tree(ds, Seed(seed.master, seed.stream * 2 + 1))
    clocks = exp_clocks(tree, Seed(seed.master, seed.stream * 2 + 2))
    chords = chords_from_tree(tree)
    zeta = tree.zeta
    a_n = math.sqrt(zeta)
    scale = zeta / a_n
    items = sorted(((clocks.gamma[v], v) for v in chords))
    # dynamic process with times gamma_(k)*zeta/a_n; integer-time process
    # jumps at k/a_n with the same chords in clock order.  Truncate both to
    # the events inside the horizon (the k-th chord is the same on both
    # sides, so the alignment is one-to-one on the common prefix).
    horizon = 1.0
    dyn_times = [g * scale for g, _ in items]
    int_times = [(k + 1) / a_n for k in range(len(items))]
    k_star = min(
        sum(1 for t in dyn_times if t <= horizon),
        sum(1 for t in int_times if t <= horizon),
    )
    dyn = LamEventList(
        tuple((dyn_times[k], chords[items[k][1]]) for k in range(k_star))
    )
    integer = LamEventList(
        tuple((int_times[k], chords[items[k][1]]) for k in range(k_star))
    )
    return process_distance(dyn, integer, horizon=float("inf"), tol=1e-3)


def _lamination_experiment(cfg: ExperimentConfig) -> dict:
    medians = []
    rows = []
    for zeta in cfg.zetas:
        dists = [
            lamination_coupling_distance(zeta, Seed(cfg.seeds[0], r))
            for r in range(cfg.replicas)
        ]
        med = float(np.median(dists))
        medians.append(med)
        rows.append({"zeta": zeta, "median": med, "distances": dists})
    passed = all(medians[i + 1] < medians[i] for i in range(len(medians) - 1))
    return {"kind": "lamination", "rows": rows, "medians": medians, "passed": passed}


def run_experiment(cfg: ExperimentConfig, outdir: str | None = None) -> dict:
    """Run the named experiment; if outdir is given, write report.json,
    sample CSVs and matplotlib figures there."""
    if cfg.samples < 1:
        raise TooFewSamples("samples must be >= 1")
    if cfg.kind in ("lukasiewicz", "heights", "fragmentation"):
        result = _ks_experiment(cfg)
    elif cfg.kind == "masses":
        result = _masses_experiment(cfg)
    elif cfg.kind == "lamination":
        result = _lamination_experiment(cfg)
    else:
        raise ValueError(f"unknown experiment kind {cfg.kind!r}")
    from . import __version__

    result["config"] = json.loads(cfg.to_json())
    result["config_hash"] = cfg.hash()
    result["version"] = __version__
    result["tolerances"] = {"p_threshold": cfg.p_threshold}
    if outdir:
        _write_report(cfg, result, outdir)
    return result


def _write_report(cfg: ExperimentConfig, result: dict, outdir: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(outdir, exist_ok=True)
    samples = result.pop("samples", None)
    with open(os.path.join(outdir, "report.json"), "w") as fh:
        json.dump(result, fh, indent=2, sort_keys=True)
    if samples:
        for s, (disc, cont) in samples.items():
            rows = ["discrete,continuum"]
            rows += [f"{repr(float(d))},{repr(float(c))}" for d, c in zip(disc, cont)]
            with open(os.path.join(outdir, f"samples_seed{s}.csv"), "w") as fh:
                fh.write("\n".join(rows) + "\n")
        fig, ax = plt.subplots(figsize=(6, 4))
        s0 = cfg.seeds[0]
        disc, cont = samples[s0]
        for data, label in ((disc, "discrete"), (cont, "continuum")):
            xs = np.sort(data)
            ax.step(xs, np.arange(1, xs.size + 1) / xs.size, label=label, where="post")
        ax.set_xlabel("statistic")
        ax.set_ylabel("empirical CDF")
        ax.set_title(f"{cfg.kind} (seed {s0})")
        ax.legend()
        fig.tight_layout()
        fig.savefig(os.path.join(outdir, f"{cfg.kind}_ecdf.png"), dpi=120)
        plt.close(fig)
        result["samples"] = samples
    if cfg.kind == "lamination":
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(result["config"]["zetas"], result["medians"], marker="o")
        ax.set_xscale("log")
        ax.set_xlabel("zeta")
        ax.set_ylabel("median process distance")
        fig.tight_layout()
        fig.savefig(os.path.join(outdir, "lamination_trend.png"), dpi=120)
        plt.close(fig)
    if cfg.kind == "masses":
        fig, ax = plt.subplots(figsize=(6, 4))
        ts = [r["t"] for r in result["rows"]]
        ax.scatter(ts, [r["deviation"] for r in result["rows"]], label="deviation", s=12)
        ax.scatter(ts, [r["bound"] for r in result["rows"]], label="bound", s=12, marker="x")
        ax.set_xlabel("t")
        ax.legend()
        fig.tight_layout()
        fig.savefig(os.path.join(outdir, "masses_bound.png"), dpi=120)
        plt.close(fig)
