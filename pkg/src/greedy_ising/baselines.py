"""Reference structure learners: exhaustive neighborhood search and Chow-Liu trees."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Graph, IsingModel, SampleSet
from .estimator import CompressedSamples, compress, influence_vector
from .exact import JointTable, exact_influence
from .learner import NbhdTrace, RecoveryReport, edge_metrics, reconcile


class WorkGuardError(ValueError):
    def __init__(self, message: str, estimated_scans: int):
        super().__init__(message)
        self.estimated_scans = estimated_scans


@dataclass(frozen=True)
class BaselineConfig:
    method: str = "exhaustive"
    d_max: int = 3
    indep_eps: float = 0.05
    reconcile: str = "AND"
    max_p: int = 64
    max_d: int = 3

    def __post_init__(self):
        if self.method not in ("exhaustive", "chow-liu"):
            raise ValueError(f"unknown baseline {self.method!r}")
        if self.d_max < 1:
            raise ValueError("d_max must be >= 1")
        if self.indep_eps <= 0:
            raise ValueError("indep_eps must be positive")


def exhaustive_cost(p: int, d_max: int) -> int:
    """Worst-case number of influence scans: every node times every candidate set."""
    return p * sum(math.comb(p - 1, k) for k in range(d_max + 1))


def _exhaustive(p: int, scan: Callable[[int, tuple[int, ...]], np.ndarray],
                cfg: BaselineConfig) -> list[NbhdTrace]:
    traces = []
    for u in range(p):
        others = [v for v in range(p) if v != u]
        chosen, best = None, (math.inf, ())
        for size in range(min(cfg.d_max, len(others)) + 1):
            for C in itertools.combinations(others, size):
                worst = float(scan(u, C).max(initial=0.0))
                if worst <= cfg.indep_eps:
                    chosen = C
                    break
                if worst < best[0]:
                    best = (worst, C)
            if chosen is not None:
                break
        trace = NbhdTrace(u)
        if chosen is None:
            # no candidate passes; fall back to the least dependent one
            chosen = best[1]
            trace.terminated_by = "fallback"
        else:
            trace.terminated_by = "independent"
        trace.final = frozenset(chosen)
        traces.append(trace)
    return traces


def _report(traces, p, cfg, reference, method, started, n) -> RecoveryReport:
    learned = reconcile(traces, p, cfg.reconcile)
    if isinstance(reference, IsingModel):
        reference = reference.graph
    elapsed = time.perf_counter() - started
    return RecoveryReport(learned, traces, edge_metrics(learned, reference),
                          {"learn_s": elapsed, "total_s": elapsed}, method=method,
                          config={"d_max": cfg.d_max, "indep_eps": cfg.indep_eps,
                                  "reconcile": cfg.reconcile, "n": n})


def exhaustive_learn(samples: SampleSet | CompressedSamples, cfg: BaselineConfig | None = None,
                     reference: Graph | IsingModel | None = None) -> RecoveryReport:
    """For each node pick the smallest (then lexicographically first) set ``C``
    with ``|C| <= d_max`` that leaves every other node's influence at most ``indep_eps``."""
    cfg = cfg or BaselineConfig()
    started = time.perf_counter()
    data = compress(samples)
    p = data.p
    if p > cfg.max_p or cfg.d_max > cfg.max_d:
        cost = exhaustive_cost(p, cfg.d_max)
        raise WorkGuardError(
            f"exhaustive search with p={p}, d_max={cfg.d_max} needs up to {cost} scans "
            f"(guard: p <= {cfg.max_p}, d_max <= {cfg.max_d})", cost)
    if data.n == 0:
        traces = [NbhdTrace(u, terminated_by="independent") for u in range(p)]
        return _report(traces, p, cfg, reference, "exhaustive", started, 0)
    traces = _exhaustive(p, lambda u, C: influence_vector(data, u, C), cfg)
    return _report(traces, p, cfg, reference, "exhaustive", started, data.n)


def exhaustive_learn_exact(table: JointTable, cfg: BaselineConfig | None = None,
                           reference: Graph | IsingModel | None = None) -> RecoveryReport:
    """Noise-free variant: exact influences replace the empirical ones."""
    cfg = cfg or BaselineConfig()
    started = time.perf_counter()
    p = table.p

    def scan(u, C):
        out = np.zeros(p)
        for i in range(p):
            if i != u and i not in C:
                out[i] = exact_influence(table, u, i, C)
        return out

    return _report(_exhaustive(p, scan, cfg), p, cfg, reference, "exhaustive-exact", started, None)


def pairwise_mutual_information(samples: SampleSet | CompressedSamples) -> np.ndarray:
    """Plug-in mutual information (nats) between every pair of spins, with ``0 log 0 = 0``."""
    data = compress(samples)
    p, n = data.p, data.n
    if n == 0:
        raise ValueError("need at least one sample")
    B = (data.rows > 0).astype(np.float64)
    w = data.counts.astype(np.float64)
    WB = B * w[:, None]
    n11 = B.T @ WB
    n1 = WB.sum(axis=0)
    n10 = n1[:, None] - n11
    n01 = n1[None, :] - n11
    n00 = n - n1[:, None] - n1[None, :] + n11
    a1 = n1[:, None]
    b1 = n1[None, :]
    mi = np.zeros((p, p))
    for cell, ra, rb in ((n11, a1, b1), (n10, a1, n - b1), (n01, n - a1, b1),
                         (n00, n - a1, n - b1)):
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where(cell > 0, cell / n * np.log(cell * n / (ra * rb)), 0.0)
        mi += term
    np.fill_diagonal(mi, 0.0)
    return np.maximum(mi, 0.0)


def maximum_spanning_tree(p: int, weights: np.ndarray) -> Graph:
    """Kruskal on ``weights``; equal weights are taken in lexicographic edge order."""
    parent = list(range(p))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    order = sorted(((-weights[i, j], i, j) for i in range(p) for j in range(i + 1, p)))
    edges = []
    for _, i, j in order:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))
            if len(edges) == p - 1:
                break
    return Graph(p, frozenset(edges))


def chow_liu(samples: SampleSet | CompressedSamples) -> Graph:
    data = compress(samples)
    return maximum_spanning_tree(data.p, pairwise_mutual_information(data))


def chow_liu_report(samples: SampleSet | CompressedSamples,
                    reference: Graph | IsingModel | None = None) -> RecoveryReport:
    started = time.perf_counter()
    data = compress(samples)
    tree = chow_liu(data)
    traces = [NbhdTrace(u, final=tree.neighbors(u), terminated_by="tree") for u in range(data.p)]
    cfg = BaselineConfig(method="chow-liu")
    report = _report(traces, data.p, cfg, reference, "chow-liu", started, data.n)
    report.config = {"n": data.n}
    return report
