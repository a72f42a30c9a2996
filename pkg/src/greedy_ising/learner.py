"""Greedy neighborhood learning by conditional influence.

For each node ``u`` a pseudo-neighborhood is grown by repeatedly adding the
node of largest empirical influence while that influence reaches ``tau``;
nodes whose influence given the rest of the pseudo-neighborhood falls below
``tau`` are then pruned.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import Graph, IsingModel, SampleSet, compute_constants
from .estimator import CompressedSamples, compress, influence_vector, pair_influence


@dataclass(frozen=True)
class LearnConfig:
    """Learner settings.

    In practical mode ``eps`` defaults to ``tau / 2`` and ``ell_cap`` to
    ``min(floor(2 / (tau - eps)^2), p - 1)`` (resolved by :meth:`resolve`).
    Theoretical mode fills ``tau, eps, ell_cap`` from the worst-case constants
    for ``(alpha, beta, h, d)``.
    """

    tau: float | None = None
    eps: float | None = None
    ell_cap: int | None = None
    mode: str = "practical"
    tie_break: str = "lowest-index"
    reconcile: str = "AND"
    pruning: str = "simultaneous"
    signed: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.mode not in ("practical", "theoretical"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.tie_break != "lowest-index":
            raise ValueError("only the lowest-index tie break is supported")
        if self.reconcile not in ("AND", "OR"):
            raise ValueError(f"reconcile must be AND or OR, got {self.reconcile!r}")
        if self.pruning not in ("simultaneous", "sequential"):
            raise ValueError(f"unknown pruning policy {self.pruning!r}")
        if self.mode == "practical":
            if self.tau is None or self.tau <= 0:
                raise ValueError("practical mode needs a threshold tau > 0")
            if self.eps is not None and not 0 < self.eps < self.tau:
                raise ValueError(f"eps must lie in (0, tau), got {self.eps}")
        if self.ell_cap is not None and self.ell_cap < 1:
            raise ValueError("ell_cap must be a positive integer")

    @classmethod
    def theoretical(cls, alpha: float, beta: float, h: float, d: int, **kw) -> "LearnConfig":
        c = compute_constants(alpha, beta, h, d)
        return cls(tau=c.tau_star, eps=c.eps_star, ell_cap=c.ell_cap, mode="theoretical", **kw)

    def resolve(self, p: int) -> "LearnConfig":
        """Fill defaulted ``eps`` and ``ell_cap`` for a ``p``-node problem."""
        if self.tau is None:
            raise ValueError("tau is unset; use LearnConfig.theoretical(...) or pass tau")
        eps = self.tau / 2 if self.eps is None else self.eps
        cap = self.ell_cap
        if cap is None:
            bound = 2.0 / (self.tau - eps) ** 2
            cap = min(int(math.floor(bound)) if bound < 2 ** 62 else 2 ** 62, p - 1)
        cap = max(min(cap, max(p - 1, 0)), 0)
        return LearnConfig(tau=self.tau, eps=eps, ell_cap=cap, mode=self.mode,
                           tie_break=self.tie_break, reconcile=self.reconcile,
                           pruning=self.pruning, signed=self.signed, workers=self.workers)

    def size_bound(self) -> float:
        """``2 / (tau - eps)^2``, the cardinality bound for the grown set."""
        eps = self.tau / 2 if self.eps is None else self.eps
        return 2.0 / (self.tau - eps) ** 2


@dataclass
class NbhdTrace:
    u: int
    added: list[tuple[int, float]] = field(default_factory=list)
    pruned: list[tuple[int, float]] = field(default_factory=list)
    final: frozenset[int] = frozenset()
    terminated_by: str = "threshold"
    pruning_values: list[tuple[int, float]] = field(default_factory=list)

    @property
    def pseudo_neighborhood(self) -> list[int]:
        return [j for j, _ in self.added]

    def to_dict(self) -> dict:
        return {
            "u": self.u,
            "added": [[j, v] for j, v in self.added],
            "pruned": [[j, v] for j, v in self.pruned],
            "pruning_values": [[j, v] for j, v in self.pruning_values],
            "final": sorted(self.final),
            "terminated_by": self.terminated_by,
        }


def _argmax_lowest(values: np.ndarray) -> int:
    # np.argmax returns the first maximal index
    return int(np.argmax(values))


def learn_neighborhood(samples: SampleSet | CompressedSamples, u: int,
                       cfg: LearnConfig) -> NbhdTrace:
    data = compress(samples)
    p = data.p
    if not 0 <= u < p:
        raise ValueError(f"node {u} out of range for p={p}")
    cfg = cfg.resolve(p)
    trace = NbhdTrace(u)
    S: list[int] = []
    while True:
        if len(S) >= cfg.ell_cap:
            # cap hit with candidates left above tau is recorded as a cap stop
            if len(S) < p - 1:
                vals = influence_vector(data, u, S, cfg.signed)
                if vals.max(initial=0.0) >= cfg.tau:
                    trace.terminated_by = "cap"
            break
        vals = influence_vector(data, u, S, cfg.signed)
        best = _argmax_lowest(vals)
        eta = float(vals[best])
        if eta < cfg.tau or best == u or best in S:
            break
        S.append(best)
        trace.added.append((best, eta))

    if cfg.pruning == "simultaneous":
        keep = []
        for i in S:
            rest = [j for j in S if j != i]
            v = pair_influence(data, u, i, rest, cfg.signed)
            trace.pruning_values.append((i, v))
            if v < cfg.tau:
                trace.pruned.append((i, v))
            else:
                keep.append(i)
    else:
        keep = list(S)
        for i in S:
            rest = [j for j in keep if j != i]
            v = pair_influence(data, u, i, rest, cfg.signed)
            trace.pruning_values.append((i, v))
            if v < cfg.tau:
                trace.pruned.append((i, v))
                keep.remove(i)
    trace.final = frozenset(keep)
    return trace


def reconcile(traces: list[NbhdTrace], p: int, rule: str = "AND") -> Graph:
    final = {t.u: t.final for t in traces}
    edges = set()
    for u in range(p):
        for v in final.get(u, ()):
            if v == u:
                continue
            other = v in final.get(u, ()) and u in final.get(v, ())
            if rule == "OR" or other:
                edges.add((min(u, v), max(u, v)))
    return Graph(p, frozenset(edges))


def edge_metrics(learned: Graph, reference: Graph | None) -> dict:
    if reference is None:
        return {"exact_recovery": None, "edge_fp": None, "edge_fn": None, "hamming": None}
    fp = len(learned.edges - reference.edges)
    fn = len(reference.edges - learned.edges)
    return {"exact_recovery": fp == 0 and fn == 0, "edge_fp": fp, "edge_fn": fn,
            "hamming": fp + fn}


@dataclass
class RecoveryReport:
    learned: Graph
    traces: list[NbhdTrace]
    metrics: dict
    timing: dict
    method: str = "learn_nbhd"
    config: dict = field(default_factory=dict)

    def to_dict(self, include_timing: bool = True) -> dict:
        from .io import FORMAT_VERSION
        out = {
            "format_version": FORMAT_VERSION,
            "method": self.method,
            "config": self.config,
            "p": self.learned.p,
            "edges": [list(e) for e in self.learned.sorted_edges()],
            "traces": [t.to_dict() for t in self.traces],
            "metrics": self.metrics,
        }
        if include_timing:
            out["timing"] = self.timing
        return out

    def edges_csv(self) -> str:
        lines = ["i,j"] + [f"{i},{j}" for i, j in self.learned.sorted_edges()]
        return "\n".join(lines) + "\n"


def learn_graph(samples: SampleSet | CompressedSamples, cfg: LearnConfig,
                reference: Graph | IsingModel | None = None) -> RecoveryReport:
    """Learn every neighborhood and assemble the graph under ``cfg.reconcile``."""
    t0 = time.perf_counter()
    data = compress(samples)
    t1 = time.perf_counter()
    p = data.p
    resolved = cfg.resolve(p)
    if resolved.workers > 1:
        with ThreadPoolExecutor(resolved.workers) as pool:
            traces = list(pool.map(lambda u: learn_neighborhood(data, u, resolved), range(p)))
    else:
        traces = [learn_neighborhood(data, u, resolved) for u in range(p)]
    t2 = time.perf_counter()
    learned = reconcile(traces, p, resolved.reconcile)
    if isinstance(reference, IsingModel):
        reference = reference.graph
    if data.n == 0:
        learned = Graph(p)
    metrics = edge_metrics(learned, reference)
    metrics["cap_hits"] = sum(t.terminated_by == "cap" for t in traces)
    timing = {"compress_s": t1 - t0, "learn_s": t2 - t1, "total_s": time.perf_counter() - t0}
    config = {"tau": resolved.tau, "eps": resolved.eps, "ell_cap": resolved.ell_cap,
              "mode": resolved.mode, "reconcile": resolved.reconcile,
              "pruning": resolved.pruning, "signed": resolved.signed, "n": data.n}
    return RecoveryReport(learned, traces, metrics, timing, config=config)


def mi_increment_audit(model_or_table, trace: NbhdTrace) -> list[float]:
    """Exact ``I(X_u; X_{j_k} | X_{j_1..j_{k-1}})`` (nats) for each greedy addition."""
    from .exact import JointTable, build_joint, exact_conditional_mi

    table = model_or_table if isinstance(model_or_table, JointTable) else build_joint(model_or_table)
    out = []
    prefix: list[int] = []
    for j, _ in trace.added:
        out.append(exact_conditional_mi(table, trace.u, j, prefix))
        prefix.append(j)
    return out
