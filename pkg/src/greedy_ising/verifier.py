"""Exact certification of structural influence properties on small models.

Every check enumerates its full quantifier scope with the exact engine, so
no sampling noise is involved; a tolerance only absorbs rounding.
"""

from __future__ import annotations

import itertools
import math
import time
import zlib
from dataclasses import dataclass, field
from typing import Iterator

import networkx as nx
import numpy as np

from .core import Graph, IsingModel, compute_constants
from .exact import (ENUMERATION_CAP, JointTable, build_joint, conditional_plus_table,
                    exact_conditional_mi, exact_influence)
from .generators import random_parameters

TOL = 1e-12
FULL_SUBSET_MAX_P = 12


class InfeasibleScope(ValueError):
    def __init__(self, message: str, estimated_queries: int):
        super().__init__(message)
        self.estimated_queries = estimated_queries


@dataclass
class CheckResult:
    property: str
    scope: str
    instances: int
    worst_slack: float
    passed: bool
    witness: dict | None = None

    def to_dict(self) -> dict:
        return {"property": self.property, "scope": self.scope, "instances": self.instances,
                "worst_slack": self.worst_slack, "passed": self.passed, "witness": self.witness}


@dataclass
class PropertyReport:
    model_id: str
    checks: list[CheckResult] = field(default_factory=list)
    runtime_s: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self, include_timing: bool = True) -> dict:
        from .io import FORMAT_VERSION
        out = {"format_version": FORMAT_VERSION, "model_id": self.model_id,
               "passed": self.passed, "checks": [c.to_dict() for c in self.checks]}
        if include_timing:
            out["runtime_s"] = self.runtime_s
        return out

    def summary(self) -> str:
        lines = [f"model {self.model_id}",
                 f"{'property':<26} {'instances':>9} {'worst slack':>14}  result"]
        for c in self.checks:
            lines.append(f"{c.property:<26} {c.instances:>9d} {c.worst_slack:>14.6e}  "
                         f"{'pass' if c.passed else 'FAIL'}")
        return "\n".join(lines)


def subsets(nodes, max_size: int | None = None) -> Iterator[tuple[int, ...]]:
    """All subsets by ascending size, lexicographic within a size."""
    nodes = sorted(nodes)
    top = len(nodes) if max_size is None else min(max_size, len(nodes))
    for k in range(top + 1):
        yield from itertools.combinations(nodes, k)


def _scope(model: IsingModel, subset_cap: int | None) -> None:
    p = model.p
    if p > ENUMERATION_CAP:
        raise InfeasibleScope(f"p={p} exceeds the enumeration cap {ENUMERATION_CAP}", 2 ** p)
    if subset_cap is None and p > FULL_SUBSET_MAX_P:
        cost = p * p * 2 ** (p - 1)
        raise InfeasibleScope(
            f"full subset enumeration at p={p} needs ~{cost} exact queries; pass subset_cap", cost)


def _table(model: IsingModel, table: JointTable | None) -> JointTable:
    return table if table is not None else build_joint(model)


def _model_id(model: IsingModel) -> str:
    return f"p{model.p}-e{len(model.graph)}"


def check_structural_property(model: IsingModel, table: JointTable,
                              subset_cap: int | None = None) -> CheckResult:
    bound = 2 * compute_constants(model.alpha, model.beta, model.h, model.d).tau_star
    worst, witness, count = math.inf, None, 0
    for u in range(model.p):
        nbrs = model.neighbors(u)
        for S in subsets(set(range(model.p)) - {u}, subset_cap):
            missing = sorted(nbrs - set(S))
            if not missing:
                continue
            best = max(exact_influence(table, u, i, S) for i in missing)
            count += 1
            slack = best - bound
            if slack < worst:
                worst = slack
                witness = {"u": u, "S": list(S), "max_influence": best, "bound": bound}
    if count == 0:
        worst = 0.0
    return CheckResult("structural_lower_bound", f"|S|<={subset_cap or 'all'}", count, worst,
                       worst >= -TOL, witness)


def check_markov_zero(model: IsingModel, table: JointTable) -> CheckResult:
    worst, witness, count = math.inf, None, 0
    p = model.p
    for u in range(p):
        nbrs = model.neighbors(u)
        rest = set(range(p)) - {u} - nbrs
        for extra in subsets(rest):
            S = tuple(sorted(nbrs | set(extra)))
            for i in sorted(rest - set(extra)):
                v = exact_influence(table, u, i, S)
                count += 1
                slack = TOL - abs(v)
                if slack < worst:
                    worst = slack
                    witness = {"u": u, "i": i, "S": list(S), "influence": v}
    if count == 0:
        worst = TOL
    return CheckResult("markov_zero_influence", "S >= nbhd(u)", count, worst, worst >= 0, witness)


def check_influence_mi(model: IsingModel, table: JointTable,
                       subset_cap: int | None = None) -> CheckResult:
    worst, witness, count = math.inf, None, 0
    p = model.p
    for u in range(p):
        for i in range(p):
            if i == u:
                continue
            for S in subsets(set(range(p)) - {u, i}, subset_cap):
                nu = exact_influence(table, u, i, S)
                mi = exact_conditional_mi(table, u, i, S)
                count += 1
                slack = mi - 0.5 * nu * nu
                if slack < worst:
                    worst = slack
                    witness = {"u": u, "i": i, "S": list(S), "mi": mi, "influence": nu}
    return CheckResult("influence_mi_inequality", f"|S|<={subset_cap or 'all'}", count, worst,
                       worst >= -TOL, witness)


def check_conditional_randomness(model: IsingModel, table: JointTable,
                                 subset_cap: int | None = None) -> CheckResult:
    delta = compute_constants(model.alpha, model.beta, model.h, model.d).delta
    worst, witness, count = math.inf, None, 0
    p = model.p
    for u in range(p):
        for S in subsets(set(range(p)) - {u}, subset_cap):
            plus = conditional_plus_table(table, u, S)
            low = np.minimum(plus, 1.0 - plus)
            k = int(np.argmin(low))
            count += low.size
            slack = float(low[k]) - delta
            if slack < worst:
                worst = slack
                witness = {"u": u, "S": list(S), "config_index": k, "min_prob": float(low[k]),
                           "delta": delta}
    return CheckResult("conditional_randomness", f"|S|<={subset_cap or 'all'}", count, worst,
                       worst >= -TOL, witness)


def _run(model, checks, model_id, table=None) -> PropertyReport:
    start = time.perf_counter()
    table = _table(model, table)
    report = PropertyReport(model_id or _model_id(model))
    for check in checks:
        report.checks.append(check(model, table))
    report.runtime_s = time.perf_counter() - start
    return report


def verify_structural_property(model: IsingModel, subset_cap: int | None = None,
                               model_id: str | None = None,
                               table: JointTable | None = None) -> PropertyReport:
    """Check that some missing neighbor keeps influence at least ``2 tau*`` for every
    ``(u, S)`` with ``S`` not covering the neighborhood of ``u``."""
    _scope(model, subset_cap)
    return _run(model, [lambda m, t: check_structural_property(m, t, subset_cap)], model_id, table)


def verify_markov_zero(model: IsingModel, model_id: str | None = None,
                       table: JointTable | None = None) -> PropertyReport:
    _scope(model, None)
    return _run(model, [check_markov_zero], model_id, table)


def verify_influence_mi(model: IsingModel, subset_cap: int | None = None,
                        model_id: str | None = None,
                        table: JointTable | None = None) -> PropertyReport:
    _scope(model, subset_cap)
    return _run(model, [lambda m, t: check_influence_mi(m, t, subset_cap)], model_id, table)


def verify_conditional_randomness(model: IsingModel, subset_cap: int | None = None,
                                  model_id: str | None = None,
                                  table: JointTable | None = None) -> PropertyReport:
    _scope(model, subset_cap)
    return _run(model, [lambda m, t: check_conditional_randomness(m, t, subset_cap)],
                model_id, table)


def verify_all(model: IsingModel, subset_cap: int | None = None,
               model_id: str | None = None) -> PropertyReport:
    _scope(model, subset_cap)
    return _run(model, [
        lambda m, t: check_structural_property(m, t, subset_cap),
        check_markov_zero,
        lambda m, t: check_influence_mi(m, t, subset_cap),
        lambda m, t: check_conditional_randomness(m, t, subset_cap),
    ], model_id)


SUITE_SETTINGS = ((0.3, 0.3, 0.0), (0.5, 1.0, 0.2))


def suite_graphs() -> list[tuple[str, Graph]]:
    """Connected graphs on 3-5 nodes with degree <= 3 (one per isomorphism class),
    plus cycles, paths and stars on 6 and 8 nodes."""
    out = []
    for k, g in enumerate(nx.graph_atlas_g()):
        n = g.number_of_nodes()
        if n < 3:
            continue
        if n > 5:
            break
        if nx.is_connected(g) and max(dict(g.degree()).values()) <= 3:
            out.append((f"atlas{k}", Graph.from_edges(n, g.edges())))
    for p in (6, 8):
        out.append((f"cycle{p}", Graph.from_edges(p, [(k, (k + 1) % p) for k in range(p)])))
        out.append((f"path{p}", Graph.from_edges(p, [(k, k + 1) for k in range(p - 1)])))
        out.append((f"star{p}", Graph.from_edges(p, [(0, k) for k in range(1, p)])))
    return out


def verifier_suite(seeds: int = 20, settings=SUITE_SETTINGS) -> Iterator[tuple[str, IsingModel]]:
    """Randomized models: for each suite graph, setting and seed, couplings with
    random signs and magnitudes in ``[alpha, beta]``, fields in ``[-h, h]``."""
    for name, graph in suite_graphs():
        for alpha, beta, h in settings:
            for seed in range(seeds):
                ss = np.random.SeedSequence([seed, zlib.crc32(name.encode()), int(alpha * 1000),
                                             int(beta * 1000), int(h * 1000)])
                yield (f"{name}-a{alpha}-b{beta}-h{h}-s{seed}",
                       random_parameters(graph, alpha, beta, h, seed=ss))
