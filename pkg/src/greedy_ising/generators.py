"""Graph families and parameter draws for synthetic models."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import networkx as nx
import numpy as np

from .core import Graph, IsingModel, validate_model

FAMILIES = ("tree", "path", "star", "cycle", "grid", "random-regular", "erdos-capped")
SIGNS = ("ferro", "anti", "random")


class InfeasibleFamily(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    p: int
    d: int = 3
    sign: str = "ferro"
    alpha: float = 0.5
    beta: float = 0.5
    h: float = 0.0
    rows: int | None = None
    edge_prob: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InfeasibleFamily(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.sign not in SIGNS:
            raise InfeasibleFamily(f"unknown sign policy {self.sign!r}")
        if self.p < 2:
            raise InfeasibleFamily("p must be >= 2")
        if not 0 < self.alpha <= self.beta or self.h < 0:
            raise InfeasibleFamily("need 0 < alpha <= beta and h >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


def _tree_edges(p: int, d: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    if d < 2 and p > 2:
        raise InfeasibleFamily(f"a tree on {p} nodes needs d >= 2")
    deg = np.zeros(p, dtype=int)
    edges = []
    for v in range(1, p):
        open_nodes = np.flatnonzero(deg[:v] < d)
        parent = int(rng.choice(open_nodes))
        edges.append((parent, v))
        deg[parent] += 1
        deg[v] += 1
    return edges


def graph_edges(spec: GeneratorSpec, rng: np.random.Generator) -> list[tuple[int, int]]:
    p, d = spec.p, spec.d
    fam = spec.family
    if fam == "tree":
        return _tree_edges(p, d, rng)
    if fam == "path":
        if d < 2 and p > 2:
            raise InfeasibleFamily("a path needs d >= 2")
        return [(k, k + 1) for k in range(p - 1)]
    if fam == "star":
        if d < p - 1:
            raise InfeasibleFamily(f"a star on {p} nodes has degree {p - 1} > d={d}")
        return [(0, k) for k in range(1, p)]
    if fam == "cycle":
        if p < 3 or d < 2:
            raise InfeasibleFamily("a cycle needs p >= 3 and d >= 2")
        return [(k, (k + 1) % p) for k in range(p)]
    if fam == "grid":
        rows = spec.rows
        if rows is None:
            rows = max(r for r in range(1, int(np.sqrt(p)) + 1) if p % r == 0)
        if p % rows:
            raise InfeasibleFamily(f"grid rows={rows} does not divide p={p}")
        g = nx.grid_2d_graph(rows, p // rows)
        if max((deg for _, deg in g.degree()), default=0) > d:
            raise InfeasibleFamily(f"{rows}x{p // rows} grid has degree above d={d}")
        index = {node: k for k, node in enumerate(sorted(g.nodes()))}
        return [(index[a], index[b]) for a, b in g.edges()]
    if fam == "random-regular":
        if p * d % 2 or d >= p:
            raise InfeasibleFamily(f"no {d}-regular graph on {p} nodes (need p*d even, d < p)")
        g = nx.random_regular_graph(d, p, seed=int(rng.integers(2 ** 31)))
        return list(g.edges())
    # erdos-capped: G(p, q) then drop edges that would push a degree above d
    q = spec.edge_prob if spec.edge_prob is not None else min(1.0, d / max(p - 1, 1))
    deg = np.zeros(p, dtype=int)
    edges = []
    for i in range(p):
        for j in range(i + 1, p):
            if rng.random() < q and deg[i] < d and deg[j] < d:
                edges.append((i, j))
                deg[i] += 1
                deg[j] += 1
    return edges


def draw_parameters(edges, p: int, sign: str, alpha: float, beta: float, h: float,
                    rng: np.random.Generator) -> tuple[dict, list[float]]:
    couplings = {}
    for i, j in sorted((min(a, b), max(a, b)) for a, b in edges):
        mag = alpha if alpha == beta else float(rng.uniform(alpha, beta))
        if sign == "ferro":
            s = 1.0
        elif sign == "anti":
            s = -1.0
        else:
            s = 1.0 if rng.random() < 0.5 else -1.0
        couplings[(i, j)] = s * mag
    fields = [0.0] * p if h == 0 else [float(v) for v in rng.uniform(-h, h, size=p)]
    return couplings, fields


def generate_model(spec: GeneratorSpec, seed=None) -> IsingModel:
    rng = np.random.default_rng(seed)
    edges = graph_edges(spec, rng)
    graph = Graph.from_edges(spec.p, edges)
    couplings, fields = draw_parameters(graph.edges, spec.p, spec.sign, spec.alpha,
                                        spec.beta, spec.h, rng)
    model = IsingModel(graph, couplings, tuple(fields), spec.alpha, spec.beta, spec.h,
                       d=max(spec.d, 1))
    problems = validate_model(model)
    if problems:
        raise InfeasibleFamily("; ".join(problems))
    return model


def random_parameters(graph: Graph, alpha: float, beta: float, h: float, seed=None,
                      sign: str = "random") -> IsingModel:
    """Model on a fixed graph with ``|theta| ~ U[alpha, beta]`` and fields ``~ U[-h, h]``."""
    rng = np.random.default_rng(seed)
    couplings, fields = draw_parameters(graph.edges, graph.p, sign, alpha, beta, h, rng)
    return IsingModel(graph, couplings, tuple(fields), alpha, beta, h,
                      d=max(graph.max_degree, 1))
