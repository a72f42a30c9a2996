"""Domain types for pairwise binary (Ising) models and closed-form constants.

Spins are encoded as -1/+1 throughout. Sample matrices are stored as int8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

# Saturation value for sample-size formulas whose result is not representable.
MAX_SAMPLES = np.iinfo(np.int64).max


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a formula."""


def _edge(i: int, j: int) -> tuple[int, int]:
    i, j = int(i), int(j)
    if i == j:
        raise ValueError(f"self-loop at node {i}")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes ``0..p-1``."""

    p: int
    edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"p must be positive, got {self.p}")
        normalized = set()
        for i, j in self.edges:
            e = _edge(i, j)
            if not (0 <= e[0] and e[1] < self.p):
                raise ValueError(f"edge {e} out of range for p={self.p}")
            normalized.add(e)
        object.__setattr__(self, "edges", frozenset(normalized))

    @classmethod
    def from_edges(cls, p: int, edges: Iterable[Sequence[int]]) -> "Graph":
        edge_list = [tuple(e) for e in edges]
        seen = set()
        for i, j in edge_list:
            e = _edge(i, j)
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
        return cls(p, frozenset(seen))

    def neighbors(self, u: int) -> frozenset[int]:
        return frozenset(j if i == u else i for i, j in self.edges if u in (i, j))

    def degree(self, u: int) -> int:
        return sum(1 for e in self.edges if u in e)

    @property
    def max_degree(self) -> int:
        if not self.edges:
            return 0
        deg = np.zeros(self.p, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return int(deg.max())

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class IsingModel:
    """Ising model ``P(x) ~ exp(sum theta_ij x_i x_j + sum theta_i x_i)``.

    ``couplings`` maps normalized edges ``(i, j)`` with ``i < j`` to their
    coupling. The bounds ``alpha, beta, h, d`` describe the parameter class
    the model is claimed to belong to; :func:`validate_model` checks the claim.
    """

    graph: Graph
    couplings: Mapping[tuple[int, int], float]
    fields: tuple[float, ...]
    alpha: float
    beta: float
    h: float = 0.0
    d: int | None = None

    def __post_init__(self):
        cpl = {_edge(i, j): float(v) for (i, j), v in dict(self.couplings).items()}
        object.__setattr__(self, "couplings", cpl)
        object.__setattr__(self, "fields", tuple(float(f) for f in self.fields))
        if len(self.fields) != self.graph.p:
            raise ValueError(
                f"expected {self.graph.p} fields, got {len(self.fields)}")
        if not 0 < self.alpha <= self.beta:
            raise ValueError(f"need 0 < alpha <= beta, got {self.alpha}, {self.beta}")
        if self.h < 0:
            raise ValueError(f"h must be nonnegative, got {self.h}")
        if self.d is None:
            object.__setattr__(self, "d", max(self.graph.max_degree, 1))

    @property
    def p(self) -> int:
        return self.graph.p

    @classmethod
    def uniform(cls, graph: Graph, theta: float, h: float = 0.0,
                fields: Sequence[float] | None = None, d: int | None = None) -> "IsingModel":
        """Model with the same coupling ``theta`` on every edge and ``alpha = beta = |theta|``."""
        if fields is None:
            fields = [0.0] * graph.p
        mag = abs(theta) if theta != 0 else 1.0
        return cls(graph, {e: theta for e in graph.edges}, tuple(fields),
                   alpha=mag, beta=mag, h=h, d=d)

    def coupling_matrix(self) -> np.ndarray:
        J = np.zeros((self.p, self.p))
        for (i, j), v in self.couplings.items():
            J[i, j] = J[j, i] = v
        return J

    def field_vector(self) -> np.ndarray:
        return np.asarray(self.fields, dtype=float)

    def neighbors(self, u: int) -> frozenset[int]:
        return self.graph.neighbors(u)

    def relabel(self, perm: Sequence[int]) -> "IsingModel":
        """Return the model with node ``k`` renamed to ``perm[k]``."""
        perm = list(perm)
        edges = frozenset(_edge(perm[i], perm[j]) for i, j in self.graph.edges)
        cpl = {_edge(perm[i], perm[j]): v for (i, j), v in self.couplings.items()}
        fields = [0.0] * self.p
        for k, f in enumerate(self.fields):
            fields[perm[k]] = f
        return IsingModel(Graph(self.p, edges), cpl, tuple(fields),
                          self.alpha, self.beta, self.h, self.d)


def validate_model(model: IsingModel) -> list[str]:
    """Return every violation of the model's declared parameter class.

    An empty list means the couplings lie in ``[alpha, beta]`` in magnitude on
    edges and vanish elsewhere, fields are bounded by ``h`` and no node exceeds
    the degree bound ``d``.
    """
    violations = []
    edges = model.graph.edges
    for e in sorted(set(model.couplings) | set(edges)):
        theta = model.couplings.get(e, 0.0)
        if e not in edges:
            if theta != 0.0:
                violations.append(f"non-edge {e}: coupling {theta} != 0")
            continue
        mag = abs(theta)
        if mag < model.alpha:
            violations.append(f"edge {e}: |theta|={mag:g} < alpha={model.alpha:g}")
        if mag > model.beta:
            violations.append(f"edge {e}: |theta|={mag:g} > beta={model.beta:g}")
    for i, f in enumerate(model.fields):
        if abs(f) > model.h:
            violations.append(f"node {i}: |field|={abs(f):g} > h={model.h:g}")
    for u in range(model.p):
        deg = model.graph.degree(u)
        if deg > model.d:
            violations.append(f"node {u} degree {deg} > d={model.d}")
    return violations


@dataclass(frozen=True)
class TheoryConstants:
    delta: float
    tau_star: float
    eps_star: float
    ell_star: float
    d: int
    log_tau_star: float = field(default=float("nan"), repr=False)

    @property
    def ell_cap(self) -> int:
        """Integer cardinality cap ``floor(ell_star)``, saturating on overflow."""
        if not math.isfinite(self.ell_star) or self.ell_star >= MAX_SAMPLES:
            return int(MAX_SAMPLES)
        return int(math.floor(self.ell_star))


def compute_constants(alpha: float, beta: float, h: float, d: int) -> TheoryConstants:
    """Threshold, accuracy and size-cap constants of the greedy learner.

    ``delta^(4d+1)`` underflows quickly, so ``tau*`` is assembled in log space.
    """
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    if alpha <= 0 or alpha > beta:
        raise DomainError(f"need 0 < alpha <= beta, got alpha={alpha}, beta={beta}")
    if h < 0:
        raise DomainError(f"h must be nonnegative, got {h}")
    log_delta = math.log(0.5) - 2.0 * (beta * d + h)
    log_tau = 2 * math.log(alpha) + (4 * d + 1) * log_delta - math.log(16 * d * beta)
    tau = math.exp(log_tau)
    # 8 / tau^2 overflows to inf for tiny tau; inf is the honest value there
    log_ell = math.log(8.0) - 2 * log_tau
    ell = math.exp(log_ell) if log_ell < 709.0 else math.inf
    return TheoryConstants(delta=math.exp(log_delta), tau_star=tau, eps_star=tau / 2,
                           ell_star=ell, d=d, log_tau_star=log_tau)


@dataclass(frozen=True)
class SampleBound:
    value: int
    overflow: bool
    log_value: float

    def __int__(self) -> int:
        return self.value


def required_samples_upper(ell: float, eps: float, delta: float, p: int,
                           zeta: float) -> SampleBound:
    """Sufficient sample count ``144(l+3) / (eps^2 delta^(2l)) * ln(p/zeta)``.

    Evaluated in log space; when the ceiling does not fit in an int64 the
    result carries ``overflow=True`` and ``value == MAX_SAMPLES``.
    """
    if ell < 0:
        raise DomainError(f"ell must be >= 0, got {ell}")
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if not 0 < delta <= 0.5:
        raise DomainError(f"delta must lie in (0, 1/2], got {delta}")
    if p < 2:
        raise DomainError(f"p must be >= 2, got {p}")
    if not 0 < zeta < 1:
        raise DomainError(f"zeta must lie in (0, 1), got {zeta}")
    if math.isinf(ell):
        return SampleBound(int(MAX_SAMPLES), True, math.inf)
    log_n = (math.log(144.0) + math.log(ell + 3) - 2 * math.log(eps)
             - 2 * ell * math.log(delta) + math.log(math.log(p / zeta)))
    if log_n >= math.log(MAX_SAMPLES):
        return SampleBound(int(MAX_SAMPLES), True, log_n)
    n = 144.0 * (ell + 3) / (eps ** 2 * delta ** (2 * ell)) * math.log(p / zeta)
    return SampleBound(int(math.ceil(n)), False, log_n)


def sample_lower_bound(alpha: float, beta: float, d: int, p: int) -> float:
    """Information-theoretic necessary sample count ``e^(beta d) ln(pd/4 - 1) / (4 alpha d e^alpha)``."""
    if p * d <= 8:
        raise DomainError(f"need p*d > 8 for a positive logarithm, got p*d={p * d}")
    if alpha <= 0 or d < 1:
        raise DomainError("need alpha > 0 and d >= 1")
    return math.exp(beta * d) * math.log(p * d / 4 - 1) / (4 * alpha * d * math.exp(alpha))


@dataclass(frozen=True, eq=False)
class SampleSet:
    """``n x p`` matrix of +-1 spins, optionally tagged with a chain id per row."""

    spins: np.ndarray
    approximate_iid: bool = False
    chain_ids: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.spins)
        if x.ndim != 2:
            raise ValueError(f"spins must be 2-D, got shape {x.shape}")
        if x.size and not np.all((x == 1) | (x == -1)):
            raise ValueError("spins must be -1 or +1")
        x = np.ascontiguousarray(x, dtype=np.int8)
        x.setflags(write=False)
        object.__setattr__(self, "spins", x)

    @classmethod
    def empty(cls, p: int) -> "SampleSet":
        return cls(np.zeros((0, p), dtype=np.int8))

    @property
    def n(self) -> int:
        return self.spins.shape[0]

    @property
    def p(self) -> int:
        return self.spins.shape[1]

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return self.spins.shape == other.spins.shape and bool(np.all(self.spins == other.spins))

    def __len__(self) -> int:
        return self.n
