"""Exact inference for small Ising models by enumerating all ``2^p`` states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy.special import logsumexp

from .core import IsingModel, SampleSet

ENUMERATION_CAP = 20


class EnumerationTooLarge(ValueError):
    pass


def all_configurations(p: int) -> np.ndarray:
    """``(2^p, p)`` int8 matrix; row ``k`` has ``X_j = +1`` iff bit ``j`` of ``k`` is set."""
    idx = np.arange(2 ** p, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(p, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


def log_weights(model: IsingModel, configs: np.ndarray) -> np.ndarray:
    x = configs.astype(np.float64)
    out = x @ model.field_vector()
    for (i, j), theta in sorted(model.couplings.items()):
        out += theta * x[:, i] * x[:, j]
    return out


@dataclass(frozen=True, eq=False)
class JointTable:
    """Exact joint distribution of a model.

    ``log_weights[k]`` is the unnormalized log-probability of the configuration
    encoded by bitmask ``k`` (see :func:`all_configurations`).
    """

    p: int
    log_weights: np.ndarray
    log_Z: float
    _marginals: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_weights - self.log_Z)

    @property
    def tensor(self) -> np.ndarray:
        """Probabilities as a ``(2,)*p`` array whose axis ``k`` is node ``k`` (index 1 = +1)."""
        if "tensor" not in self._marginals:
            t = self.probs.reshape((2,) * self.p).transpose(tuple(range(self.p - 1, -1, -1)))
            self._marginals["tensor"] = t
        return self._marginals["tensor"]

    def marginal(self, nodes: Iterable[int]) -> np.ndarray:
        """Joint marginal of ``nodes`` with axes in ascending node order."""
        key = tuple(sorted(set(int(v) for v in nodes)))
        cached = self._marginals.get(key)
        if cached is None:
            drop = tuple(k for k in range(self.p) if k not in key)
            cached = self.tensor.sum(axis=drop) if drop else self.tensor
            self._marginals[key] = cached
        return cached


def build_joint(model: IsingModel, cap: int = ENUMERATION_CAP) -> JointTable:
    if model.p > cap:
        raise EnumerationTooLarge(
            f"p={model.p} exceeds the enumeration cap {cap}; "
            "use the Gibbs sampler (greedy_ising.gibbs) for larger models")
    lw = log_weights(model, all_configurations(model.p))
    lw.setflags(write=False)
    return JointTable(model.p, lw, float(logsumexp(lw)))


def _check_disjoint(u: int, i: int | None, S: Iterable[int]) -> tuple[int, ...]:
    S = tuple(sorted(set(int(s) for s in S)))
    if i is not None and u == i:
        raise ValueError(f"query nodes coincide: u = i = {u}")
    if u in S or (i is not None and i in S):
        raise ValueError(f"query nodes ({u}, {i}) overlap conditioning set {S}")
    return S


def _pair_block(table: JointTable, u: int, i: int, S: tuple[int, ...]) -> np.ndarray:
    """``q[a, b, s] = P(X_u = a, X_i = b, X_S = s)`` with ``s`` a flat index over ``x_S``."""
    nodes = sorted((u, i) + S)
    m = table.marginal(nodes)
    m = np.moveaxis(m, [nodes.index(u), nodes.index(i)], [0, 1])
    return m.reshape(2, 2, -1)


def conditional_prob(table: JointTable, u: int, spin: int,
                     cond: Mapping[int, int] | None = None) -> float:
    """``P(X_u = spin | X_cond = cond)``."""
    cond = dict(cond or {})
    if u in cond:
        raise ValueError(f"node {u} is both queried and conditioned on")
    if spin not in (-1, 1):
        raise ValueError(f"spin must be -1 or +1, got {spin}")
    nodes = sorted([u, *cond])
    m = table.marginal(nodes)
    index = tuple(slice(None) if v == u else (cond[v] + 1) // 2 for v in nodes)
    col = m[index]
    return float(col[(spin + 1) // 2] / col.sum())


def conditional_plus_table(table: JointTable, u: int, S: Iterable[int]) -> np.ndarray:
    """``P(X_u = + | X_S = s)`` for every ``s``, flat-indexed over ``x_S``."""
    S = _check_disjoint(u, None, S)
    nodes = sorted((u,) + S)
    m = np.moveaxis(table.marginal(nodes), nodes.index(u), 0).reshape(2, -1)
    return m[1] / m.sum(axis=0)


def exact_influence(table: JointTable, u: int, i: int, S: Iterable[int] = ()) -> float:
    """Averaged conditional influence of ``X_i`` on ``X_u`` given ``X_S``.

    Sum over ``x_S`` of ``P(x_S) * lambda_i(x_S) * |nu_{u|i;x_S}|`` where
    ``lambda_i = 2 P(X_i=+|x_S) P(X_i=-|x_S)`` and ``nu`` is the change in
    ``P(X_u=+|x_S, X_i)`` when ``X_i`` flips from - to +.
    """
    S = _check_disjoint(u, i, S)
    q = _pair_block(table, u, i, S)
    p_i = q.sum(axis=0)                      # (2, s): P(X_i = b, x_S)
    p_s = p_i.sum(axis=0)
    nu = q[1, 1] / p_i[1] - q[1, 0] / p_i[0]
    lam = 2.0 * (p_i[1] / p_s) * (p_i[0] / p_s)
    return math.fsum(p_s * lam * np.abs(nu))


def exact_conditional_mi(table: JointTable, u: int, i: int, S: Iterable[int] = ()) -> float:
    """``I(X_u; X_i | X_S)`` in nats."""
    S = _check_disjoint(u, i, S)
    q = _pair_block(table, u, i, S)
    p_u = q.sum(axis=1, keepdims=True)
    p_i = q.sum(axis=0, keepdims=True)
    p_s = q.sum(axis=(0, 1), keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(q > 0, q * np.log(q * p_s / (p_u * p_i)), 0.0)
    return max(math.fsum(terms.ravel()), 0.0)


def exact_conditional_mi_bits(table: JointTable, u: int, i: int, S: Iterable[int] = ()) -> float:
    return exact_conditional_mi(table, u, i, S) / math.log(2)


def exact_entropy(table: JointTable, u: int) -> float:
    """Marginal entropy ``H(X_u)`` in nats."""
    m = table.marginal([u])
    return -math.fsum(float(v * math.log(v)) for v in m if v > 0)


def configurations_to_spins(index: np.ndarray, p: int) -> np.ndarray:
    bits = (index[:, None] >> np.arange(p, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


def exact_sampler(table: JointTable, n: int, seed=None) -> SampleSet:
    """``n`` i.i.d. draws by inverse-CDF lookup over the ``2^p`` probabilities."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if n == 0:
        return SampleSet.empty(table.p)
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(table.probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    np.minimum(idx, cdf.size - 1, out=idx)
    return SampleSet(configurations_to_spins(idx.astype(np.int64), table.p))
