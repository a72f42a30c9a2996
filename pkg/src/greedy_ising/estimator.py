"""Empirical conditional-influence statistics.

All statistics depend on the samples only through the multiset of observed
rows, so samples are first collapsed into distinct rows with multiplicities
(:func:`compress`). Counts stay integral, which keeps every sum exact and makes
results independent of row order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numba
import numpy as np

from .core import SampleSet


@dataclass(frozen=True, eq=False)
class CompressedSamples:
    rows: np.ndarray      # (m, p) int8, distinct
    counts: np.ndarray    # (m,) int64, positive

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def p(self) -> int:
        return self.rows.shape[1]



def compress(samples: SampleSet | CompressedSamples) -> CompressedSamples:
    if isinstance(samples, CompressedSamples):
        return samples
    x = samples.spins
    if x.shape[0] == 0:
        return CompressedSamples(x.copy(), np.zeros(0, dtype=np.int64))
    packed = np.packbits(x > 0, axis=1)
    view = np.ascontiguousarray(packed).view(np.dtype((np.void, packed.shape[1])))[:, 0]
    _, first, counts = np.unique(view, return_index=True, return_counts=True)
    return CompressedSamples(x[first].copy(), counts.astype(np.int64))


@dataclass(frozen=True, eq=False)
class ConditionalCounts:
    """Per-stratum 2x2 tables of ``(X_u, X_i)``.

    ``strata[k]`` is the observed configuration ``x_S`` (in sorted ``S``
    order), ``counts[k]`` its multiplicity, and ``cells[k, a, b]`` the number
    of rows with ``X_u = 2a-1``, ``X_i = 2b-1`` in that stratum. Strata are
    in lexicographic order with -1 before +1.
    """

    u: int
    i: int
    S: tuple[int, ...]
    strata: np.ndarray
    counts: np.ndarray
    cells: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def _check_query(u: int, i: int | None, S: Iterable[int], p: int,
                 max_conditioning: int | None) -> tuple[int, ...]:
    S = tuple(sorted(set(int(s) for s in S)))
    if not 0 <= u < p:
        raise ValueError(f"node {u} out of range for p={p}")
    if i is not None and (i == u or not 0 <= i < p):
        raise ValueError(f"invalid pair ({u}, {i})")
    if u in S or (i is not None and i in S):
        raise ValueError(f"query nodes overlap conditioning set {S}")
    if max_conditioning is not None and len(S) > max_conditioning:
        raise ValueError(f"|S| = {len(S)} exceeds the cap {max_conditioning}")
    return S


def _strata(rows: np.ndarray, S: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Distinct ``x_S`` values (lexicographic) and each row's stratum index."""
    m = rows.shape[0]
    if not S:
        return np.zeros((1 if m else 0, 0), dtype=np.int8), np.zeros(m, dtype=np.int64)
    sub = rows[:, S]
    if len(S) > 62:
        _, first, inverse = np.unique(sub, axis=0, return_index=True, return_inverse=True)
        return sub[first], inverse.reshape(-1).astype(np.int64)
    weights = np.left_shift(np.int64(1), np.arange(len(S) - 1, -1, -1, dtype=np.int64))
    keys = (sub > 0).astype(np.int64) @ weights
    if len(S) <= 20:
        # dense key space: rank keys without sorting
        present = np.bincount(keys, minlength=1 << len(S)) > 0
        rank = np.cumsum(present) - 1
        inverse = rank[keys]
        first = np.full(int(present.sum()), m, dtype=np.int64)
        np.minimum.at(first, inverse, np.arange(m, dtype=np.int64))
    else:
        _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    return sub[first], inverse.reshape(-1).astype(np.int64)


@numba.njit(cache=True, nogil=True)
def _plus_counts(rows, counts, group, ngroups):
    """``out[g, i]`` = total multiplicity of rows in group ``g`` with ``X_i = +1``."""
    p = rows.shape[1]
    out = np.zeros((ngroups, p), dtype=np.int64)
    for r in range(rows.shape[0]):
        w = counts[r]
        o = out[group[r]]
        x = rows[r]
        for i in range(p):
            o[i] += w * (x[i] > 0)
    return out


@numba.njit(cache=True, nogil=True)
def _dense_groups(rows, S, u):
    """Group id ``2 * stratum + [X_u = +]`` per row, strata ranked by ``x_S`` key.

    Needs ``len(S) <= 20`` so the key space can be ranked with a dense table.
    """
    m = rows.shape[0]
    keys = np.zeros(m, dtype=np.int64)
    for r in range(m):
        key = 0
        for s in S:
            key = 2 * key + (rows[r, s] > 0)
        keys[r] = key
    rank = np.zeros(1 << S.shape[0], dtype=np.int64)
    for r in range(m):
        rank[keys[r]] = 1
    k = 0
    for key in range(rank.shape[0]):
        if rank[key]:
            rank[key] = k
            k += 1
    group = np.empty(m, dtype=np.int64)
    for r in range(m):
        group[r] = 2 * rank[keys[r]] + (rows[r, u] > 0)
    return group, k


def tabulate(samples: SampleSet | CompressedSamples, u: int, i: int, S: Iterable[int] = (),
             max_conditioning: int | None = None) -> ConditionalCounts:
    data = compress(samples)
    S = _check_query(u, i, S, data.p, max_conditioning)
    strata, inv = _strata(data.rows, S)
    k = strata.shape[0]
    a = (data.rows[:, u] > 0).astype(np.int64)
    b = (data.rows[:, i] > 0).astype(np.int64)
    cells = np.bincount(inv * 4 + 2 * a + b, weights=data.counts, minlength=4 * k)
    cells = cells.astype(np.int64).reshape(k, 2, 2)
    return ConditionalCounts(u, i, S, strata, cells.sum(axis=(1, 2)), cells)


def _influence_terms(c11, c10, n_plus, n_minus, n: int, signed: bool) -> np.ndarray:
    """Per-stratum contributions ``P(x_S) * lambda_hat * |nu_hat|``.

    ``c11``/``c10`` count ``X_u = +`` among rows with ``X_i = +``/``-``;
    ``n_plus``/``n_minus`` count rows with ``X_i = +``/``-``. Strata where
    ``X_i`` is constant contribute 0.
    """
    ok = (n_plus > 0) & (n_minus > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        nu = c11 / n_plus - c10 / n_minus
        if not signed:
            nu = np.abs(nu)
        # (n_s / n) * 2 (n_plus / n_s) (n_minus / n_s)
        terms = 2.0 * n_plus * n_minus / ((n_plus + n_minus) * n) * nu
    return np.where(ok, terms, 0.0)


def _influence_from_cells(cells: np.ndarray, n: int, signed: bool = False) -> float:
    if n == 0:
        return 0.0
    c = cells.astype(np.float64)
    n_i = c.sum(axis=1)
    return math.fsum(_influence_terms(c[:, 1, 1], c[:, 1, 0], n_i[:, 1], n_i[:, 0], n, signed))


def empirical_influence(counts: ConditionalCounts, signed: bool = False) -> float:
    """Empirical averaged conditional influence from a tabulation.

    ``signed=True`` averages the signed conditional influence instead of its
    magnitude.
    """
    return _influence_from_cells(counts.cells, counts.n, signed)


def pair_influence(samples: SampleSet | CompressedSamples, u: int, i: int,
                   S: Iterable[int] = (), signed: bool = False) -> float:
    return empirical_influence(tabulate(samples, u, i, S), signed)


def influence_vector(samples: SampleSet | CompressedSamples, u: int, S: Iterable[int] = (),
                     signed: bool = False, max_conditioning: int | None = None) -> np.ndarray:
    """Length-``p`` array of influences on ``u`` given ``X_S``; 0 for ``i`` in ``S + {u}``.

    One stratification pass serves every candidate ``i``: a single sweep over
    the rows counts ``X_i = +`` within each ``(x_S, X_u)`` group for all ``i``.
    """
    data = compress(samples)
    p = data.p
    S = _check_query(u, None, S, p, max_conditioning)
    out = np.zeros(p)
    candidates = [i for i in range(p) if i != u and i not in S]
    m = data.rows.shape[0]
    if not candidates or m == 0:
        return out
    n = data.n
    if len(S) <= 20:
        group, k = _dense_groups(data.rows, np.asarray(S, dtype=np.int64), u)
    else:
        _, inv = _strata(data.rows, S)
        k = int(inv.max()) + 1
        group = 2 * inv + (data.rows[:, u] > 0)
    plus = _plus_counts(data.rows, data.counts, group, 2 * k).reshape(k, 2, p)
    totals = np.bincount(group, weights=data.counts, minlength=2 * k).astype(np.int64)
    totals = totals.reshape(k, 2, 1)
    cand = np.asarray(candidates)
    c11 = plus[:, 1, cand].astype(np.float64)
    c10 = (totals[:, 1] - plus[:, 1, cand]).astype(np.float64)
    n_plus = plus[:, :, cand].sum(axis=1).astype(np.float64)
    n_minus = (totals[:, :, 0].sum(axis=1)[:, None] - n_plus)
    terms = _influence_terms(c11, c10, n_plus, n_minus, n, signed)
    for col, i in enumerate(candidates):
        out[i] = math.fsum(terms[:, col])
    return out


def influence_scan(samples: SampleSet | CompressedSamples, u: int, S: Iterable[int] = (),
                   signed: bool = False, max_conditioning: int | None = None
                   ) -> list[tuple[int, float]]:
    """``(i, influence)`` for every ``i`` outside ``S + {u}``, ascending in ``i``."""
    S = tuple(S)
    vec = influence_vector(samples, u, S, signed, max_conditioning)
    skip = set(S) | {u}
    return [(i, float(vec[i])) for i in range(vec.size) if i not in skip]


def influence_grid(samples: SampleSet | CompressedSamples,
                   queries: Sequence[tuple[int, int, Sequence[int]]],
                   signed: bool = False) -> np.ndarray:
    """Empirical influences for an explicit list of ``(u, i, S)`` queries."""
    data = compress(samples)
    return np.array([empirical_influence(tabulate(data, u, i, S), signed) for u, i, S in queries])
