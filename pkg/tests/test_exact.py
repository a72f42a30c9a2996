import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from greedy_ising.core import Graph, IsingModel, compute_constants
from greedy_ising.exact import (ENUMERATION_CAP, EnumerationTooLarge, JointTable, build_joint,
                                conditional_prob, exact_conditional_mi, exact_conditional_mi_bits,
                                exact_entropy, exact_influence, exact_sampler)
from greedy_ising.generators import random_parameters

from conftest import brute_joint, cycle, path, single_edge


def _sigma(t):
    return 1 / (1 + math.exp(-t))


def _config_prob(table, x):
    # bit j of the flat index is X_j = +1
    return table.probs[sum(1 << j for j, v in enumerate(x) if v > 0)]


@st.composite
def small_models(draw, max_p=5):
    p = draw(st.integers(2, max_p))
    pairs = list(itertools.combinations(range(p), 2))
    edges = [e for e in pairs if draw(st.booleans())]
    g = Graph.from_edges(p, edges)
    seed = draw(st.integers(0, 2 ** 16))
    h = draw(st.sampled_from([0.0, 0.3]))
    return random_parameters(g, 0.3, 1.0, h, seed=seed)


class TestBuildJoint:
    def test_uniform(self):
        t = build_joint(IsingModel(Graph(2), {}, (0, 0), 1.0, 1.0))
        np.testing.assert_allclose(t.probs, 0.25, rtol=1e-15)
        assert t.log_Z == pytest.approx(2 * math.log(2), rel=1e-15)

    def test_single_edge(self):
        t = build_joint(single_edge(0.5))
        z = 2 * (math.exp(0.5) + math.exp(-0.5))
        assert t.log_Z == pytest.approx(math.log(z), rel=1e-14)
        assert _config_prob(t, (1, 1)) == pytest.approx(math.exp(0.5) / z, rel=1e-14)
        assert _config_prob(t, (1, 1)) == pytest.approx(0.365530, abs=1e-6)
        assert _config_prob(t, (1, -1)) == pytest.approx(0.134470, abs=1e-6)

    def test_matches_brute_force(self):
        m = random_parameters(Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]), 0.3, 0.9, 0.4, seed=5)
        t = build_joint(m)
        for x, prob in brute_joint(m).items():
            assert _config_prob(t, x) == pytest.approx(prob, rel=1e-12)

    def test_shift_invariance(self):
        t = build_joint(cycle(4, 0.7))
        shifted = JointTable(t.p, t.log_weights + 123.4, t.log_Z + 123.4)
        np.testing.assert_allclose(shifted.probs, t.probs, rtol=1e-12)

    def test_cap(self):
        with pytest.raises(EnumerationTooLarge):
            build_joint(IsingModel(Graph(ENUMERATION_CAP + 1), {}, (0.0,) * (ENUMERATION_CAP + 1), 1, 1))

    @settings(max_examples=30, deadline=None)
    @given(m=small_models(), data=st.data())
    def test_log_z_relabel_invariant(self, m, data):
        perm = data.draw(st.permutations(range(m.p)))
        assert build_joint(m.relabel(perm)).log_Z == pytest.approx(build_joint(m).log_Z, rel=1e-12)


class TestConditionals:
    def test_logistic_form(self):
        t = build_joint(single_edge(0.5))
        assert conditional_prob(t, 0, +1, {1: +1}) == pytest.approx(_sigma(1.0), rel=1e-14)
        assert conditional_prob(t, 0, +1, {1: +1}) == pytest.approx(0.731059, abs=1e-6)

    def test_symmetric_empty_condition(self):
        assert conditional_prob(build_joint(cycle(5, 0.6)), 2, +1, {}) == pytest.approx(0.5, abs=1e-15)

    def test_site_update_with_fields(self):
        # P(X_u=+|rest) = sigma(2 (sum theta x + theta_u))
        g = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
        m = IsingModel(g, {(0, 1): 0.7, (0, 2): -0.4, (0, 3): 0.9}, (0.2, -0.1, 0.3, 0.0), 0.4, 0.9, h=0.3)
        t = build_joint(m)
        for x in itertools.product((-1, 1), repeat=3):
            local = 0.7 * x[0] - 0.4 * x[1] + 0.9 * x[2] + 0.2
            got = conditional_prob(t, 0, +1, {1: x[0], 2: x[1], 3: x[2]})
            assert got == pytest.approx(_sigma(2 * local), abs=1e-12)

    def test_markov_blanket(self):
        m = random_parameters(Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]), 0.4, 0.9, 0.2, seed=1)
        t = build_joint(m)
        for a, b in itertools.product((-1, 1), repeat=2):
            base = conditional_prob(t, 2, +1, {1: a, 3: b})
            for c, e in itertools.product((-1, 1), repeat=2):
                assert conditional_prob(t, 2, +1, {1: a, 3: b, 0: c, 4: e}) == pytest.approx(base, abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(m=small_models(max_p=4))
    def test_conditional_randomness(self, m):
        delta = compute_constants(m.alpha, m.beta, m.h, m.d).delta
        t = build_joint(m)
        for u in range(m.p):
            rest = [v for v in range(m.p) if v != u]
            for k in range(len(rest) + 1):
                for S in itertools.combinations(rest, k):
                    for xs in itertools.product((-1, 1), repeat=k):
                        q = conditional_prob(t, u, +1, dict(zip(S, xs)))
                        assert min(q, 1 - q) >= delta - 1e-12


class TestInfluence:
    def test_single_edge(self):
        t = build_joint(single_edge(0.5))
        assert exact_influence(t, 0, 1) == pytest.approx(0.5 * math.tanh(0.5), rel=1e-13)
        assert exact_influence(t, 0, 1) == pytest.approx(0.231059, abs=1e-6)

    def test_zero_coupling(self):
        m = IsingModel(Graph.from_edges(2, [(0, 1)]), {(0, 1): 0.0}, (0, 0), 0.1, 0.1)
        assert exact_influence(build_joint(m), 0, 1) == pytest.approx(0.0, abs=1e-15)

    def test_path_screening(self):
        t = build_joint(path(3, 0.8))
        assert abs(exact_influence(t, 0, 2, [1])) < 1e-14

    def test_brute_force_oracle(self):
        m = random_parameters(Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)]), 0.4, 0.9, 0.3, seed=2)
        t, P = build_joint(m), brute_joint(m)
        u, i, S = 1, 3, (0,)
        total = 0.0
        for xs in (-1, 1):
            rows = {x: q for x, q in P.items() if x[0] == xs}
            ps = sum(rows.values())
            pip = sum(q for x, q in rows.items() if x[i] > 0) / ps
            cond = lambda a: (sum(q for x, q in rows.items() if x[i] == a and x[u] > 0)
                              / sum(q for x, q in rows.items() if x[i] == a))
            total += ps * 2 * pip * (1 - pip) * abs(cond(1) - cond(-1))
        assert exact_influence(t, u, i, S) == pytest.approx(total, rel=1e-12)


class TestMutualInformation:
    def test_single_edge(self):
        t = build_joint(single_edge(0.5))
        pp = math.exp(0.5) / (2 * (math.exp(0.5) + math.exp(-0.5)))
        pm = 0.5 - pp
        oracle = 2 * pp * math.log(pp / 0.25) + 2 * pm * math.log(pm / 0.25)
        assert exact_conditional_mi(t, 0, 1) == pytest.approx(oracle, rel=1e-12)
        # 0.110944 nats; a value of 0.110960 is quoted elsewhere
        assert exact_conditional_mi(t, 0, 1) == pytest.approx(0.110944, abs=1e-6)
        assert exact_conditional_mi_bits(t, 0, 1) == pytest.approx(oracle / math.log(2), rel=1e-12)

    def test_independent(self):
        t = build_joint(IsingModel(Graph(3), {}, (0.2, 0.0, -0.1), 1, 1, h=0.2))
        assert exact_conditional_mi(t, 0, 2, [1]) == pytest.approx(0.0, abs=1e-15)

    def test_entropy_at_most_one_bit(self):
        t = build_joint(IsingModel(Graph(1), {}, (0.0,), 1, 1))
        assert exact_entropy(t, 0) == pytest.approx(math.log(2), rel=1e-15)

    @settings(max_examples=25, deadline=None)
    @given(m=small_models(max_p=4))
    def test_influence_mi_chain(self, m):
        t = build_joint(m)
        for u, i in itertools.permutations(range(m.p), 2):
            rest = [v for v in range(m.p) if v not in (u, i)]
            for k in range(len(rest) + 1):
                for S in itertools.combinations(rest, k):
                    nu = exact_influence(t, u, i, S)
                    assert exact_conditional_mi(t, u, i, S) - 0.5 * nu ** 2 >= -1e-12


class TestExactSampler:
    def test_uniform_frequencies(self):
        t = build_joint(IsingModel(Graph(2), {}, (0, 0), 1, 1))
        s = exact_sampler(t, 10 ** 6, seed=3)
        idx = (s.spins[:, 0] > 0) + 2 * (s.spins[:, 1] > 0)
        freq = np.bincount(idx, minlength=4) / s.n
        assert np.all(np.abs(freq - 0.25) <= 0.002)

    def test_empty(self):
        s = exact_sampler(build_joint(path(3)), 0, seed=1)
        assert s.spins.shape == (0, 3)

    def test_deterministic(self):
        t = build_joint(cycle(4))
        assert exact_sampler(t, 1000, seed=9) == exact_sampler(t, 1000, seed=9)
        assert exact_sampler(t, 1000, seed=9) != exact_sampler(t, 1000, seed=10)
