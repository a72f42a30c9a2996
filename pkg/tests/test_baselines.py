import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from greedy_ising.baselines import (BaselineConfig, WorkGuardError, chow_liu, chow_liu_report,
                                    exhaustive_learn, exhaustive_learn_exact,
                                    maximum_spanning_tree, pairwise_mutual_information)
from greedy_ising.core import Graph, IsingModel, SampleSet
from greedy_ising.exact import build_joint, exact_conditional_mi, exact_sampler
from greedy_ising.verifier import suite_graphs
from greedy_ising.generators import random_parameters

from conftest import single_edge, star


class TestExhaustive:
    def test_single_edge(self):
        s = exact_sampler(build_joint(single_edge(0.8)), 10 ** 5, seed=1)
        r = exhaustive_learn(s, BaselineConfig(indep_eps=0.05))
        assert [t.final for t in r.traces] == [{1}, {0}]
        assert r.learned.sorted_edges() == [(0, 1)]

    def test_empty_graph(self):
        m = IsingModel(Graph(4), {}, (0.0,) * 4, 1, 1)
        s = exact_sampler(build_joint(m), 10 ** 5, seed=2)
        r = exhaustive_learn(s, BaselineConfig(indep_eps=0.05))
        assert all(t.final == frozenset() for t in r.traces)

    def test_work_guard(self):
        s = SampleSet(np.ones((3, 70), dtype=np.int8))
        with pytest.raises(WorkGuardError) as err:
            exhaustive_learn(s)
        assert err.value.estimated_scans > 0

    def test_fallback_when_nothing_passes(self):
        s = exact_sampler(build_joint(star(5, 0.8)), 20_000, seed=3)
        r = exhaustive_learn(s, BaselineConfig(d_max=1, indep_eps=1e-6))
        assert r.traces[0].terminated_by == "fallback"

    @pytest.mark.parametrize("name,graph", [g for g in suite_graphs() if g[1].p <= 6])
    def test_exact_surrogate_recovers_suite(self, name, graph):
        m = random_parameters(graph, 0.5, 1.0, 0.2, seed=len(name))
        d = max(graph.max_degree, 1)
        r = exhaustive_learn_exact(build_joint(m), BaselineConfig(d_max=d, max_d=d, indep_eps=1e-9),
                                   reference=m)
        assert r.metrics["exact_recovery"], name


class TestChowLiu:
    def test_star(self):
        m = star(5, 0.8)
        tab = build_joint(m)
        # oracle: every center-leaf MI beats every leaf-leaf MI
        assert min(exact_conditional_mi(tab, 0, k) for k in range(1, 5)) > \
            max(exact_conditional_mi(tab, a, b) for a, b in itertools.combinations(range(1, 5), 2))
        assert chow_liu(exact_sampler(tab, 10 ** 5, seed=4)).edges == m.graph.edges

    def test_p2(self):
        s = SampleSet(np.array([[1, 1], [1, 1]]))
        assert chow_liu(s).sorted_edges() == [(0, 1)]

    def test_mi_matches_exact_plugin(self):
        x = np.array([[1, 1, -1], [1, -1, -1], [-1, -1, 1], [1, 1, 1]])
        mi = pairwise_mutual_information(SampleSet(x))
        # plug-in MI equals exact MI of the empirical distribution
        probs = np.zeros(8)
        for r in x:
            probs[sum(1 << j for j in range(3) if r[j] > 0)] += 0.25
        from greedy_ising.exact import JointTable
        with np.errstate(divide="ignore"):
            tab = JointTable(3, np.log(probs), 0.0)
        for a, b in itertools.combinations(range(3), 2):
            assert mi[a, b] == pytest.approx(exact_conditional_mi(tab, a, b), abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(p=st.integers(2, 9), seed=st.integers(0, 2 ** 16))
    def test_spanning_tree(self, p, seed):
        x = np.random.default_rng(seed).choice([-1, 1], size=(40, p))
        tree = chow_liu(SampleSet(x))
        g = nx.Graph(list(tree.edges))
        g.add_nodes_from(range(p))
        assert len(tree) == p - 1 and nx.is_tree(g)

    def test_kruskal_matches_networkx_weight(self):
        w = np.random.default_rng(0).random((7, 7))
        w = w + w.T
        ours = maximum_spanning_tree(7, w)
        ref = nx.maximum_spanning_tree(nx.from_numpy_array(w))
        assert sum(w[i, j] for i, j in ours.edges) == pytest.approx(ref.size(weight="weight"))

    def test_report_shape(self):
        s = exact_sampler(build_joint(star(4, 0.8)), 5000, seed=5)
        r = chow_liu_report(s, reference=star(4, 0.8))
        assert r.method == "chow-liu" and r.metrics["exact_recovery"]
