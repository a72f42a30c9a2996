import math

import pytest

from greedy_ising.core import Graph, IsingModel, compute_constants
from greedy_ising.exact import build_joint, exact_influence
from greedy_ising.verifier import (InfeasibleScope, suite_graphs, verifier_suite, verify_all,
                                   verify_conditional_randomness, verify_influence_mi,
                                   verify_markov_zero, verify_structural_property)

from conftest import cycle, path, single_edge


class TestStructural:
    def test_single_edge_slack(self):
        r = verify_structural_property(single_edge(0.5))
        c = r.checks[0]
        bound = 2 * 0.25 * (0.5 * math.exp(-1)) ** 5 / (16 * 0.5)
        assert bound == pytest.approx(1.32e-5, rel=0.01)
        assert c.passed
        assert c.worst_slack == pytest.approx(0.5 * math.tanh(0.5) - bound, rel=1e-12)

    def test_empty_graph_vacuous(self):
        r = verify_structural_property(IsingModel(Graph(3), {}, (0.0,) * 3, 0.5, 0.5))
        assert r.passed and r.checks[0].instances == 0

    def test_mixed_sign_chain(self):
        g = Graph.from_edges(3, [(0, 1), (1, 2)])
        m = IsingModel(g, {(0, 1): 0.5, (1, 2): -0.5}, (0.0,) * 3, 0.5, 0.5)
        assert verify_structural_property(m).passed
        assert exact_influence(build_joint(m), 0, 1) > 0.2


class TestOtherChecks:
    def test_markov_and_mi_and_randomness(self):
        for m in (path(4, 0.7), cycle(5, 0.9)):
            assert verify_markov_zero(m).passed
            assert verify_influence_mi(m).passed
            assert verify_conditional_randomness(m).passed

    def test_randomness_fails_for_misdeclared_model(self):
        # declaring beta too small makes delta too large, so the check must catch it
        g = Graph.from_edges(2, [(0, 1)])
        m = IsingModel(g, {(0, 1): 2.0}, (0.0, 0.0), 0.1, 0.1)
        r = verify_conditional_randomness(m)
        assert not r.passed and r.checks[0].witness["min_prob"] < compute_constants(0.1, 0.1, 0, 1).delta

    def test_report_serialization(self):
        r = verify_all(cycle(4))
        d = r.to_dict(include_timing=False)
        assert d["passed"] and "runtime_s" not in d and len(d["checks"]) == 4
        assert "structural_lower_bound" in r.summary()

    def test_scope_guard(self):
        big = IsingModel(Graph(14), {}, (0.0,) * 14, 1, 1)
        with pytest.raises(InfeasibleScope):
            verify_all(big)
        assert verify_structural_property(big, subset_cap=1).passed


class TestSuite:
    def test_suite_shape(self):
        graphs = suite_graphs()
        small = [g for n, g in graphs if n.startswith("atlas")]
        # connected graphs on 3, 4, 5 nodes with max degree <= 3: 2 + 5 + 11
        assert len(small) == 18
        assert len(graphs) == 24
        models = list(verifier_suite(seeds=2))
        assert len(models) == 24 * 2 * 2
        assert len({name for name, _ in models}) == len(models)

    def test_suite_deterministic(self):
        a = [m.couplings for _, m in verifier_suite(seeds=1)]
        b = [m.couplings for _, m in verifier_suite(seeds=1)]
        assert a == b
