import pytest

from greedy_ising.experiments import (ERROR_COLUMNS, ExperimentSpec, SamplerSpec, error_rates,
                                      influence_queries, loglog_slope, recovery_suite,
                                      run_error_sweep, run_runtime_sweep, run_seed, to_csv)
from greedy_ising.core import validate_model
from greedy_ising.generators import GeneratorSpec
from greedy_ising.learner import LearnConfig

CYCLE4 = GeneratorSpec("cycle", 4, 2, "ferro", 0.8, 0.8)


def _spec(**kw):
    base = dict(generator=CYCLE4, learn=LearnConfig(tau=0.08), values=(1000, 10_000), trials=3, seed=5)
    base.update(kw)
    return ExperimentSpec(**base)


class TestErrorSweep:
    def test_order_and_determinism(self):
        rows = run_error_sweep(_spec())
        assert [(r["n"], r["trial"]) for r in rows] == [(n, t) for n in (1000, 10_000) for t in range(3)]
        drop = ("wall_time",)
        assert to_csv(rows, ERROR_COLUMNS, drop) == to_csv(run_error_sweep(_spec(), workers=3), ERROR_COLUMNS, drop)

    def test_zero_trials(self):
        text = to_csv(run_error_sweep(_spec(trials=0)), ERROR_COLUMNS)
        assert text == "# format_version=1\nn,trial,exact_recovery,fp,fn,wall_time,error\n"

    def test_adding_trials_keeps_earlier_runs(self):
        a = run_error_sweep(_spec(trials=2))
        b = run_error_sweep(_spec(trials=4))
        key = lambda r: {k: r[k] for k in ("n", "trial", "exact_recovery", "fp", "fn")}
        assert [key(r) for r in a] == [key(r) for r in b if r["trial"] < 2]

    def test_error_rate_decreases(self):
        rows = run_error_sweep(_spec(values=(1000, 10_000, 100_000), trials=20))
        rates = error_rates(rows)
        ns = sorted(rates)
        for a, b in zip(ns, ns[1:]):
            assert rates[b] <= rates[a] + 1 / 20

    def test_failures_are_recorded(self):
        spec = _spec(generator=GeneratorSpec("cycle", 4, 2, "ferro", 0.8, 0.8), trials=1, values=(100,),
                     sampler=SamplerSpec("exact"))
        bad = ExperimentSpec(**{**spec.__dict__, "generator": GeneratorSpec("star", 4, 2)})
        rows = run_error_sweep(bad)
        assert rows[0]["error"].startswith("InfeasibleFamily")


class TestRuntimeSweep:
    def test_single_value_has_no_slope(self):
        spec = _spec(sweep="p", values=(8,), n=500, trials=2, sampler=SamplerSpec("gibbs", burn_in=5))
        r = run_runtime_sweep(spec)
        assert r.slope is None and len(r.rows) == 1 and len(r.per_trial[8]) == 2

    def test_slope_fit(self):
        assert loglog_slope([10, 20, 40], [1.0, 4.0, 16.0]) == pytest.approx(2.0)


def test_spec_round_trip():
    spec = _spec(sampler=SamplerSpec("gibbs", burn_in=10))
    doc = spec.to_dict()
    again = ExperimentSpec.from_dict(doc)
    assert again.generator == spec.generator and again.values == spec.values
    assert again.sampler == spec.sampler and again.learn.tau == spec.learn.tau


def test_suites_valid():
    for name, m in recovery_suite():
        assert validate_model(m) == [], name
        assert m.p <= 10 and m.graph.max_degree <= 3 and m.h == 0


def test_seed_derivation_is_counter_based():
    a = run_seed(1, 100, 3, 1).generate_state(2)
    assert (a == run_seed(1, 100, 3, 1).generate_state(2)).all()
    assert not (a == run_seed(1, 100, 4, 1).generate_state(2)).all()


def test_influence_queries():
    q = influence_queries(4, 2)
    assert len(q) == 4 * 3 * (1 + 2 + 1)
    assert all(u != i and u not in S and i not in S for u, i, S in q)
