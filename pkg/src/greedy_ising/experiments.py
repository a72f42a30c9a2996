"""Seeded experiment runs: error-vs-n sweeps, runtime-vs-p sweeps and the
fixed model suites used for recovery checks.

Every run is a pure function of ``(spec, sweep value, trial)``: seeds are
derived with ``SeedSequence(seed, spawn_key=(value, trial, role))``, so adding
trials or sweep values never changes the runs already present.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .core import IsingModel
from .exact import build_joint, exact_sampler
from .generators import GeneratorSpec, generate_model
from .gibbs import GibbsConfig, gibbs_sample
from .io import FORMAT_VERSION
from .learner import LearnConfig, learn_graph

log = logging.getLogger(__name__)

_ROLE_MODEL, _ROLE_SAMPLES = 0, 1


@dataclass(frozen=True)
class SamplerSpec:
    kind: str = "exact"
    burn_in: int | None = None
    thinning: int = 10
    scan: str = "random"

    def __post_init__(self):
        if self.kind not in ("exact", "gibbs"):
            raise ValueError(f"sampler must be 'exact' or 'gibbs', got {self.kind!r}")


@dataclass(frozen=True)
class ExperimentSpec:
    generator: GeneratorSpec
    learn: LearnConfig
    sampler: SamplerSpec = SamplerSpec()
    sweep: str = "n"
    values: tuple[int, ...] = ()
    n: int | None = None
    trials: int = 1
    seed: int = 0
    fixed_model: bool = True

    def __post_init__(self):
        if self.sweep not in ("n", "p"):
            raise ValueError(f"sweep must be over 'n' or 'p', got {self.sweep!r}")
        if self.sweep == "p" and self.n is None:
            raise ValueError("a p-sweep needs a fixed sample size n")
        if self.trials < 0:
            raise ValueError("trials must be >= 0")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentSpec":
        gen = GeneratorSpec(**doc["generator"])
        learn = LearnConfig(**doc.get("learn", {}))
        sampler = SamplerSpec(**doc.get("sampler", {}))
        sweep = doc.get("sweep", {})
        return cls(generator=gen, learn=learn, sampler=sampler,
                   sweep=sweep.get("kind", "n"), values=tuple(sweep.get("values", ())),
                   n=sweep.get("n"), trials=doc.get("trials", 1), seed=doc.get("seed", 0),
                   fixed_model=doc.get("fixed_model", True))

    def to_dict(self) -> dict:
        learn = {k: v for k, v in asdict(self.learn).items() if v is not None}
        return {"format_version": FORMAT_VERSION, "generator": self.generator.to_dict(),
                "learn": learn, "sampler": asdict(self.sampler),
                "sweep": {"kind": self.sweep, "values": list(self.values), "n": self.n},
                "trials": self.trials, "seed": self.seed, "fixed_model": self.fixed_model}


def load_spec(path) -> ExperimentSpec:
    with open(path) as fh:
        return ExperimentSpec.from_dict(json.load(fh))


def run_seed(seed: int, value: int, trial: int, role: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(int(value), int(trial), role))


def draw_samples(model: IsingModel, n: int, sampler: SamplerSpec, seed):
    if sampler.kind == "exact":
        return exact_sampler(build_joint(model), n, seed)
    cfg = GibbsConfig(burn_in=sampler.burn_in, thinning=sampler.thinning, scan=sampler.scan,
                      seed=seed)
    return gibbs_sample(model, n, cfg)


ERROR_COLUMNS = ("n", "trial", "exact_recovery", "fp", "fn", "wall_time", "error")
RUNTIME_COLUMNS = ("p", "n", "trials", "wall_time_learn")


def _error_run(spec: ExperimentSpec, n: int, trial: int) -> dict:
    row = {"n": n, "trial": trial}
    try:
        model_key = 0 if spec.fixed_model else n
        model_trial = 0 if spec.fixed_model else trial
        model = generate_model(spec.generator, run_seed(spec.seed, model_key, model_trial,
                                                        _ROLE_MODEL))
        samples = draw_samples(model, n, spec.sampler, run_seed(spec.seed, n, trial, _ROLE_SAMPLES))
        t0 = time.perf_counter()
        report = learn_graph(samples, spec.learn, reference=model)
        row.update(exact_recovery=int(report.metrics["exact_recovery"]),
                   fp=report.metrics["edge_fp"], fn=report.metrics["edge_fn"],
                   wall_time=time.perf_counter() - t0, error="")
    except Exception as exc:  # a failed run is reported, the sweep goes on
        log.warning("run n=%s trial=%s failed: %s", n, trial, exc)
        row.update(exact_recovery="", fp="", fn="", wall_time="", error=f"{type(exc).__name__}: {exc}")
    return row


def run_error_sweep(spec: ExperimentSpec, workers: int = 1) -> list[dict]:
    """One row per ``(n, trial)``, ordered by ``n`` then trial."""
    jobs = [(n, t) for n in spec.values for t in range(spec.trials)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda job: _error_run(spec, *job), jobs))
    return [_error_run(spec, n, t) for n, t in jobs]


def _runtime_run(spec: ExperimentSpec, p: int, trial: int) -> float:
    gen = GeneratorSpec(**{**spec.generator.to_dict(), "p": p})
    model = generate_model(gen, run_seed(spec.seed, p, 0 if spec.fixed_model else trial,
                                         _ROLE_MODEL))
    samples = draw_samples(model, spec.n, spec.sampler, run_seed(spec.seed, p, trial,
                                                                 _ROLE_SAMPLES))
    t0 = time.perf_counter()
    learn_graph(samples, spec.learn)
    return time.perf_counter() - t0


@dataclass
class RuntimeSweep:
    rows: list[dict]
    per_trial: dict[int, list[float]] = field(default_factory=dict)
    slope: float | None = None


def loglog_slope(ps, times) -> float | None:
    if len(ps) < 2:
        return None
    return float(np.polyfit(np.log(ps), np.log(times), 1)[0])


def run_runtime_sweep(spec: ExperimentSpec, workers: int = 1) -> RuntimeSweep:
    """Median learn-phase wall time per ``p``; sampling is excluded from the timing.

    Runs are executed one at a time regardless of ``workers`` so timings are
    not perturbed by concurrent jobs; ``workers`` is handed to the learner.
    """
    spec = replace(spec, learn=replace(spec.learn, workers=workers))
    per_trial = {}
    rows = []
    for p in spec.values:
        times = [_runtime_run(spec, p, t) for t in range(spec.trials)]
        per_trial[p] = times
        if times:
            rows.append({"p": p, "n": spec.n, "trials": len(times),
                         "wall_time_learn": statistics.median(times)})
    slope = loglog_slope([r["p"] for r in rows], [r["wall_time_learn"] for r in rows])
    return RuntimeSweep(rows, per_trial, slope)


def to_csv(rows: list[dict], columns, drop=()) -> str:
    cols = [c for c in columns if c not in drop]
    buf = io.StringIO()
    buf.write(f"# format_version={FORMAT_VERSION}\n")
    writer = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: _fmt(row.get(c, "")) for c in cols})
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return v


def error_rates(rows: list[dict]) -> dict[int, float]:
    """Fraction of trials per ``n`` that failed exact recovery."""
    out = {}
    for n in sorted({r["n"] for r in rows}):
        runs = [r for r in rows if r["n"] == n and r["error"] == ""]
        if runs:
            out[n] = 1.0 - sum(r["exact_recovery"] for r in runs) / len(runs)
    return out


# -- fixed suites ---------------------------------------------------------------------

RECOVERY_TAU = 0.04
RECOVERY_N = 200_000
RECOVERY_SUITE = (
    ("cycle4-ferro-0.8", GeneratorSpec("cycle", 4, 2, "ferro", 0.8, 0.8), 0),
    ("cycle6-ferro-0.8", GeneratorSpec("cycle", 6, 2, "ferro", 0.8, 0.8), 0),
    ("cycle10-random-1.0", GeneratorSpec("cycle", 10, 2, "random", 1.0, 1.0), 1),
    ("tree10-ferro-0.6", GeneratorSpec("tree", 10, 3, "ferro", 0.6, 0.6), 1),
    ("tree10-random-0.8", GeneratorSpec("tree", 10, 3, "random", 0.8, 0.8), 2),
    ("tree8-random-0.7", GeneratorSpec("tree", 8, 3, "random", 0.7, 0.7), 3),
    ("grid2x4-ferro-0.6", GeneratorSpec("grid", 8, 3, "ferro", 0.6, 0.6, rows=2), 1),
    ("grid2x5-random-0.7", GeneratorSpec("grid", 10, 3, "random", 0.7, 0.7, rows=2), 1),
)


def recovery_suite() -> list[tuple[str, IsingModel]]:
    """Trees, cycles and 2-row grids with ``p <= 10``, ``d <= 3``, ``alpha = beta``
    in ``[0.6, 1.0]`` and no fields."""
    return [(name, generate_model(spec, seed)) for name, spec, seed in RECOVERY_SUITE]


ESTIMATOR_SUITE = (
    ("edge-0.5", GeneratorSpec("path", 2, 1, "ferro", 0.5, 0.5), 0),
    ("path4-random-0.8", GeneratorSpec("path", 4, 2, "random", 0.8, 0.8), 0),
    ("star4-ferro-0.6", GeneratorSpec("star", 4, 3, "ferro", 0.6, 0.6), 0),
    ("cycle5-field", GeneratorSpec("cycle", 5, 2, "random", 0.5, 1.0, h=0.2), 0),
)


def estimator_suite() -> list[tuple[str, IsingModel]]:
    return [(name, generate_model(spec, seed)) for name, spec, seed in ESTIMATOR_SUITE]


def influence_queries(p: int, max_conditioning: int = 2) -> list[tuple[int, int, tuple[int, ...]]]:
    """Every ``(u, i, S)`` with ``|S| <= max_conditioning``."""
    out = []
    for u in range(p):
        for i in range(p):
            if i == u:
                continue
            rest = [v for v in range(p) if v not in (u, i)]
            for k in range(min(max_conditioning, len(rest)) + 1):
                out.extend((u, i, S) for S in itertools.combinations(rest, k))
    return out
