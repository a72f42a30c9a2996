"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 infeasibility guard.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from . import io
from .baselines import BaselineConfig, WorkGuardError, chow_liu_report, exhaustive_learn
from .core import DomainError, compute_constants, required_samples_upper, sample_lower_bound
from .estimator import compress, influence_scan
from .exact import EnumerationTooLarge
from .experiments import (ERROR_COLUMNS, RUNTIME_COLUMNS, SamplerSpec, draw_samples, load_spec,
                          run_error_sweep, run_runtime_sweep, to_csv)
from .generators import FAMILIES, SIGNS, GeneratorSpec, InfeasibleFamily, generate_model
from .learner import LearnConfig, learn_graph
from .verifier import InfeasibleScope, verify_all

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _strip_timing(doc):
    if isinstance(doc, dict):
        return {k: _strip_timing(v) for k, v in doc.items() if k not in ("timing", "runtime_s")}
    if isinstance(doc, list):
        return [_strip_timing(v) for v in doc]
    return doc


def cmd_generate(args) -> int:
    spec = GeneratorSpec(args.family, args.p, args.d, args.sign, args.alpha, args.beta, args.h,
                         rows=args.rows)
    model = generate_model(spec, args.seed)
    _emit(json.dumps(io.model_to_dict(model), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    model = io.read_model(args.model)
    sampler = SamplerSpec(args.sampler, args.burn_in, args.thinning, args.scan)
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        samples = draw_samples(model, args.n, sampler, args.seed)
    if args.out is None:
        raise UsageError("sample needs --out")
    io.write_samples(samples, args.out, binary=True if args.binary else None)
    return EXIT_OK


def _learn_config(args, reference) -> LearnConfig:
    common = dict(reconcile=args.reconcile, pruning=args.pruning, signed=args.signed,
                  workers=args.workers)
    if args.mode == "theoretical":
        if args.tau is not None:
            return LearnConfig(tau=args.tau, eps=args.eps, ell_cap=args.ell_cap,
                               mode="theoretical", **common)
        if reference is None:
            raise UsageError("theoretical mode needs --model (to read alpha, beta, h, d) "
                             "or an explicit --tau")
        return LearnConfig.theoretical(reference.alpha, reference.beta, reference.h,
                                       reference.d, **common)
    if args.tau is None:
        raise UsageError("practical mode needs --tau (or use --mode theoretical with --model)")
    return LearnConfig(tau=args.tau, eps=args.eps, ell_cap=args.ell_cap, **common)


def cmd_learn(args) -> int:
    reference = io.read_model(args.model) if args.model else None
    if args.method == "greedy":
        cfg = _learn_config(args, reference)
    samples = io.read_samples(args.samples)
    if reference is not None and reference.p != samples.p:
        raise io.FormatError(f"samples have p={samples.p} but the model has p={reference.p}")
    if args.method == "greedy":
        report = learn_graph(samples, cfg, reference=reference)
    elif args.method == "exhaustive":
        report = exhaustive_learn(samples, BaselineConfig(d_max=args.d_max,
                                                          indep_eps=args.indep_eps,
                                                          reconcile=args.reconcile),
                                  reference=reference)
    else:
        report = chow_liu_report(samples, reference=reference)
    if args.format == "csv":
        _emit(report.edges_csv(), args.out)
    else:
        _emit(io.dumps(report.to_dict(include_timing=not args.no_timing)), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    model = io.read_model(args.model)
    report = verify_all(model, subset_cap=args.subset_cap, model_id=Path(args.model).stem)
    if args.format == "text":
        _emit(report.summary() + "\n", args.out)
    else:
        _emit(io.dumps(report.to_dict(include_timing=not args.no_timing)), args.out)
    if not report.passed:
        logging.getLogger(__name__).warning("%s: %s", report.model_id, report.summary())
    return EXIT_OK


def cmd_constants(args) -> int:
    c = compute_constants(args.alpha, args.beta, args.h, args.d)
    upper = required_samples_upper(c.ell_star, c.eps_star, c.delta, args.p, args.zeta)
    try:
        lower = sample_lower_bound(args.alpha, args.beta, args.d, args.p)
    except DomainError as exc:
        lower = None
        logging.getLogger(__name__).warning("lower bound undefined: %s", exc)
    doc = {
        "format_version": io.FORMAT_VERSION,
        "inputs": {"alpha": args.alpha, "beta": args.beta, "h": args.h, "d": args.d,
                   "p": args.p, "zeta": args.zeta},
        "delta": c.delta, "tau_star": c.tau_star, "eps_star": c.eps_star,
        "ell_star": c.ell_star, "log_tau_star": c.log_tau_star,
        "n_upper": upper.value, "n_upper_overflow": upper.overflow,
        "n_upper_log": upper.log_value, "n_lower": lower,
    }
    if args.format == "csv":
        keys = [k for k in doc if k != "inputs"]
        _emit(",".join(keys) + "\n" + ",".join(str(doc[k]) for k in keys) + "\n", args.out)
    else:
        _emit(io.dumps(doc), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        spec = load_spec(args.spec)
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise io.FormatError(f"{args.spec}: invalid experiment spec: {exc}") from exc
    drop = ("wall_time", "wall_time_learn") if args.no_timing else ()
    if spec.sweep == "n":
        rows = run_error_sweep(spec, workers=args.workers)
        _emit(to_csv(rows, ERROR_COLUMNS, drop=drop), args.out)
    else:
        result = run_runtime_sweep(spec, workers=args.workers)
        text = to_csv(result.rows, RUNTIME_COLUMNS, drop=drop)
        if result.slope is not None and not args.no_timing:
            text += f"# loglog_slope={result.slope!r}\n"
        _emit(text, args.out)
    return EXIT_OK


def cmd_influence(args) -> int:
    samples = compress(io.read_samples(args.samples))
    S = tuple(int(s) for s in args.S.split(",")) if args.S else ()
    nodes = [args.u] if args.u is not None else range(samples.p)
    lines = ["u,i,S,influence"]
    for u in nodes:
        if u in S:
            continue
        for i, v in influence_scan(samples, u, S, signed=args.signed):
            lines.append(f"{u},{i},{' '.join(map(str, S))},{v!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="greedy-ising", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--format", choices=("json", "csv", "text"), default="json")
    parser.add_argument("--out", "-o", default=None, help="output path (default stdout)")
    parser.add_argument("--no-timing", action="store_true",
                        help="omit timing fields so repeated runs are byte-identical")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a synthetic model file")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--sign", choices=SIGNS, default="ferro")
    g.add_argument("--alpha", type=float, default=0.5)
    g.add_argument("--beta", type=float, default=None)
    g.add_argument("--h", type=float, default=0.0)
    g.add_argument("--rows", type=int, default=None)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("sample", help="draw samples from a model file")
    s.add_argument("--model", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--sampler", choices=("exact", "gibbs"), default="exact")
    s.add_argument("--burn-in", type=int, default=None)
    s.add_argument("--thinning", type=int, default=10)
    s.add_argument("--scan", choices=("random", "systematic"), default="random")
    s.add_argument("--binary", action="store_true")
    s.set_defaults(func=cmd_sample)

    ln = sub.add_parser("learn", help="learn a graph from a samples file")
    ln.add_argument("--samples", required=True)
    ln.add_argument("--model", default=None, help="reference model for scoring")
    ln.add_argument("--method", choices=("greedy", "exhaustive", "chow-liu"), default="greedy")
    ln.add_argument("--tau", type=float, default=None)
    ln.add_argument("--eps", type=float, default=None)
    ln.add_argument("--ell-cap", type=int, default=None)
    ln.add_argument("--mode", choices=("practical", "theoretical"), default="practical")
    ln.add_argument("--reconcile", choices=("AND", "OR"), default="AND")
    ln.add_argument("--pruning", choices=("simultaneous", "sequential"), default="simultaneous")
    ln.add_argument("--signed", action="store_true")
    ln.add_argument("--d-max", type=int, default=3)
    ln.add_argument("--indep-eps", type=float, default=0.05)
    ln.set_defaults(func=cmd_learn)

    v = sub.add_parser("verify", help="exact property checks on a small model")
    v.add_argument("--model", required=True)
    v.add_argument("--subset-cap", type=int, default=None)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("constants", help="worst-case constants and sample bounds")
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--beta", type=float, required=True)
    c.add_argument("--h", type=float, default=0.0)
    c.add_argument("--d", type=int, required=True)
    c.add_argument("--p", type=int, default=100)
    c.add_argument("--zeta", type=float, default=0.05)
    c.set_defaults(func=cmd_constants)

    sw = sub.add_parser("sweep", help="run an experiment spec")
    sw.add_argument("--spec", required=True)
    sw.set_defaults(func=cmd_sweep)

    inf = sub.add_parser("influence", help="dump empirical influences as CSV")
    inf.add_argument("--samples", required=True)
    inf.add_argument("--u", type=int, default=None)
    inf.add_argument("--S", default="", help="comma-separated conditioning set")
    inf.add_argument("--signed", action="store_true")
    inf.set_defaults(func=cmd_influence)
    return parser


def _hoist_globals(argv: list[str]) -> list[str]:
    """Allow global flags after the subcommand name."""
    flags = {"--seed": 1, "--workers": 1, "--format": 1, "--out": 1, "-o": 1,
             "--no-timing": 0, "-v": 0, "--verbose": 0}
    head, tail, k = [], [], 0
    while k < len(argv):
        tok = argv[k]
        name = tok.split("=", 1)[0]
        if name in flags:
            take = 1 if "=" in tok else 1 + flags[name]
            head.extend(argv[k:k + take])
            k += take
        else:
            tail.append(tok)
            k += 1
    return head + tail


def main(argv: list[str] | None = None) -> int:
    argv = _hoist_globals(list(sys.argv[1:] if argv is None else argv))
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse exits on --help and on usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "beta", "unset") is None:
        args.beta = args.alpha
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (io.FormatError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (EnumerationTooLarge, InfeasibleScope, WorkGuardError, InfeasibleFamily) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (DomainError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
