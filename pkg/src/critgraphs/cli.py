"""Command-line entry point.

Exit codes: 0 success, 1 invalid arguments, 2 a verification failed,
3 a resource limit was hit. Errors go to stderr as a single line starting with
``critgraphs: error[<kind>]:``.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .bounds import (
    BoundParams,
    InadmissibleParameters,
    check_mgf_condition,
    derive_params,
    dominating_law,
    k_from_A,
    tail_bound,
)
from .exploration import explore
from .harness import (
    ESTIMATORS,
    ExperimentConfig,
    OracleTooLarge,
    check_domination,
    default_workers,
    estimate_record,
    estimate_tail,
    exact_tail_oracle,
    render_csv,
    render_json,
    scaling_sweep,
    write_atomic,
)
from .models import (
    BASES,
    ErConfig,
    IntersectionConfig,
    NrConfig,
    RegularPercolationConfig,
    generate,
    model_name,
    model_params,
    nr_weights,
    read_edgelist,
    write_edgelist,
)
from .offspring import DEFAULT_WEIGHT_GRID, verify_weight_sequence
from .walks import BallotHypothesisError, StateSpaceTooLarge, verify_ballot

EXIT_OK, EXIT_USAGE, EXIT_FAILED, EXIT_LIMIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _err(kind: str, message: str) -> None:
    print(f"critgraphs: error[{kind}]: {message}", file=sys.stderr)


# --------------------------------------------------------------------------
# argument groups


def _int(text: str) -> int:
    """Integers, also written as 1e5."""
    try:
        return int(text)
    except ValueError:
        value = float(text)
        if not value.is_integer():
            raise argparse.ArgumentTypeError(f"not an integer: {text}") from None
        return int(value)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_model(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=("er", "intersection", "regular", "nr"), required=required)
    g.add_argument("--n", type=_int)
    g.add_argument("--p", type=float, help="er: edge probability; regular: retention; intersection: with --m")
    g.add_argument("--lam", type=float, help="er: p = 1/n + lam n^(-4/3)")
    g.add_argument("--beta", type=float, default=1.0, help="intersection: m = floor(beta n)")
    g.add_argument("--gamma", type=float, help="intersection: p = gamma/n (default: critical)")
    g.add_argument("--m", type=_int, help="intersection: explicit auxiliary count (needs --p)")
    g.add_argument("--d", type=int, help="regular: base degree")
    g.add_argument("--base", choices=BASES, default="circulant")
    g.add_argument("--base-seed", type=_int, default=0)
    g.add_argument("--tau", type=float, default=5.0, help="nr: power-law exponent")
    g.add_argument("--scale", type=float, help="nr: Pareto scale (default: critical)")
    g.add_argument("--weights", help="nr: explicit comma-separated weights")


def _add_k(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--k", type=_int)
    g.add_argument("--A", type=float, help="k = ceil(A n^(2/3))")


def _add_output(p: argparse.ArgumentParser, default_format: str = "csv") -> None:
    p.add_argument("--format", choices=("csv", "json"), default=default_format)
    p.add_argument("--out", help="output path (default: stdout)")


def _add_mc(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=_int, required=True)
    p.add_argument("--seed", type=_int, default=0)
    p.add_argument("--workers", type=_int, default=None, help="default: available CPUs")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="critgraphs", description="Component tails of critical random graphs.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="file of key=value lines, read as flags")
        return p

    p = add("generate", "sample one graph and write it as an edge list")
    _add_model(p)
    p.add_argument("--seed", type=_int, default=0)
    p.add_argument("--out")

    p = add("explore", "run the exploration process and print its trace")
    p.add_argument("--graph", help="edge-list file; otherwise a graph is sampled")
    _add_model(p, required=False)
    p.add_argument("--seed", type=_int, default=0)
    p.add_argument("--start", type=_int, default=1, help="1-based start vertex")
    p.add_argument("--max-steps", type=_int)
    p.add_argument("--sweep", action="store_true", help="restart until every vertex is explored")
    _add_output(p, "json")

    p = add("tail", "estimate P(|C| > k) by Monte Carlo")
    _add_model(p)
    _add_k(p)
    _add_mc(p)
    p.add_argument("--estimator", choices=ESTIMATORS, default="max-component")
    p.add_argument("--timing", action="store_true", help="fill the wall_time_s column")
    _add_output(p)

    p = add("bound", "evaluate the closed-form tail bound")
    _add_model(p)
    _add_k(p)
    p.add_argument("--c", type=float, help="precondition constant (default: 0 if eps = 0, else 1)")
    _add_output(p, "json")

    p = add("sweep", "tail estimates for several A on the same samples")
    _add_model(p)
    p.add_argument("--A", type=_float_list, default=[1.5, 2.0, 3.0, 4.0], help="comma-separated, ascending")
    _add_mc(p)
    p.add_argument("--estimator", choices=ESTIMATORS, default="max-component")
    p.add_argument("--timing", action="store_true")
    _add_output(p)

    p = add("verify-ballot", "check the ballot-type inequality exactly")
    p.add_argument("--steps", required=True, help='step law, e.g. "-1:0.5,2:0.5"')
    p.add_argument("--r", type=_int, required=True)
    p.add_argument("--horizon", type=_int, required=True)
    _add_output(p)

    p = add("verify-mgf", "check the moment generating function condition on a grid")
    _add_model(p)
    p.add_argument("--grid", type=_int, default=1000)
    p.add_argument("--delta", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--tol", type=float, default=1e-12)
    _add_output(p, "json")

    p = add("verify-lemma2", "measure the weight-sequence constants")
    p.add_argument("--tau", type=float, default=5.0)
    p.add_argument("--scale", type=float)
    p.add_argument("--n-grid", type=_float_list, default=list(DEFAULT_WEIGHT_GRID))
    _add_output(p, "json")

    p = add("verify-domination", "compare the exploration tail with the walk survival")
    _add_model(p)
    _add_k(p)
    _add_mc(p)
    _add_output(p, "json")

    p = add("oracle", "exact P(|C_max| > k) by enumerating edge subsets")
    _add_model(p)
    p.add_argument("--k", type=_int, required=True)
    _add_output(p, "json")
    return parser


# --------------------------------------------------------------------------
# helpers


def model_from_args(a: argparse.Namespace):
    """Build a model config from the model flags."""
    if a.model is None:
        raise UsageError("--model is required")
    if a.model == "nr" and a.weights:
        w = _float_list(a.weights)
        return NrConfig(np.array(sorted(w, reverse=True)))
    if a.n is None:
        raise UsageError("--n is required")
    if a.model == "er":
        if (a.p is None) == (a.lam is None):
            raise UsageError("er needs exactly one of --p and --lam")
        return ErConfig(a.n, a.p) if a.p is not None else ErConfig.critical(a.n, a.lam)
    if a.model == "intersection":
        if a.m is not None:
            if a.p is None:
                raise UsageError("--m needs --p")
            return IntersectionConfig.explicit(a.n, a.m, a.p)
        gamma = a.gamma if a.gamma is not None else 1.0 / math.sqrt(a.beta)
        return IntersectionConfig(a.n, a.beta, gamma)
    if a.model == "regular":
        if a.d is None:
            raise UsageError("regular needs --d")
        p = a.p if a.p is not None else 1.0 / (a.d - 1)
        return RegularPercolationConfig(a.d, a.n, p, base=a.base, base_seed=a.base_seed)
    return nr_weights(a.n, a.tau, a.scale)


def _describe(config) -> dict:
    return {"model": model_name(config), **model_params(config)}


def _echo(args: argparse.Namespace, **extra) -> None:
    resolved = {k: v for k, v in vars(args).items() if k != "config"}
    resolved.update(extra)
    print("# config: " + json.dumps(resolved, sort_keys=True, default=str), file=sys.stderr)


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _emit_records(args, records: list[dict]) -> None:
    if args.format == "json":
        _emit(args, render_json(records))
    else:
        _emit(args, render_csv(records))


def _rounded(x):
    if isinstance(x, float):
        return float(format(x, ".10g"))
    if isinstance(x, dict):
        return {k: _rounded(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_rounded(v) for v in x]
    return x


def _emit_object(args, obj: dict) -> None:
    if args.format == "json":
        _emit(args, json.dumps(_rounded(obj), indent=2, default=_jsonable) + "\n")
    else:
        flat = {k: v for k, v in obj.items() if not isinstance(v, (list, dict))}
        _emit(args, render_csv([flat], list(flat)))


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(type(x).__name__)


def _resolve_k(args, n: int) -> tuple[int, float | None]:
    if args.A is not None:
        if args.A <= 1:
            raise UsageError("--A must exceed 1")
        return k_from_A(n, args.A), args.A
    return args.k, None


def parse_steps(text: str) -> dict[int, Fraction]:
    """``"-1:0.5,2:0.5"`` as exact rationals; the probabilities must sum to 1."""
    law: dict[int, Fraction] = {}
    for item in text.split(","):
        if not item.strip():
            continue
        try:
            step, prob = item.split(":")
            w, q = int(step), Fraction(prob.strip())
        except ValueError:
            raise UsageError(f"bad step entry {item!r}; expected <step>:<probability>") from None
        if q < 0:
            raise UsageError("step probabilities must be non-negative")
        law[w] = law.get(w, Fraction(0)) + q
    if not law:
        raise UsageError("empty step law")
    if abs(sum(law.values()) - 1) > Fraction(1, 10**9):
        raise UsageError(f"step probabilities sum to {float(sum(law.values()))}, not 1")
    if min(law) < -1:
        raise UsageError("steps below -1 are not offspring increments")
    return law


# --------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    config = model_from_args(args)
    _echo(args, resolved_model=_describe(config))
    graph = generate(config, np.random.default_rng(args.seed))
    buf = io.StringIO()
    write_edgelist(graph, buf)
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_explore(args) -> int:
    if args.graph:
        with open(args.graph) as fh:
            graph = read_edgelist(fh)
        _echo(args)
    else:
        config = model_from_args(args)
        _echo(args, resolved_model=_describe(config))
        graph = generate(config, np.random.default_rng(args.seed))
    if not 1 <= args.start <= graph.n:
        raise UsageError(f"--start must be in 1..{graph.n}")
    trace = explore(graph, args.start - 1, max_steps=args.max_steps, sweep=args.sweep)
    if args.format == "json":
        _emit(args, json.dumps(trace.to_dict()) + "\n")
    else:
        records = [{"t": t + 1, "eta": e, "active": y} for t, (e, y) in enumerate(zip(trace.eta, trace.active[1:]))]
        _emit(args, render_csv(records, ["t", "eta", "active"]))
    return EXIT_OK


def _workers(args) -> int:
    return args.workers if args.workers is not None else default_workers()


def cmd_tail(args) -> int:
    config = model_from_args(args)
    k, A = _resolve_k(args, config.n)
    # worker count never changes the output, so it is not echoed into the data
    _echo(args, resolved_model=_describe(config), k=k)
    est = estimate_tail(
        ExperimentConfig(config, k, args.trials, master_seed=args.seed, workers=_workers(args), estimator=args.estimator, A=A)
    )
    _emit_records(args, [estimate_record(est, args.timing)])
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = model_from_args(args)
    _echo(args, resolved_model=_describe(config))
    try:
        rows = scaling_sweep(config, args.A, args.trials, args.seed, _workers(args), args.estimator)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit_records(args, [estimate_record(r, args.timing) for r in rows])
    return EXIT_OK


def cmd_bound(args) -> int:
    config = model_from_args(args)
    k, A = _resolve_k(args, config.n)
    params = derive_params(config, c=args.c)
    _echo(args, resolved_model=_describe(config), k=k)
    tb = tail_bound(config.n, params, A=A) if A is not None else tail_bound(config.n, params, k=k)
    _emit_object(args, {"model": model_name(config), **tb.to_dict()})
    return EXIT_OK


def cmd_verify_ballot(args) -> int:
    steps = parse_steps(args.steps)
    _echo(args, parsed_steps={w: str(q) for w, q in steps.items()})
    report = verify_ballot(steps, args.r, args.horizon)
    records = [
        {"j": j, "lhs": str(lhs), "rhs": str(rhs), "margin": str(margin), "lhs_float": float(lhs), "rhs_float": float(rhs)}
        for j, lhs, rhs, margin in report.to_rows()
    ]
    if args.format == "json":
        _emit(args, json.dumps({"ok": report.ok, "survival": str(report.survival), "rows": records}, indent=2) + "\n")
    else:
        _emit(args, render_csv(records, ["j", "lhs", "rhs", "margin", "lhs_float", "rhs_float"]))
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_verify_mgf(args) -> int:
    config = model_from_args(args)
    params = derive_params(config)
    overrides = {"delta": args.delta, "rho": args.rho, "epsilon": args.epsilon}
    if any(v is not None for v in overrides.values()):
        params = BoundParams(
            args.delta if args.delta is not None else params.delta,
            args.rho if args.rho is not None else params.rho,
            args.epsilon if args.epsilon is not None else params.epsilon,
            params.c_precondition,
            params.p3,
        )
    _echo(args, resolved_model=_describe(config), params=params.to_dict())
    report = check_mgf_condition(dominating_law(config), params, args.grid)
    ok = report.passed(args.tol)
    _emit_object(
        args,
        {
            "model": model_name(config),
            "passed": ok,
            "max_violation": report.max_violation,
            "grid_size": args.grid,
            **params.to_dict(),
        },
    )
    return EXIT_OK if ok else EXIT_FAILED


def cmd_verify_weights(args) -> int:
    grid = [int(x) for x in args.n_grid]
    _echo(args)
    report = verify_weight_sequence(args.tau, grid, scale=args.scale)
    if args.format == "json":
        _emit(args, json.dumps(report.to_dict(), indent=2) + "\n")
    else:
        records = [vars(r) for r in report.rows]
        _emit(args, render_csv(records, list(records[0])))
    return EXIT_OK if report.max_weight_ok and report.stays_bounded() else EXIT_FAILED


def cmd_verify_domination(args) -> int:
    config = model_from_args(args)
    k, _ = _resolve_k(args, config.n)
    _echo(args, resolved_model=_describe(config), k=k)
    report = check_domination(config, k, args.trials, args.seed, _workers(args))
    _emit_object(args, {"model": model_name(config), **report.to_dict()})
    return EXIT_OK if report.holds else EXIT_FAILED


def cmd_oracle(args) -> int:
    config = model_from_args(args)
    _echo(args, resolved_model=_describe(config))
    value = exact_tail_oracle(config, args.k)
    _emit_object(args, {"model": model_name(config), "n": config.n, "k": args.k, "probability": value})
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "explore": cmd_explore,
    "tail": cmd_tail,
    "bound": cmd_bound,
    "sweep": cmd_sweep,
    "verify-ballot": cmd_verify_ballot,
    "verify-mgf": cmd_verify_mgf,
    "verify-lemma2": cmd_verify_weights,
    "verify-domination": cmd_verify_domination,
    "oracle": cmd_oracle,
}


def expand_config(argv: list[str]) -> list[str]:
    """Replace ``--config PATH`` with the flags it lists. Flags given on the
    command line come later and therefore win."""
    out: list[str] = []
    extra: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok == "--config" or tok.startswith("--config="):
            path = tok.split("=", 1)[1] if "=" in tok else next(it, None)
            if path is None:
                raise UsageError("--config needs a path")
            extra += read_config_file(path)
        else:
            out.append(tok)
    if not extra or not out:
        return out
    return out[:1] + extra + out[1:]


def read_config_file(path: str) -> list[str]:
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    flags: list[str] = []
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if value.lower() == "true":
            flags.append(flag)
        elif value.lower() != "false":
            flags += [flag, value]
    return flags


# flags whose values may legitimately start with "-"
_SIGNED_FLAGS = ("--steps", "--lam")


def join_signed_values(argv: list[str]) -> list[str]:
    """Turn ``--steps -1:0.5`` into ``--steps=-1:0.5`` so argparse does not
    read the value as an option."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _SIGNED_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(join_signed_values(expand_config(argv)))
        return COMMANDS[args.command](args)
    except UsageError as exc:
        _err("usage", str(exc))
        return EXIT_USAGE
    except OracleTooLarge as exc:
        _err("limit", str(exc))
        return EXIT_LIMIT
    except StateSpaceTooLarge as exc:
        _err("limit", str(exc))
        return EXIT_LIMIT
    except (InadmissibleParameters, BallotHypothesisError) as exc:
        _err("usage", str(exc))
        return EXIT_USAGE
    except (ValueError, TypeError, OSError) as exc:
        _err("usage", str(exc))
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
