"""Command-line front end.

Every subcommand writes one JSON report to stdout and a short summary to
stderr. Exit codes: 0 success, 2 bad arguments, 3 numerical construction
failure, 4 decomposition not found.
"""
import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .analysis import criticality_scan, degenerate_span_check, is_interior, onto_witness, thresholds
from .decomposer import DecomposeOptions, decompose, random_separable, search_ensemble_length, uhlmann_report
from .errors import ArgumentError, ConstructionError
from .herm import SystemShape, is_ppt, sample_density
from .mixing import mix
from .parallel import sample_rng
from .serialize import (
    Report,
    dump_json,
    ensemble_from_dict,
    ensemble_to_dict,
    load_json,
    state_from_dict,
    state_to_dict,
)

EXIT_OK, EXIT_ARGS, EXIT_CONSTRUCTION, EXIT_DECOMPOSE = 0, 2, 3, 4


def _shape(text):
    try:
        return SystemShape.parse(text)
    except ArgumentError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="enslen", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False, model=False):
        p.add_argument("--output", help="also write the main artifact (state or ensemble) here")
        p.add_argument("--timing", action="store_true", help="include wall time in the report")
        if seed:
            p.add_argument("--seed", type=int, required=True)
            p.add_argument("--workers", type=_positive_int, default=1)
        if model:
            p.add_argument("--model", choices=("general", "pure"), default="pure")

    p = sub.add_parser("thresholds", help="exact length thresholds for a shape")
    p.add_argument("--shape", type=_shape, required=True)
    common(p)

    p = sub.add_parser("rank-scan", help="Jacobian ranks at random ensembles")
    p.add_argument("--shape", type=_shape, required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--samples", type=_positive_int, default=200)
    p.add_argument("--rel-tol", type=float, default=1e-8)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    common(p, seed=True)
    p.add_argument("--model", choices=("general", "pure"), default="general")

    p = sub.add_parser("witness", help="interior ensemble with an onto differential")
    p.add_argument("--shape", type=_shape, required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--eps", type=float, default=0.5)
    common(p)

    p = sub.add_parser("degenerate-check", help="span count for the k = n^2-1 edge case")
    p.add_argument("--n", type=int, required=True)
    common(p)

    for name, helptext in (("decompose", "search for a length-k decomposition"),
                           ("length-upper", "smallest k with a found decomposition")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--input", required=True, help="state file (or a report carrying one)")
        p.add_argument("--shape", type=_shape, help="must match the state file dims")
        if name == "decompose":
            p.add_argument("--k", type=_positive_int, required=True)
        p.add_argument("--restarts", type=_positive_int, default=50)
        p.add_argument("--max-iter", type=int, default=2000)
        p.add_argument("--tol", type=float, default=1e-7)
        p.add_argument("--step", choices=("lm", "gradient"), default="lm")
        p.add_argument("--ppt-check", action="store_true", help="annotate with a partial-transpose test")
        common(p, seed=True, model=True)

    p = sub.add_parser("sample-state", help="draw a random state")
    p.add_argument("--shape", type=_shape, required=True)
    p.add_argument("--kind", choices=("density", "separable"), default="separable")
    p.add_argument("--terms", type=_positive_int, default=20)
    common(p, seed=True)

    p = sub.add_parser("mix", help="evaluate the mixture of an ensemble file")
    p.add_argument("--ensemble", required=True)
    common(p)
    return parser


def _params(args):
    # workers never changes results, so reports stay byte-identical across it
    skip = {"command", "output", "timing", "func", "workers"}
    out = {}
    for key, val in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(val, SystemShape):
            val = list(val.dims)
        out[key.replace("_", "-")] = val
    return out


def _load_target(args):
    target, shape = state_from_dict(load_json(args.input))
    if args.shape is not None and args.shape != shape:
        raise ArgumentError(f"--shape {args.shape} does not match state dims {shape}")
    return target, shape


def _options(args):
    return DecomposeOptions(
        restarts=args.restarts, max_iter=args.max_iter, tol=args.tol,
        step=args.step, seed=args.seed, workers=args.workers,
    )


def cmd_thresholds(args, err):
    rep = thresholds(args.shape)
    d = rep.as_dict()
    err.write(f"shape {args.shape}: measure zero below k={d['thm2_zero_below']} (general), "
              f"k={d['thm3_zero_below']} (pure); open set from k={d['thm2_open_at']}\n")
    return EXIT_OK, d


def cmd_rank_scan(args, err):
    rep = criticality_scan(args.shape, args.k, args.model, args.samples, args.seed,
                           workers=args.workers, rel_tol=args.rel_tol)
    err.write(f"max rank {rep.max_rank} of {rep.codomain_dim}; "
              f"full-rank fraction {rep.full_rank_fraction:g}\n")
    return EXIT_OK, rep.as_dict()


def cmd_witness(args, err):
    ens, jrep = onto_witness(args.shape, args.k, eps=args.eps)
    payload = {
        "rank": jrep.rank,
        "codomain_dim": jrep.codomain_dim,
        "domain_dim": jrep.domain_dim,
        "min_singular_value": float(jrep.singular_values[-1]),
        "interior": is_interior(ens),
        "ensemble": ensemble_to_dict(ens),
    }
    if args.output:
        dump_json(payload["ensemble"], args.output)
    err.write(f"rank {jrep.rank} of {jrep.codomain_dim}\n")
    return EXIT_OK, payload


def cmd_degenerate(args, err):
    rep = degenerate_span_check(args.n)
    err.write(f"n={args.n}: {rep.element_count} elements, span {rep.span_dim} < {rep.codomain_dim}\n")
    return EXIT_OK, rep.as_dict()


def _ppt_note(target, shape):
    return {"ppt": bool(is_ppt(target, shape.dims)),
            "note": "partial-transpose test is an external oracle, advisory only"}


def cmd_decompose(args, err):
    target, shape = _load_target(args)
    res = decompose(target, shape, args.k, args.model, _options(args))
    payload = {
        "status": res.status,
        "k": res.k,
        "model": res.model,
        "residual": res.residual,
        "iterations": res.iterations,
        "restart": res.restart,
        "ensemble": ensemble_to_dict(res.ensemble),
    }
    if res.success and res.model == "pure":
        payload["uhlmann"] = uhlmann_report(target, res.k)
    if args.ppt_check:
        payload["advisory"] = _ppt_note(target, shape)
    if args.output:
        dump_json(payload["ensemble"], args.output)
    if res.success:
        err.write(f"found length-{res.k} decomposition, residual {res.residual:.3g}\n")
        return EXIT_OK, payload
    err.write(f"no decomposition found at k={res.k} (best residual {res.residual:.3g}); "
              "this does not show the state is entangled\n")
    return EXIT_DECOMPOSE, payload


def cmd_length_upper(args, err):
    target, shape = _load_target(args)
    search = search_ensemble_length(target, shape, args.model, _options(args))
    payload = {
        "length": search.length,
        "model": args.model,
        "best_residuals": search.best_residuals,
        "caratheodory": shape.N**2,
    }
    if search.found:
        payload["ensemble"] = ensemble_to_dict(search.result.ensemble)
        payload["residual"] = search.result.residual
        if args.model == "pure":
            payload["uhlmann"] = uhlmann_report(target, search.length)
        if args.output:
            dump_json(payload["ensemble"], args.output)
    else:
        payload["message"] = "no decomposition found"
    if args.ppt_check:
        payload["advisory"] = _ppt_note(target, shape)
    if search.found:
        err.write(f"decomposition found at k={search.length}\n")
        return EXIT_OK, payload
    err.write("no decomposition found up to the Caratheodory bound; "
              "this does not show the state is entangled\n")
    return EXIT_DECOMPOSE, payload


def cmd_sample_state(args, err):
    rng = sample_rng(args.seed, 0)
    if args.kind == "density":
        rho = sample_density(args.shape.N, rng)
    else:
        rho, _ = random_separable(args.shape, args.terms, rng)
    state = state_to_dict(rho, args.shape)
    if args.output:
        dump_json(state, args.output)
    err.write(f"sampled {args.kind} state on {args.shape}\n")
    return EXIT_OK, {"kind": args.kind, "state": state}


def cmd_mix(args, err):
    ens = ensemble_from_dict(load_json(args.ensemble))
    rho = mix(ens)
    state = state_to_dict(rho, ens.shape)
    if args.output:
        dump_json(state, args.output)
    err.write(f"mixed {ens.k} terms on {ens.shape}\n")
    return EXIT_OK, {"k": ens.k, "model": ens.model, "state": state}


COMMANDS = {
    "thresholds": cmd_thresholds,
    "rank-scan": cmd_rank_scan,
    "witness": cmd_witness,
    "degenerate-check": cmd_degenerate,
    "decompose": cmd_decompose,
    "length-upper": cmd_length_upper,
    "sample-state": cmd_sample_state,
    "mix": cmd_mix,
}


def _csv(payload):
    lines = ["sample,rank"] + [f"{i},{r}" for i, r in enumerate(payload["ranks"])]
    return "\n".join(lines) + "\n"


def execute(argv, stdout=None, stderr=None):
    """Run one subcommand; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        code, payload = COMMANDS[args.command](args, stderr)
    except ConstructionError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_CONSTRUCTION
    except (ArgumentError, OSError, json.JSONDecodeError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_ARGS
    if getattr(args, "format", "json") == "csv":
        stdout.write(_csv(payload))
        return code
    report = Report(
        command=args.command,
        parameters=_params(args),
        seed=getattr(args, "seed", None),
        version=__version__,
        payload=_jsonable(payload),
        wall_time=round(time.perf_counter() - t0, 6) if args.timing else None,
    )
    stdout.write(report.to_json())
    return code


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def main():
    sys.exit(execute(sys.argv[1:]))


if __name__ == "__main__":
    main()
