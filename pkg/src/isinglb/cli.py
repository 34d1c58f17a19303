"""Command-line front end.

Every command prints its numbers to stdout as JSON (default) or CSV.  Exit
status is 0 on success, 1 when a verification finds violations, 2 on bad
arguments or input files, and 3 when a size cap or search budget is hit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds, ensembles, er
from .errors import ArgumentError, BudgetExceeded, CapacityError
from .experiment import ExperimentConfig, run_experiment, write_result
from .graph import max_disjoint_paths, read_graph, verify_certificate, write_graph
from .ising import (IsingModel, gibbs_sample, infer_exact, kl_exact, sample_exact,
                    write_samples)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_ARGUMENT, EXIT_CAPACITY = 0, 1, 2, 3


def _jsonable(obj):
    """Plain JSON types; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):  # str enums
        return obj.value
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _flatten(d: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            for i, item in enumerate(v):
                flat.update(_flatten(item, f"{key}.{i}."))
        elif isinstance(v, list):
            flat[key] = json.dumps(v)
        else:
            flat[key] = v
    return flat


def emit(obj, fmt: str, out=None) -> None:
    out = out or sys.stdout
    obj = _jsonable(obj)
    if fmt == "json":
        out.write(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")
        return
    rows = obj if isinstance(obj, list) else [obj]
    rows = [_flatten(r) for r in rows]
    cols = list(dict.fromkeys(k for r in rows for k in r))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in cols})
    out.write(buf.getvalue())


# -- exact ------------------------------------------------------------------

def _model(args, which="graph") -> IsingModel:
    return IsingModel(read_graph(getattr(args, which)), args.lam)


def cmd_exact(args):
    if args.what == "z":
        inf = infer_exact(_model(args))
        return {"log_partition": inf.log_partition}
    if args.what == "corr":
        inf = infer_exact(_model(args))
        if args.all:
            return {"correlations": inf.correlations}
        return {"s": args.s, "t": args.t, "corr": inf.corr(args.s, args.t)}
    if args.what == "kl":
        if not args.graph2:
            raise ArgumentError("kl needs --graph2")
        m1, m2 = _model(args), _model(args, "graph2")
        return {"kl_12": kl_exact(m1, m2), "kl_21": kl_exact(m2, m1)}
    # sample
    m = _model(args)
    if args.method == "exact":
        s = sample_exact(m, args.n, args.seed)
    else:
        s = gibbs_sample(m, args.n, burn_in=args.burn_in, thinning=args.thinning, seed=args.seed)
    if args.out:
        write_samples(s, args.out)
    return {"n": s.num_samples, "p": s.p, "seed": s.seed, "generator": s.generator,
            "out": args.out}


# -- bound ------------------------------------------------------------------

def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ArgumentError("missing " + ", ".join("--" + m.replace("_", "-") for m in missing))
    return [getattr(args, n) for n in names]


def cmd_bound(args):
    w = args.what
    if w == "ld-corr":
        lam, l, d = _need(args, "lam", "l", "d")
        return {"corr_lower_bound": bounds.corr_lower_bound_ld(lam, l, d)}
    if w == "ld-kl":
        lam, l, d = _need(args, "lam", "l", "d")
        return {"kl_upper_bound": bounds.kl_upper_bound_ld(lam, l, d, args.sym_diff)}
    if w == "hamming1":
        (lam,) = _need(args, "lam")
        return {"kl_upper_bound": bounds.kl_upper_bound_hamming1(lam)}
    if w == "fano":
        (delta,) = _need(args, "delta")
        if args.rho is not None:
            (size,) = _need(args, "size")
            thr = bounds.fano_single_center_threshold(bounds.FanoInputs(size, args.rho, delta))
        else:
            if args.size is None and args.log_size is None:
                raise ArgumentError("fano needs --size or --log-size")
            (p,) = _need(args, "p")
            thr = bounds.fano_counting_threshold(args.size, p, delta, log_class_size=args.log_size)
        return {"n_threshold": thr.value, "vacuous": thr.vacuous}
    calc = {
        "path-restricted": (bounds.threshold_path_restricted, ("p", "eta", "lam", "delta")),
        "path-length": (bounds.threshold_path_length, ("p", "eta", "gamma", "nu", "lam", "delta")),
        "girth": (bounds.threshold_girth, ("p", "g", "d", "nu", "lam", "delta")),
        "dregular": (bounds.threshold_dregular, ("p", "d", "lam", "delta")),
        "edge-bounded": (bounds.threshold_edge_bounded, ("p", "k", "lam", "delta")),
    }
    fn, names = calc[w]
    return fn(*_need(args, *names)).to_dict()


# -- construct / verify -----------------------------------------------------

_CLASS_PARAMS = {
    "path-restricted": ("p", "eta"),
    "path-length": ("p", "eta", "gamma", "nu"),
    "girth": ("p", "g", "d", "nu"),
    "dregular": ("p", "d"),
    "edge-bounded": ("p", "k"),
}


def cmd_construct(args):
    kw = dict(zip(_CLASS_PARAMS[args.cls], _need(args, *_CLASS_PARAMS[args.cls])))
    if args.cls in ("path-restricted", "path-length", "girth"):
        kw["kind"] = args.kind
    e = ensembles.build(args.cls, lam=args.lam, **kw)
    out = ensembles.save_ensemble(e, args.out)
    return {"out": str(out), **e.manifest()}


def cmd_verify(args):
    if args.what == "ld-connect":
        g = read_graph(args.graph)
        a, b, l, d = _need(args, "a", "b", "l", "d")
        found, cert = max_disjoint_paths(g, a, b, l, budget=args.budget)
        verdict = verify_certificate(g, cert, l, d)
        return {"connected": found >= d, "disjoint_paths": found,
                "certificate_ok": verdict.ok, "reason": verdict.reason,
                "certificate": cert.to_dict()}
    e = ensembles.load_ensemble(args.dir)
    rep = ensembles.validate_ensemble(e, kl_max_p=args.kl_max_p, budget=args.budget)
    args._status = EXIT_OK if rep.ok else EXIT_CHECK_FAILED
    return {"size": e.size, "rho": e.rho, **rep.to_dict()}


# -- simulate ---------------------------------------------------------------

def cmd_simulate(args):
    cfg = ExperimentConfig.from_json(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    result = run_experiment(cfg)
    print(f"wall time {result.wall_time:.3f} s", file=sys.stderr)
    if args.out:
        write_result(result, args.out, plot=not args.no_plot)
    if args.format == "csv":
        sys.stdout.write(result.to_csv())
        return None
    return result.to_dict()


# -- er ---------------------------------------------------------------------

def cmd_er(args):
    if args.what in ("bound", "regime"):
        p, c, lam = _need(args, "p", "c", "lam")
        params = er.ERParams(p, c, lam, p_avg_target=args.p_avg, epsilon=args.epsilon)
        if args.what == "regime":
            reg = er.er_regime(params)
            return {"regime": reg, "boundary_lambda": math.sqrt(p) / c,
                    "scale": er.REGIME_SCALE[reg]}
        return er.er_lower_bound(params).to_dict()
    if args.what == "sample":
        p, c, seed = _need(args, "p", "c", "seed")
        g = er.sample_er_graph(p, c, seed)
        if args.out:
            write_graph(g, args.out)
        return {"p": g.num_vertices, "edges": g.num_edges, "seed": seed, "out": args.out}
    # diagnose
    (c,) = _need(args, "c")
    if args.graph:
        g = read_graph(args.graph)
    else:
        p, seed = _need(args, "p", "seed")
        g = er.sample_er_graph(p, c, seed)
    return er.er_structure_diagnostics(g, c, gamma_override=args.gamma,
                                       epsilon=args.epsilon).to_dict()


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="isinglb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", parents=[common], help="brute-force inference")
    p.add_argument("what", choices=("z", "corr", "kl", "sample"))
    p.add_argument("--graph", required=True)
    p.add_argument("--graph2")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--s", type=int, default=0)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--all", action="store_true", help="print the full correlation matrix")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("exact", "gibbs"), default="exact")
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--thinning", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("bound", parents=[common], help="closed-form bounds and thresholds")
    p.add_argument("what", choices=("ld-corr", "ld-kl", "hamming1", "path-restricted",
                                    "path-length", "girth", "dregular", "edge-bounded", "fano"))
    p.add_argument("--lambda", dest="lam", type=float)
    for name in ("p", "eta", "gamma", "g", "d", "k", "l", "size"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--nu", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--log-size", type=float)
    p.add_argument("--sym-diff", type=int, default=1)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("construct", parents=[common], help="build and save a hard ensemble")
    p.add_argument("cls", choices=tuple(_CLASS_PARAMS))
    p.add_argument("--out", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--kind", choices=("connectivity", "hamming1"), default="connectivity")
    for name in ("p", "eta", "gamma", "g", "d", "k"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--nu", type=float)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", parents=[common], help="check connectivity or an ensemble")
    p.add_argument("what", choices=("ld-connect", "ensemble"))
    p.add_argument("--graph")
    p.add_argument("--dir")
    for name in ("a", "b", "l", "d"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--kl-max-p", type=int, default=12)
    p.add_argument("--budget", type=int, default=ensembles.DEFAULT_SEARCH_BUDGET)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", parents=[common], help="empirical error against the Fano floor")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="directory for result.csv, result.json and fano.png")
    p.add_argument("--workers", type=int)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("er", parents=[common], help="Erdos-Renyi bounds and diagnostics")
    p.add_argument("what", choices=("bound", "regime", "diagnose", "sample"))
    p.add_argument("--p", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--p-avg", type=float, default=er.P_AVG_MAX)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--seed", type=int)
    p.add_argument("--graph")
    p.add_argument("--gamma", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_er)
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "what", None) == "ensemble" and not args.dir:
        print("error: verify ensemble needs --dir", file=sys.stderr)
        return EXIT_ARGUMENT
    if getattr(args, "what", None) == "ld-connect" and not args.graph:
        print("error: verify ld-connect needs --graph", file=sys.stderr)
        return EXIT_ARGUMENT
    try:
        payload = args.func(args)
    except (ArgumentError, ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGUMENT
    except (CapacityError, BudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    if payload is not None:
        emit(payload, args.format)
    return getattr(args, "_status", EXIT_OK)


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
