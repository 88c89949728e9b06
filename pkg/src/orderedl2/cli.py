"""Command-line interface: ``orderedl2 {synth,lambda,fit,eval,sweep,replay}``.

Every command writes a ``manifest.json`` next to its outputs recording the
resolved configuration, dataset fingerprint and output checksums. ``replay``
re-runs a command from its manifest and compares checksums.

Output directory defaults to ``$ORDEREDL2_OUT`` or the working directory.
Option precedence is command-line flag > ``--config`` JSON file > default.
"""

import argparse
import datetime
import hashlib
import json
import logging
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .data import (
    SplitSpec,
    SynthSpec,
    evaluate,
    generate_synthetic,
    load_dataset,
    map_labels_binary,
    read_vector_csv,
    split_train_test,
    write_dataset_csv,
    write_vector_csv,
)
from .exceptions import ConvergenceWarning, OrderedL2Error
from .lambda_seq import (
    N_EQUALS_2P,
    BhqConfig,
    bh_lambda,
    first_increase,
    lambda_table,
    sorted_lambda_sequence,
    write_lambda_csv,
)
from .solver import (
    LASSO,
    ORDERED_ELASTIC_NET,
    ORDERED_L2,
    SolverConfig,
    compute_lambda_max,
    fit,
    write_result_json,
    write_trace_csv,
)

log = logging.getLogger("orderedl2")

PENALTY_NAMES = {"ol2": ORDERED_L2, "oenet": ORDERED_ELASTIC_NET, "lasso": LASSO}
METHOD_ORDER = ("lasso", "ol2", "oenet")
LEUKEMIA_URL = "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary.html#leukemia"
VOLATILE_RESULT_KEYS = ("wall_time_s",)

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_MISMATCH = 1


def default_out_dir():
    return Path(os.environ.get("ORDEREDL2_OUT", "."))


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def result_checksum(path):
    """SHA-256 of a result JSON with timing fields removed."""
    with open(path) as fh:
        payload = json.load(fh)
    for key in VOLATILE_RESULT_KEYS:
        payload.pop(key, None)
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def output_checksum(path):
    path = Path(path)
    if path.suffix == ".json" and path.name != "manifest.json":
        return result_checksum(path)
    return sha256_file(path)


def _jsonable(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, np.generic):
        return value.item()
    return value


def write_manifest(path, command, args, outputs, dataset=None, seeds=None, extra=None):
    config = {k: _jsonable(v) for k, v in sorted(vars(args).items()) if not k.startswith("_")}
    manifest = {
        "command": command,
        "argv": list(getattr(args, "_argv", []) or []),
        "config": config,
        "seeds": seeds or {},
        "dataset": dataset,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "version": __version__,
        "outputs": {Path(p).name: output_checksum(p) for p in outputs},
    }
    if extra:
        manifest.update(extra)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _parse_mode(text):
    text = str(text)
    if text in ("n=p", "n=2p"):
        return text
    if text.startswith("n="):
        text = text[2:]
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"mode must be n=p, n=2p or n=<int>, got {text!r}")


def _float_list(text):
    return [float(t) for t in str(text).split(",") if t.strip()]


def _str_list(text):
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _class_counts(text):
    if text in (None, ""):
        return None
    out = {}
    for item in str(text).split(","):
        lab, _, cnt = item.rpartition(":")
        out[float(lab)] = int(cnt)
    return out


# ---------------------------------------------------------------- commands


def cmd_synth(args):
    out = Path(args.out or default_out_dir())
    out.mkdir(parents=True, exist_ok=True)
    spec = SynthSpec(args.n, args.p, args.coef_var, args.noise_var, args.seed)
    d, x0 = generate_synthetic(spec)
    data_path, x_path = out / "data.csv", out / "x_true.csv"
    write_dataset_csv(data_path, d)
    write_vector_csv(x_path, x0, "x_true")
    write_manifest(out / "manifest.json", "synth", args, [data_path, x_path],
                   dataset=d.fingerprint(), seeds={"synth": args.seed})
    print(f"wrote {data_path} (n={d.n}, p={d.p})")
    return EXIT_OK


def cmd_lambda(args):
    cfg = BhqConfig(args.q, args.p, args.mode, args.length, args.clip)
    table = lambda_table(cfg)
    out = Path(args.out) if args.out else default_out_dir() / "lambda.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    extra = {}
    if not cfg.monotone_clip:
        i = first_increase(table["lambda"])
        if i is not None:
            msg = f"lambda sequence is not monotone: increases at k={i + 2}"
            warnings.warn(msg)
            print(f"warning: {msg}", file=sys.stderr)
            extra["non_monotone_at_k"] = i + 2
    write_lambda_csv(out, table)
    write_manifest(out.with_name(out.stem + ".manifest.json"), "lambda", args, [out], extra=extra)
    print(f"wrote {out} ({cfg.K} rows)")
    return EXIT_OK


def _load_for_fit(args):
    d = load_dataset(args.data, normalize=args.normalize)
    if args.labels:
        neg, pos = _str_list(args.labels)
        d = type(d)(d.A, map_labels_binary(d.b, float(neg), float(pos)), d.feature_names,
                    d.normalized, d.column_scale)
    return d


def _resolve_lambda(penalty, A, b, args):
    """Return ``(lam, spec)`` for a fit; ``lam`` is scalar for the lasso."""
    p = A.shape[1]
    if penalty == LASSO:
        if args.lambda_value is not None:
            lam = args.lambda_value
            spec = {"rule": "explicit", "lambda": lam}
        elif args.lasso_lambda == "bh":
            if args.q is None:
                raise ValueError("--q is required for --lasso-lambda bh")
            lam = bh_lambda(1, p, args.q)
            spec = {"rule": "bh", "q": args.q, "lambda": lam}
        else:
            lmax = compute_lambda_max(A, b)
            lam = args.lambda_frac * lmax
            spec = {"rule": "lambda_max_fraction", "fraction": args.lambda_frac,
                    "lambda_max": lmax, "lambda": lam}
        return lam, spec
    if args.q is None:
        raise ValueError("--q is required for ordered penalties")
    cfg = BhqConfig(args.q, p, args.lambda_mode, p, args.clip)
    lam = sorted_lambda_sequence(cfg)
    spec = {"rule": "bhq", "q": args.q, "mode": str(args.lambda_mode), "length": p,
            "clip": bool(args.clip)}
    return lam, spec


def _solver_config(args, penalty):
    return SolverConfig(rho=args.rho, alpha=args.alpha, eps_abs=args.eps_abs,
                        eps_rel=args.eps_rel, max_iter=args.max_iter, penalty=penalty,
                        alpha_en=args.alpha_en, trace_every=args.trace_every)


def _write_error(out_dir, exc):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(payload), file=sys.stderr)
    if out_dir is not None:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            with open(out_dir / "error.json", "w") as fh:
                json.dump(payload, fh, indent=2)
                fh.write("\n")
        except OSError:
            pass


def cmd_fit(args):
    out = Path(args.out_dir or default_out_dir())
    try:
        out.mkdir(parents=True, exist_ok=True)
        penalty = PENALTY_NAMES[args.penalty]
        args.data = str(Path(args.data).resolve())
        d = _load_for_fit(args)
        lam, lam_spec = _resolve_lambda(penalty, d.A, d.b, args)
        cfg = _solver_config(args, penalty)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            res = fit(d.A, d.b, lam, cfg)
        res.lambda_spec.update(lam_spec)
        trace_path = Path(args.trace_out) if args.trace_out else out / "trace.csv"
        result_path = Path(args.result_out) if args.result_out else out / "result.json"
        coef_path = out / "coefficients.csv"
        write_trace_csv(trace_path, res.trace)
        write_vector_csv(coef_path, res.coefficients, "coefficient")
        rel = os.path.relpath(coef_path, result_path.parent)
        write_result_json(result_path, res, coefficients_path=rel)
        write_manifest(out / "manifest.json", "fit", args, [trace_path, result_path, coef_path],
                       dataset=d.fingerprint(), extra={"lambda_spec": res.lambda_spec})
    except (OrderedL2Error, ValueError, OSError) as exc:
        _write_error(out, exc)
        return EXIT_ERROR
    print(f"converged={res.converged} iterations={res.iterations} "
          f"nonzero={res.nonzero_count} time={res.wall_time:.3f}s")
    return EXIT_OK


def cmd_eval(args):
    try:
        test = load_dataset(args.data_test, normalize=False)
        with open(args.result) as fh:
            result = json.load(fh)
        coef_path = Path(result["coefficients_path"])
        if not coef_path.is_absolute():
            coef_path = Path(args.result).parent / coef_path
        metrics = evaluate(read_vector_csv(coef_path), test)
    except (OrderedL2Error, ValueError, OSError, KeyError) as exc:
        _write_error(None, exc)
        return EXIT_ERROR
    out = Path(args.metrics_out) if args.metrics_out else default_out_dir() / "metrics.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(metrics))
    return EXIT_OK


SWEEP_FIELDS = ("q", "method", "test_error", "mse", "genes", "time_s", "iterations", "converged")


def run_sweep(train, test, q_grid, methods, args, parallel=1):
    """Fit every (q, method) pair; rows are returned in canonical order."""
    jobs = [(q, m) for q in q_grid for m in methods]

    def one(job):
        q, m = job
        penalty = PENALTY_NAMES[m]
        ns = argparse.Namespace(**vars(args))
        ns.q = q
        lam, spec = _resolve_lambda(penalty, train.A, train.b, ns)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            res = fit(train.A, train.b, lam, _solver_config(ns, penalty))
        metrics = evaluate(res.coefficients, test)
        return {"q": q, "method": m, "test_error": metrics["misclassified"],
                "mse": metrics["mse"], "genes": res.nonzero_count, "time_s": res.wall_time,
                "iterations": res.iterations, "converged": res.converged}

    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            rows = list(pool.map(one, jobs))
    else:
        rows = [one(j) for j in jobs]
    rows.sort(key=lambda r: (r["q"], METHOD_ORDER.index(r["method"])))
    return rows


def average_rows(rows, methods):
    out = []
    for m in methods:
        sel = [r for r in rows if r["method"] == m]
        if not sel:
            continue
        avg = {"q": "Average", "method": m}
        for key in ("test_error", "mse", "genes", "time_s", "iterations"):
            avg[key] = float(np.mean([r[key] for r in sel]))
        avg["converged"] = all(r["converged"] for r in sel)
        out.append(avg)
    return out


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_sweep_csv(path, rows):
    with open(path, "w") as fh:
        fh.write(",".join(SWEEP_FIELDS) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(r[k]) for k in SWEEP_FIELDS) + "\n")


def cmd_sweep(args):
    try:
        d = load_dataset(args.data, normalize=False)
        if args.labels:
            neg, pos = _str_list(args.labels)
            d = type(d)(d.A, map_labels_binary(d.b, float(neg), float(pos)))
        if args.expect_shape:
            n, p = (int(t) for t in args.expect_shape.split("x"))
            if (d.n, d.p) != (n, p):
                raise ValueError(f"expected a {n}x{p} dataset, got {d.n}x{d.p} "
                                 f"(source: {LEUKEMIA_URL})")
        split = SplitSpec(args.train_n, args.split_seed, _class_counts(args.class_counts),
                          args.normalize)
        train, test = split_train_test(d, split)
        methods = [m for m in METHOD_ORDER if m in args.penalties]
        unknown = set(args.penalties) - set(METHOD_ORDER)
        if unknown:
            raise ValueError(f"unknown penalties {sorted(unknown)}")
        rows = run_sweep(train, test, args.q_grid, methods, args, args.parallel)
    except (OrderedL2Error, ValueError, OSError) as exc:
        _write_error(None, exc)
        return EXIT_ERROR
    rows = rows + average_rows(rows, methods)
    out = Path(args.out) if args.out else default_out_dir() / "sweep.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(out, rows)
    write_manifest(out.with_name(out.stem + ".manifest.json"), "sweep", args, [out],
                   dataset=d.fingerprint(), seeds={"split": args.split_seed})
    for r in rows:
        print(",".join(_fmt(r[k]) for k in SWEEP_FIELDS))
    return EXIT_OK


REPLAY_OUTPUT_ARGS = {
    "synth": lambda cfg, out: cfg.update(out=str(out)),
    "lambda": lambda cfg, out: cfg.update(out=str(out / Path(cfg["out"] or "lambda.csv").name)),
    "fit": lambda cfg, out: cfg.update(out_dir=str(out), trace_out=None, result_out=None),
}


def cmd_replay(args):
    with open(args.manifest) as fh:
        manifest = json.load(fh)
    command = manifest["command"]
    if command not in REPLAY_OUTPUT_ARGS:
        print(f"error: cannot replay {command!r}", file=sys.stderr)
        return EXIT_ERROR
    out = Path(args.out_dir or default_out_dir())
    out.mkdir(parents=True, exist_ok=True)
    cfg = dict(manifest["config"])
    REPLAY_OUTPUT_ARGS[command](cfg, out)
    ns = argparse.Namespace(**cfg)
    if command == "lambda":
        ns.mode = _parse_mode(ns.mode)
    elif command == "fit":
        ns.lambda_mode = _parse_mode(ns.lambda_mode)
    ns._argv = manifest.get("argv", [])
    code = COMMANDS[command](ns)
    if code != EXIT_OK:
        return code
    mismatched = []
    for name, digest in sorted(manifest["outputs"].items()):
        path = out / name
        new = output_checksum(path) if path.exists() else None
        status = "ok" if new == digest else "MISMATCH"
        if new != digest:
            mismatched.append(name)
        print(f"{status} {name}")
    return EXIT_MISMATCH if mismatched else EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "lambda": cmd_lambda,
    "fit": cmd_fit,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "replay": cmd_replay,
}


# ------------------------------------------------------------------ parser


def _add_solver_flags(p):
    p.add_argument("--q", type=float, default=None, help="BHq parameter in (0, 1]")
    p.add_argument("--lambda-mode", type=_parse_mode, default=N_EQUALS_2P,
                   help="sequence denominator mode: n=p, n=2p or n=<int> (default n=2p)")
    p.add_argument("--clip", action=argparse.BooleanOptionalAction, default=True,
                   help="replace the sequence by its running minimum")
    p.add_argument("--alpha-en", type=float, default=0.1, help="elastic-net l1 share")
    p.add_argument("--lasso-lambda", choices=("max-frac", "bh"), default="max-frac",
                   help="lasso weight rule: fraction of lambda_max or lambda_bh(1)")
    p.add_argument("--lambda-frac", type=float, default=0.1)
    p.add_argument("--lambda", dest="lambda_value", type=float, default=None,
                   help="explicit lasso weight (overrides --lasso-lambda)")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0, help="over-relaxation in [1, 1.8]")
    p.add_argument("--eps-abs", type=float, default=1e-4)
    p.add_argument("--eps-rel", type=float, default=1e-2)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--trace-every", type=int, default=1)
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True,
                   help="normalize columns of unnormalized inputs")
    p.add_argument("--labels", default=None,
                   help="NEG,POS raw labels to map to -1,+1")


def build_parser():
    parser = argparse.ArgumentParser(prog="orderedl2", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", default=None, help="JSON file of option defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic regression dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--coef-var", type=float, default=0.02)
    p.add_argument("--noise-var", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("lambda", help="write a BHq regularizing sequence as CSV")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--mode", type=_parse_mode, default="n=p")
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--clip", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--out", default=None, help="output CSV path")

    p = sub.add_parser("fit", help="fit one model by ADMM")
    p.add_argument("--data", required=True, help="dataset (.csv export or LIBSVM)")
    p.add_argument("--penalty", choices=tuple(PENALTY_NAMES), default="ol2")
    _add_solver_flags(p)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--trace-out", default=None)
    p.add_argument("--result-out", default=None)

    p = sub.add_parser("eval", help="evaluate fitted coefficients on a test set")
    p.add_argument("--data-test", required=True)
    p.add_argument("--result", required=True, help="result.json from fit")
    p.add_argument("--metrics-out", default=None)

    p = sub.add_parser("sweep", help="q x method grid on a train/test split")
    p.add_argument("--data", required=True)
    p.add_argument("--q-grid", type=_float_list, default=[0.1, 0.2, 0.3, 0.4, 0.5])
    p.add_argument("--penalties", type=_str_list, default=list(METHOD_ORDER))
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--train-n", type=int, default=38)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--class-counts", default=None, help="e.g. -1:27,1:11")
    p.add_argument("--expect-shape", default=None, help="e.g. 72x7129")
    p.add_argument("--out", default=None, help="output CSV path")
    _add_solver_flags(p)
    p.set_defaults(lasso_lambda="bh")

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", default=None)
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            defaults = json.load(fh)
        defaults = {k.replace("-", "_"): v for k, v in defaults.items()}
        for action in parser._subparsers._group_actions:
            action.choices[args.command].set_defaults(**defaults)
        args = parser.parse_args(argv)
    args._argv = list(argv)
    return args


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    command = args.command
    for k in ("command", "config", "verbose"):
        delattr(args, k)
    try:
        return COMMANDS[command](args)
    except (OrderedL2Error, ValueError) as exc:
        _write_error(None, exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
