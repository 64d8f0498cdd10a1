"""Command-line front end: ``egmm gen | fit | sweep | eval | fuse``.

Exit status is 0 on success, 2 for bad parameters or paths, 3 for bad
data and 4 for numerical failures. ``EVID_THREADS`` caps the worker
threads of the linear-algebra backend.
"""

from __future__ import annotations

import argparse
import os
import sys
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from . import io
from .core import EgmmConfig, egmm_fit
from .datagen import PRESETS, gen_phantom
from .errors import DataError, EgmmError, ParameterError
from .gmm import gmm_fit, gmm_responsibilities
from .kmeans import kmeans_fit
from .metrics import evaluate
from .partition import (
    EvidentialPartition,
    ambiguity_count,
    embed_partition,
    fuse_partitions,
    hard_credal,
    harden_betp,
    parse_cluster_map,
)
from .selection import sweep

ALGORITHMS = ("egmm", "gmm", "cgmm", "hcm")
GEN_PRESETS = (*PRESETS, "phantom")


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ParameterError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _load(args):
    ds = io.read_dataset_csv(args.input, args.label_col, args.standardize)
    if ds.N < 2:
        raise DataError(f"{args.input}: need at least two rows, got {ds.N}")
    return ds


def _egmm_config(args, C: int) -> EgmmConfig:
    return EgmmConfig(
        C=C,
        kappa=args.kappa,
        tol=args.tol,
        max_iter=args.max_iter,
        restarts=args.restarts,
        seed=args.seed,
    )


def _write_egmm(out: Path, model, part: EvidentialPartition, prefix: str = "") -> np.ndarray:
    labels = harden_betp(part)
    io.write_json(model.to_dict(), out / f"{prefix}model.json")
    io.write_json(part.to_dict(), out / f"{prefix}partition.json")
    io.write_partition_csv(part, out / f"{prefix}partition.csv")
    io.write_view_csv(hard_credal(part), labels, out / f"{prefix}view.csv")
    io.write_labels_csv(labels, out / f"{prefix}labels.csv")
    return labels


def _context(ds, args, exc: EgmmError) -> EgmmError:
    """Re-raise a fit failure with the dataset it came from."""
    return type(exc)(f"{args.input} (N={ds.N}, D={ds.D}): {exc}")


def cmd_gen(args) -> int:
    out = Path(args.out)
    if args.preset == "phantom":
        ph = gen_phantom(args.seed)
        stem = out.with_suffix("")
        for c, ch in enumerate(ph.channels, start=1):
            path = stem.with_name(f"{stem.name}_t{c}.csv")
            io.write_dataset_csv(ch, path)
            io.write_pgm(ph.image(c - 1), stem.with_name(f"{stem.name}_t{c}.pgm"), 0.0, 1.0)
            print(f"{path}: {ch.N} rows, {ch.D + 1} columns")
        io.write_pgm(ph.regions, stem.with_name(f"{stem.name}_truth.pgm"), 0, 3)
        return 0
    ds = PRESETS[args.preset](args.seed)
    io.write_dataset_csv(ds, out)
    print(f"{out}: {ds.N} rows, {ds.D + (ds.labels is not None)} columns")
    return 0


def cmd_fit(args) -> int:
    ds = _load(args)
    out = _out_dir(args.out)
    try:
        if args.algorithm == "egmm":
            model, part = egmm_fit(ds.X, _egmm_config(args, args.C))
            labels = _write_egmm(out, model, part)
            summary = f"loglik={model.loglik:.6f} iterations={model.iterations}"
            if not model.converged:
                summary += " (max_iter reached)"
        elif args.algorithm in ("gmm", "cgmm"):
            mode = "free" if args.algorithm == "gmm" else "shared"
            model = gmm_fit(
                ds.X, args.C, mode, args.tol, args.max_iter, args.seed, args.restarts
            )
            labels = gmm_responsibilities(ds.X, model).argmax(axis=1) + 1
            io.write_json(model.to_dict(), out / "model.json")
            io.write_labels_csv(labels, out / "labels.csv")
            summary = f"loglik={model.loglik:.6f} iterations={model.iterations}"
        else:
            km = kmeans_fit(ds.X, args.C, args.restarts, args.seed)
            labels = km.assignment
            io.write_labels_csv(labels, out / "labels.csv")
            summary = f"inertia={km.inertia:.6f} iterations={km.n_iter}"
    except EgmmError as exc:
        raise _context(ds, args, exc) from exc
    if ds.labels is not None:
        io.write_json(evaluate(labels, ds.labels), out / "metrics.json")
    print(summary)
    return 0


def cmd_sweep(args) -> int:
    if args.cmin > args.cmax:
        raise ParameterError(f"--cmin {args.cmin} exceeds --cmax {args.cmax}")
    ds = _load(args)
    out = _out_dir(args.out)
    try:
        result = sweep(ds.X, args.cmin, args.cmax, _egmm_config(args, args.cmin))
    except EgmmError as exc:
        raise _context(ds, args, exc) from exc
    io.write_csv(
        out / "sweep.csv",
        ["C", "ebic", "loglik", "n_params", "iterations", "converged"],
        [list(r.values()) for r in result.to_rows()],
    )
    for r in result.records:
        if not r.ok:
            print(f"warning: C={r.C} failed: {r.error}", file=sys.stderr)
    best = result.best
    labels = _write_egmm(out, best.model, best.partition, prefix="selected_")
    if ds.labels is not None:
        io.write_json(evaluate(labels, ds.labels), out / "selected_metrics.json")
    print(f"selected C={result.best_C} ebic={best.ebic:.6f}")
    return 0


def _read_predictions(path) -> np.ndarray:
    if Path(path).suffix.lower() == ".json":
        return harden_betp(io.read_partition_json(path))
    return io.read_labels_csv(path, "label")


def cmd_eval(args) -> int:
    pred = _read_predictions(args.pred)
    truth = io.read_labels_csv(args.truth, args.label_col)
    if pred.size != truth.size:
        raise ParameterError(f"{pred.size} predictions but {truth.size} truth labels")
    scores = evaluate(pred, truth)
    if args.out:
        io.write_json(scores, args.out)
    for k, v in scores.items():
        print(f"{k}={v:.6f}")
    return 0


def cmd_fuse(args) -> int:
    parts = [io.read_partition_json(p) for p in args.partitions]
    if args.map:
        if len(args.map) != len(parts):
            raise ParameterError(f"got {len(args.map)} --map flags for {len(parts)} partitions")
        C = args.classes or max(max(max(t) for t in parse_cluster_map(m).values()) for m in args.map)
        parts = [embed_partition(p, parse_cluster_map(m), C) for p, m in zip(parts, args.map)]
    out = _out_dir(args.out)
    fused = fuse_partitions(parts)
    view = hard_credal(fused.partition)
    labels = harden_betp(fused.partition)
    io.write_json(fused.partition.to_dict(), out / "fused_partition.json")
    io.write_partition_csv(fused.partition, out / "fused_partition.csv")
    io.write_view_csv(view, labels, out / "fused_view.csv")
    io.write_labels_csv(labels, out / "fused_labels.csv")
    dead = np.flatnonzero(fused.total_conflict) + 1
    before = [ambiguity_count(hard_credal(p)) for p in parts]
    summary = {
        "inputs": [str(p) for p in args.partitions],
        "ambiguity_before": before,
        "ambiguity_after": ambiguity_count(view),
        "total_conflict_objects": dead.tolist(),
    }
    io.write_json(summary, out / "fusion_summary.json")
    if dead.size:
        print(
            f"warning: {dead.size} object(s) in total conflict set to vacuous: "
            f"{', '.join(map(str, dead[:20]))}{' ...' if dead.size > 20 else ''}",
            file=sys.stderr,
        )
    print(f"ambiguity before={before} after={summary['ambiguity_after']}")
    return 0


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _add_data_args(p):
    p.add_argument("input", help="CSV file with a header row")
    p.add_argument("--label-col", help="column holding true labels (excluded from features)")
    p.add_argument("--standardize", action="store_true", help="z-score every feature")


def _add_fit_args(p):
    p.add_argument("--kappa", type=int, help="largest focal-set cardinality (egmm)")
    p.add_argument("--tol", type=_positive_float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="egmm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic dataset")
    p.add_argument("--preset", required=True, choices=GEN_PRESETS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV path (phantom: stem for the channel files)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fit", help="fit one clustering model")
    _add_data_args(p)
    p.add_argument("--algorithm", choices=ALGORITHMS, default="egmm")
    p.add_argument("-C", "--clusters", dest="C", type=int, required=True)
    _add_fit_args(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="choose the number of clusters by EBIC")
    _add_data_args(p)
    p.add_argument("--cmin", type=int, default=2)
    p.add_argument("--cmax", type=int, default=6)
    _add_fit_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="score predictions against true labels")
    p.add_argument("--pred", required=True, help="labels CSV or partition JSON")
    p.add_argument("--truth", required=True, help="CSV holding the true labels")
    p.add_argument("--label-col", default="label")
    p.add_argument("--out", help="metrics JSON path (default: print only)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("fuse", help="Dempster-combine evidential partitions")
    p.add_argument("partitions", nargs="+", help="partition JSON files")
    p.add_argument(
        "--map",
        action="append",
        help='local-to-global cluster map per input, e.g. "1=1;2=2,3" (repeat once per input)',
    )
    p.add_argument("--classes", type=int, help="size of the global frame (default: largest mapped index)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_fuse)
    return parser


def _thread_limit():
    raw = os.environ.get("EVID_THREADS")
    if not raw:
        return nullcontext()
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(f"EVID_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ParameterError(f"EVID_THREADS must be >= 1, got {n}")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with _thread_limit():
            return args.func(args)
    except EgmmError as exc:
        print(f"egmm {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"egmm {args.command}: error: {exc}", file=sys.stderr)
        return ParameterError.exit_code


if __name__ == "__main__":
    sys.exit(main())
