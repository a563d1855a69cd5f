"""Command-line interface.

Subcommands:

* ``embed``          fit one consensus run on a manifest dataset and write the
                     per-view embeddings (and centroid), the per-sweep trace,
                     and a metadata echo of the full configuration
* ``bench``          repeated split/1NN-score trials of one configuration
* ``trace-plotdata`` merge trace CSVs into one long-format table for plotting
* ``apply``          map new samples through a previously saved model

All outputs are deterministic for fixed inputs and seed: files are written
atomically, floats use shortest round-trip formatting, JSON keys are sorted,
and nothing environment- or time-dependent is recorded.  Exit code 0 means
every requested output file was written.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .consensus import Hyperparams
from .dataio import (
    fmt_float,
    load_manifest,
    load_model,
    read_matrix_csv,
    save_kernel_model,
    save_projection_model,
    write_json,
    write_matrix_csv,
    write_text_atomic,
)
from .errors import DimensionMismatchError, MvcError
from .evaluation import MethodConfig, embed_dataset, run_trials
from .projection import KernelModel, KernelSpec, ProjectionModel, as_kernel_spec
from .specs import ManifoldSpec

METHOD_CHOICES = ("lle", "le", "pca", "npe", "lda")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MvcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvconsensus",
        description="Multi-view dimension reduction with cross-view similarity consensus.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    embed = sub.add_parser("embed", help="fit one run and write embeddings + trace")
    _add_data_flags(embed)
    _add_method_flags(embed)
    embed.set_defaults(func=cmd_embed)

    bench = sub.add_parser("bench", help="repeated split/score trials")
    _add_data_flags(bench)
    _add_method_flags(bench)
    bench.add_argument("--trials", type=_positive_int, default=30)
    bench.add_argument("--train-ratio", type=_ratio, default=0.7)
    bench.add_argument(
        "--eval-mode",
        choices=("transductive", "out-of-sample"),
        default="transductive",
    )
    bench.set_defaults(func=cmd_bench)

    plot = sub.add_parser("trace-plotdata", help="merge trace CSVs for plotting")
    plot.add_argument("traces", nargs="+", help="trace.csv files from embed runs")
    plot.add_argument("--out", required=True, help="output CSV path")
    plot.set_defaults(func=cmd_trace_plotdata)

    apply_p = sub.add_parser("apply", help="embed new samples with a saved model")
    apply_p.add_argument("--model", required=True, help="model directory from an embed run")
    apply_p.add_argument("--manifest", required=True, help="manifest of the new samples")
    apply_p.add_argument("--out", required=True, help="output directory")
    apply_p.set_defaults(func=cmd_apply)
    return parser


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", required=True, help="dataset manifest JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)


def _add_method_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", choices=("pairwise", "centroid"), default="pairwise")
    p.add_argument(
        "--mode",
        choices=("free", "subspace", "kernel"),
        default="free",
        help="free embeddings, linear projections, or kernel expansions",
    )
    p.add_argument(
        "--method",
        action="append",
        dest="methods",
        metavar="METHOD",
        help=f"one of {METHOD_CHOICES} or custom:M.csv[:C.csv][:maximize]; "
        "repeat per view or give once to broadcast (default: le)",
    )
    p.add_argument(
        "--dim",
        action="append",
        dest="dims",
        type=_positive_int,
        metavar="D",
        help="embedding dimension; repeat per view or give once (default: 2)",
    )
    p.add_argument("--centroid-dim", type=_positive_int, default=None)
    p.add_argument("--lambda", dest="consensus_weight", type=_nonneg_float, default=0.5)
    p.add_argument("--gamma", dest="view_weight_reg", type=_nonneg_float, default=1.0)
    p.add_argument("--r", dest="view_weight_power", type=_gt_one_float, default=2.0)
    p.add_argument("--k", type=_positive_int, default=10, help="neighbors for lle/le/npe")
    p.add_argument("--bandwidth", type=_bandwidth, default="adaptive")
    p.add_argument("--ridge", type=_nonneg_float, default=1e-3)
    p.add_argument(
        "--kernel",
        action="append",
        dest="kernels",
        metavar="KERNEL",
        help="kernel mode: linear|rbf[:BW]|polynomial[:DEG[:OFFSET]]|precomputed; "
        "repeat per view or give once (default: linear)",
    )
    p.add_argument("--max-iters", dest="max_iters", type=_positive_int, default=100)
    p.add_argument("--tol", type=_positive_float, default=1e-6)
    p.add_argument(
        "--readout",
        choices=("concat", "centroid"),
        default=None,
        help="which embedding bench scores (default: centroid scheme -> centroid, else concat)",
    )


def cmd_embed(args) -> int:
    dataset = load_manifest(args.manifest)
    config, method_tokens = _method_config(args, dataset)
    out = Path(args.out)
    _, fitted = embed_dataset(dataset, config, seed=args.seed)
    result = fitted.result if isinstance(fitted, (ProjectionModel, KernelModel)) else fitted
    for v, emb in enumerate(result.embeddings):
        write_matrix_csv(out / f"embedding_view{v:02d}.csv", emb)
    if result.centroid is not None:
        write_matrix_csv(out / "centroid.csv", result.centroid)
    write_text_atomic(out / "trace.csv", _trace_csv_text(result))
    if isinstance(fitted, ProjectionModel):
        save_projection_model(fitted, out / "model")
    elif isinstance(fitted, KernelModel):
        save_kernel_model(fitted, out / "model")
    meta = _metadata(args, dataset, config, method_tokens)
    meta["converged"] = bool(result.converged)
    meta["iterations_used"] = int(result.iterations_used)
    meta["final_objective"] = float(result.objective_trace[-1])
    meta["alpha"] = [float(a) for a in result.alpha]
    write_json(out / "metadata.json", meta)
    return 0


def cmd_bench(args) -> int:
    dataset = load_manifest(args.manifest)
    config, method_tokens = _method_config(args, dataset)
    config.eval_mode = args.eval_mode.replace("-", "_")
    out = Path(args.out)
    report = run_trials(dataset, config, args.trials, args.seed, args.train_ratio)
    lines = ["trial,accuracy"]
    for t, acc in enumerate(report.accuracies):
        lines.append(f"{t},{fmt_float(acc)}")
    write_text_atomic(out / "trials.csv", "\n".join(lines) + "\n")
    summary = {
        "mean_accuracy": report.mean_accuracy,
        "max_accuracy": report.max_accuracy,
        "accuracies": report.accuracies,
        "config": report.config,
    }
    write_json(out / "summary.json", summary)
    meta = _metadata(args, dataset, config, method_tokens)
    meta["trials"] = int(args.trials)
    meta["train_ratio"] = float(args.train_ratio)
    meta["eval_mode"] = config.eval_mode
    write_json(out / "metadata.json", meta)
    return 0


def cmd_trace_plotdata(args) -> int:
    run_ids = _unique_run_ids(args.traces)
    lines = ["run_id,iteration,objective"]
    for path, run_id in zip(args.traces, run_ids):
        mat, header = _read_trace(path)
        it_col = header.index("iteration")
        obj_col = header.index("objective")
        for row in mat:
            lines.append(f"{_csv_quote(run_id)},{int(row[it_col])},{fmt_float(row[obj_col])}")
    write_text_atomic(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_apply(args) -> int:
    model = load_model(args.model)
    dataset = load_manifest(args.manifest)
    out = Path(args.out)
    embeddings = model.transform_views(dataset.views)
    for v, emb in enumerate(embeddings):
        write_matrix_csv(out / f"embedding_view{v:02d}.csv", emb)
    write_json(
        out / "metadata.json",
        {
            "command": "apply",
            "package_version": __version__,
            "model": str(args.model),
            "manifest": str(args.manifest),
            "dataset": dataset.name,
            "n_samples": int(dataset.n_samples),
            "n_views": int(dataset.n_views),
        },
    )
    return 0


def _method_config(args, dataset) -> tuple[MethodConfig, list[str]]:
    m = dataset.n_views
    method_tokens = args.methods or ["le"]
    if len(method_tokens) == 1:
        method_tokens = method_tokens * m
    if len(method_tokens) != m:
        raise MvcError(f"{len(method_tokens)} --method flags for {m} views")
    methods = [_parse_method(tok, dataset.n_samples) for tok in method_tokens]
    dims = args.dims or [2]
    if len(dims) == 1:
        dims = dims * m
    if len(dims) != m:
        raise MvcError(f"{len(dims)} --dim flags for {m} views")
    hp = Hyperparams(
        consensus_weight=args.consensus_weight,
        view_weight_reg=args.view_weight_reg,
        view_weight_power=args.view_weight_power,
        dims=dims,
        centroid_dim=args.centroid_dim,
        max_iter=args.max_iters,
        tol=args.tol,
    )
    kernels = [_parse_kernel(tok) for tok in (args.kernels or ["linear"])]
    if len(kernels) == 1:
        kernels = kernels * m
    if len(kernels) != m:
        raise MvcError(f"{len(kernels)} --kernel flags for {m} views")
    config = MethodConfig(
        scheme=args.scheme,
        methods=methods,
        hyper=hp,
        mode=args.mode,
        kernels=kernels,
        k=args.k,
        ridge=args.ridge,
        bandwidth=args.bandwidth,
        readout=args.readout,
    )
    return config, list(method_tokens)


def _parse_method(token: str, n_samples: int):
    if token in METHOD_CHOICES:
        return token
    if token.startswith("custom:"):
        return _custom_spec(token, n_samples)
    raise MvcError(
        f"unknown method {token!r}; expected one of {METHOD_CHOICES} or custom:M.csv[:C.csv][:maximize]"
    )


def _custom_spec(token: str, n_samples: int) -> ManifoldSpec:
    """Build a spec from 'custom:M.csv[:C.csv][:maximize|minimize]'.

    Matrix files hold the n x n structure (and optional constraint); paths are
    resolved relative to the working directory.  An empty constraint field
    means the identity.
    """
    parts = token.split(":")[1:]
    if not parts or not parts[0]:
        raise MvcError(f"custom method needs a structure matrix file: {token!r}")
    sense = "minimize"
    if parts and parts[-1] in ("minimize", "maximize"):
        sense = parts[-1]
        parts = parts[:-1]
    if len(parts) > 2:
        raise MvcError(f"too many ':' fields in custom method {token!r}")
    structure = read_matrix_csv(parts[0])
    constraint = None
    if len(parts) == 2 and parts[1]:
        constraint = read_matrix_csv(parts[1])
    spec = ManifoldSpec(structure, constraint, sense=sense, method="custom")
    if spec.n_samples != n_samples:
        raise DimensionMismatchError(
            f"custom matrix {parts[0]} is {spec.n_samples}x{spec.n_samples} "
            f"but the dataset has {n_samples} samples"
        )
    return spec


def _parse_kernel(token: str) -> KernelSpec:
    try:
        return as_kernel_spec(token)
    except ValueError as exc:
        raise MvcError(f"bad kernel token {token!r}: {exc}") from None


def _metadata(args, dataset, config: MethodConfig, method_tokens: list[str]) -> dict:
    hp = config.hyper
    return {
        "command": args.command,
        "package_version": __version__,
        "manifest": str(args.manifest),
        "dataset": dataset.name,
        "n_samples": int(dataset.n_samples),
        "n_views": int(dataset.n_views),
        "view_names": list(dataset.view_names),
        "scheme": config.scheme,
        "mode": config.mode,
        "methods": list(method_tokens),
        "dims": [int(d) for d in hp.dims_list(dataset.n_views, dataset.n_samples)],
        "centroid_dim": hp.centroid_dim,
        "consensus_weight": hp.consensus_weight,
        "view_weight_reg": hp.view_weight_reg,
        "view_weight_power": hp.view_weight_power,
        "k": int(config.k),
        "bandwidth": config.bandwidth,
        "ridge": config.ridge,
        "kernels": [
            {"kind": ks.kind, "bandwidth": ks.bandwidth, "degree": ks.degree, "offset": ks.offset}
            for ks in (config.kernels if isinstance(config.kernels, list) else [])
        ]
        if config.mode == "kernel"
        else None,
        "max_iters": int(hp.max_iter),
        "tol": hp.tol,
        "seed": int(args.seed),
        "seed_scheme": "trial i uses numpy SeedSequence(entropy=seed, spawn_key=(i,))",
        "readout": config.readout_resolved(),
    }


def _trace_csv_text(result) -> str:
    m = len(result.embeddings)
    cols = ["iteration", "objective"]
    cols += [f"alpha_view{v:02d}" for v in range(m)]
    cols += [f"residual_view{v:02d}" for v in range(m)]
    has_centroid = result.records[0].centroid_residual is not None
    if has_centroid:
        cols.append("residual_centroid")
    lines = [",".join(cols)]
    for rec in result.records:
        row = [str(rec.iteration), fmt_float(rec.objective)]
        row += [fmt_float(a) for a in rec.alpha]
        row += [fmt_float(x) for x in rec.view_residuals]
        if has_centroid:
            row.append(fmt_float(rec.centroid_residual))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _read_trace(path):
    import csv as _csv

    from .errors import MissingFileError, ParseError

    p = Path(path)
    if not p.is_file():
        raise MissingFileError(f"no such trace file: {p}")
    with open(p, newline="", encoding="utf-8") as fh:
        rows = list(_csv.reader(fh))
    if not rows or "iteration" not in rows[0] or "objective" not in rows[0]:
        raise ParseError("not a trace file (missing iteration/objective header)", path=str(p), line=1)
    header = rows[0]
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            data.append([float(x) for x in row])
        except ValueError:
            raise ParseError("non-numeric trace row", path=str(p), line=lineno) from None
    return data, header


def _unique_run_ids(paths) -> list[str]:
    """Shortest distinguishing names: stem, then parent/stem, then full path."""
    stems = [Path(t).stem for t in paths]
    if len(set(stems)) == len(stems):
        return stems
    withparent = [
        f"{Path(t).parent.name}/{Path(t).stem}" if Path(t).parent.name else Path(t).stem
        for t in paths
    ]
    if len(set(withparent)) == len(withparent):
        return withparent
    return [str(t) for t in paths]


def _csv_quote(text: str) -> str:
    if any(c in text for c in ",\"\n"):
        return '"' + text.replace('"', '""') + '"'
    return text


def _positive_int(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return val


def _positive_float(text: str) -> float:
    val = float(text)
    if val <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return val


def _nonneg_float(text: str) -> float:
    val = float(text)
    if val < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return val


def _gt_one_float(text: str) -> float:
    val = float(text)
    if val <= 1:
        raise argparse.ArgumentTypeError(f"must be > 1, got {text}")
    return val


def _ratio(text: str) -> float:
    val = float(text)
    if not 0.0 < val < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {text}")
    return val


def _bandwidth(text: str):
    if text == "adaptive":
        return text
    val = float(text)
    if val <= 0:
        raise argparse.ArgumentTypeError(f"bandwidth must be positive or 'adaptive', got {text}")
    return val


if __name__ == "__main__":
    sys.exit(main())
