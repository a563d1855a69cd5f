"""File formats: matrix CSVs, label files, dataset manifests, fitted models.

Everything here is written deterministically — floats use ``repr`` (shortest
round-trip), JSON keys are sorted, and no timestamps or environment details
are recorded — so identical runs produce byte-identical files.  Writes go to
a temporary file in the target directory followed by an atomic rename, so a
crash never leaves a partial file behind.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import MissingFileError, ParseError
from .evaluation import ViewDataset
from .projection import KernelModel, KernelSpec, ProjectionModel

MANIFEST_VERSION = 1
MODEL_VERSION = 1


def fmt_float(x) -> str:
    """Shortest decimal string that round-trips to the same float64."""
    return repr(float(x))


def write_text_atomic(path, text: str) -> None:
    """Write a file via a same-directory temp file and atomic rename."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=target.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json(path, obj) -> None:
    write_text_atomic(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def matrix_csv_text(arr) -> str:
    a = np.asarray(arr, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D array, got ndim={a.ndim}")
    lines = [",".join(fmt_float(x) for x in row) for row in a]
    return "\n".join(lines) + "\n"


def write_matrix_csv(path, arr) -> None:
    """Matrix as plain CSV, one row per line, no header."""
    write_text_atomic(path, matrix_csv_text(arr))


def read_matrix_csv(path) -> np.ndarray:
    """Numeric CSV into a float64 matrix.

    A header line is assumed when (and only when) the first cell of the first
    row does not parse as a number; every other parse failure reports its
    file, line, and column.
    """
    p = Path(path)
    if not p.is_file():
        raise MissingFileError(f"no such file: {p}")
    rows: list[list[float]] = []
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue
            if lineno == 1 and not _is_number(row[0]):
                continue  # header
            parsed = []
            for col, cell in enumerate(row, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"cell {cell!r} is not a number", path=str(p), line=lineno, column=col
                    ) from None
            if rows and len(parsed) != len(rows[0]):
                raise ParseError(
                    f"row has {len(parsed)} cells, expected {len(rows[0])}",
                    path=str(p),
                    line=lineno,
                )
            rows.append(parsed)
    if not rows:
        raise ParseError("file contains no data rows", path=str(p), line=1)
    return np.array(rows, dtype=float)


def write_labels(path, labels) -> None:
    lab = np.asarray(labels)
    write_text_atomic(path, "\n".join(str(int(x)) for x in lab) + "\n")


def read_labels(path) -> np.ndarray:
    """Label file: one integer per line, optional single header line."""
    p = Path(path)
    if not p.is_file():
        raise MissingFileError(f"no such file: {p}")
    out: list[int] = []
    with open(p, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                out.append(int(text))
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise ParseError(
                    f"label {text!r} is not an integer", path=str(p), line=lineno
                ) from None
    if not out:
        raise ParseError("label file contains no labels", path=str(p), line=1)
    return np.array(out, dtype=int)


def load_manifest(path) -> ViewDataset:
    """Load a JSON dataset manifest and every file it references.

    Schema (format_version 1): ``{"format_version": 1, "name": ...,
    "labels": "labels.csv", "views": [{"name": ..., "path": "v0.csv",
    "kernel": {"kind": "rbf", "bandwidth": 1.0}}, ...]}``.  Paths are
    relative to the manifest's directory.  Feature CSVs hold samples as rows;
    they are transposed into the package's features-by-samples layout.
    """
    p = Path(path)
    if not p.is_file():
        raise MissingFileError(f"no such manifest: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"manifest is not valid JSON: {exc.msg}",
            path=str(p),
            line=exc.lineno,
            column=exc.colno,
        ) from None
    if not isinstance(doc, dict):
        raise ParseError("manifest must be a JSON object", path=str(p), line=1)
    version = doc.get("format_version")
    if version != MANIFEST_VERSION:
        raise ParseError(
            f"unsupported manifest format_version {version!r} (expected {MANIFEST_VERSION})",
            path=str(p),
        )
    views_decl = doc.get("views")
    if not isinstance(views_decl, list) or not views_decl:
        raise ParseError("manifest must declare a non-empty 'views' list", path=str(p))
    if "labels" not in doc:
        raise ParseError("manifest must declare a 'labels' path", path=str(p))
    base = p.parent
    views = []
    names = []
    kernels: list[KernelSpec | None] = []
    for i, entry in enumerate(views_decl):
        if not isinstance(entry, dict) or "path" not in entry:
            raise ParseError(f"views[{i}] must be an object with a 'path'", path=str(p))
        mat = read_matrix_csv(base / entry["path"])
        views.append(mat.T)  # manifest CSVs are samples-by-features
        names.append(str(entry.get("name", f"view{i}")))
        kernels.append(_kernel_from_json(entry.get("kernel"), p, i))
    labels = read_labels(base / doc["labels"])
    return ViewDataset(
        views,
        labels,
        name=str(doc.get("name", p.stem)),
        view_names=names,
        kernels=kernels,
    )


def _kernel_from_json(obj, manifest_path, view_index) -> KernelSpec | None:
    if obj is None:
        return None
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError(
            f"views[{view_index}].kernel must be an object with a 'kind'",
            path=str(manifest_path),
        )
    kind = obj["kind"]
    if kind not in ("linear", "rbf", "polynomial", "precomputed"):
        raise ParseError(
            f"views[{view_index}].kernel.kind {kind!r} is not supported",
            path=str(manifest_path),
        )
    return KernelSpec(
        kind=kind,
        bandwidth=obj.get("bandwidth"),
        degree=int(obj.get("degree", 3)),
        offset=float(obj.get("offset", 1.0)),
    )


# --- fitted-model serialization ----------------------------------------------

def save_projection_model(model: ProjectionModel, out_dir) -> None:
    """One CSV of projection weights per view plus a model.json descriptor."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for v, w in enumerate(model.projections):
        fname = f"projection_view{v:02d}.csv"
        write_matrix_csv(out / fname, w)
        files.append(fname)
    meta = {
        "format_version": MODEL_VERSION,
        "type": "projection",
        "n_views": len(model.projections),
        "projection_files": files,
        "dims": [int(w.shape[1]) for w in model.projections],
        "alpha": [float(a) for a in model.alpha] if model.result else None,
        "scheme": model.result.scheme if model.result else None,
        "converged": bool(model.result.converged) if model.result else None,
        "iterations_used": int(model.result.iterations_used) if model.result else None,
    }
    write_json(out / "model.json", meta)


def load_projection_model(model_dir) -> ProjectionModel:
    meta = _load_model_json(model_dir, "projection")
    base = Path(model_dir)
    projections = [read_matrix_csv(base / f) for f in meta["projection_files"]]
    return ProjectionModel(projections=projections, result=None)


def save_kernel_model(model: KernelModel, out_dir) -> None:
    """Coefficient and training-feature CSVs per view plus model.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    coef_files = []
    feat_files: list[str | None] = []
    for v, b in enumerate(model.coefficients):
        fname = f"coefficients_view{v:02d}.csv"
        write_matrix_csv(out / fname, b)
        coef_files.append(fname)
        if model.train_features[v] is not None:
            ffname = f"train_features_view{v:02d}.csv"
            write_matrix_csv(out / ffname, model.train_features[v])
            feat_files.append(ffname)
        else:
            feat_files.append(None)
    meta = {
        "format_version": MODEL_VERSION,
        "type": "kernel",
        "n_views": len(model.coefficients),
        "coefficient_files": coef_files,
        "train_feature_files": feat_files,
        "kernels": [
            {
                "kind": ks.kind,
                "bandwidth": None if ks.bandwidth is None else float(ks.bandwidth),
                "degree": int(ks.degree),
                "offset": float(ks.offset),
            }
            for ks in model.kernels
        ],
        "dims": [int(b.shape[1]) for b in model.coefficients],
        "alpha": [float(a) for a in model.alpha] if model.result else None,
        "scheme": model.result.scheme if model.result else None,
        "converged": bool(model.result.converged) if model.result else None,
        "iterations_used": int(model.result.iterations_used) if model.result else None,
    }
    write_json(out / "model.json", meta)


def load_kernel_model(model_dir) -> KernelModel:
    meta = _load_model_json(model_dir, "kernel")
    base = Path(model_dir)
    coefficients = [read_matrix_csv(base / f) for f in meta["coefficient_files"]]
    feats = [
        None if f is None else read_matrix_csv(base / f)
        for f in meta["train_feature_files"]
    ]
    kernels = [
        KernelSpec(
            kind=k["kind"],
            bandwidth=k["bandwidth"],
            degree=k["degree"],
            offset=k["offset"],
        )
        for k in meta["kernels"]
    ]
    return KernelModel(
        coefficients=coefficients, kernels=kernels, train_features=feats, result=None
    )


def load_model(model_dir):
    """Load either model flavor by inspecting model.json."""
    meta = _load_model_json(model_dir, None)
    if meta["type"] == "projection":
        return load_projection_model(model_dir)
    return load_kernel_model(model_dir)


def _load_model_json(model_dir, expected_type) -> dict:
    p = Path(model_dir) / "model.json"
    if not p.is_file():
        raise MissingFileError(f"no model descriptor: {p}")
    try:
        meta = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"model.json is not valid JSON: {exc.msg}",
            path=str(p),
            line=exc.lineno,
            column=exc.colno,
        ) from None
    if meta.get("format_version") != MODEL_VERSION:
        raise ParseError(
            f"unsupported model format_version {meta.get('format_version')!r}", path=str(p)
        )
    if meta.get("type") not in ("projection", "kernel"):
        raise ParseError(f"unknown model type {meta.get('type')!r}", path=str(p))
    if expected_type is not None and meta["type"] != expected_type:
        raise ParseError(
            f"expected a {expected_type} model, found {meta['type']!r}", path=str(p)
        )
    return meta


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False
