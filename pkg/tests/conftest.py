"""Shared helpers for the test suite."""

import json

import numpy as np
import pytest

from mvconsensus.dataio import write_json, write_matrix_csv, write_text_atomic


def random_sym(n: int, seed: int) -> np.ndarray:
    a = np.random.default_rng(seed).normal(size=(n, n))
    return (a + a.T) / 2.0


def random_spd(n: int, seed: int, jitter: float = 0.5) -> np.ndarray:
    a = np.random.default_rng(seed).normal(size=(n, n))
    return a @ a.T + jitter * np.eye(n)


def random_views(seed: int, n: int = 20, dims=(4, 3)) -> list:
    rng = np.random.default_rng(seed)
    latent = rng.normal(size=(2, n))
    views = []
    for i, d in enumerate(dims):
        amap = rng.normal(size=(d, 2))
        views.append(amap @ latent + 0.1 * rng.normal(size=(d, n)))
    return views


@pytest.fixture
def manifest_dir(tmp_path):
    """Write a small 2-view dataset manifest; returns (manifest_path, dataset_dir)."""
    rng = np.random.default_rng(42)
    n = 18
    labels = np.repeat([0, 1, 2], 6)
    latent = np.vstack([labels + 1.0, -labels.astype(float)]) + 0.2 * rng.normal(size=(2, n))
    views = [
        rng.normal(size=(4, 2)) @ latent + 0.05 * rng.normal(size=(4, n)),
        rng.normal(size=(3, 2)) @ latent + 0.05 * rng.normal(size=(3, n)),
    ]
    data = tmp_path / "data"
    data.mkdir()
    for v, x in enumerate(views):
        write_matrix_csv(data / f"view{v}.csv", x.T)  # manifest files hold samples as rows
    write_text_atomic(data / "labels.txt", "\n".join(str(int(c)) for c in labels) + "\n")
    manifest = {
        "format_version": 1,
        "name": "toy",
        "labels": "labels.txt",
        "views": [
            {"name": "first", "path": "view0.csv"},
            {"name": "second", "path": "view1.csv"},
        ],
    }
    out = data / "manifest.json"
    write_json(out, manifest)
    return out, data


def write_manifest(dirpath, views, labels, name="ds", kernels=None):
    """Write views (D_v x N) + labels as a manifest tree; returns manifest path."""
    dirpath.mkdir(parents=True, exist_ok=True)
    entries = []
    for v, x in enumerate(views):
        write_matrix_csv(dirpath / f"view{v}.csv", np.asarray(x).T)
        entry = {"name": f"v{v}", "path": f"view{v}.csv"}
        if kernels is not None and kernels[v] is not None:
            entry["kernel"] = kernels[v]
        entries.append(entry)
    write_text_atomic(
        dirpath / "labels.txt", "\n".join(str(int(c)) for c in labels) + "\n"
    )
    path = dirpath / "manifest.json"
    write_json(
        path,
        {"format_version": 1, "name": name, "labels": "labels.txt", "views": entries},
    )
    return path


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
