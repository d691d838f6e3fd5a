"""Digit-dataset benchmark runner over 34x34 binary event recordings.

Expects the published directory layout: a root with Train/ and Test/
folders, each holding one subfolder per digit class full of .bin event
files.  Each file is one recording and receives one label, so
classification uses one whole-stream histogram per file (window size 0)
rather than fixed event windows.

Files are processed lazily one at a time; only sampled descriptors and
per-file histograms stay in memory.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import pca as pca_mod
from .classifier import classify_batch, train as svm_train
from .dictionary import learn
from .errors import DataError
from .events import NMNIST_GEOMETRY, parse_nmnist_bin
from .filtering import FilterConfig, cascade
from .kdtree import build, descend_batch
from .pipeline import extract_stream_descriptors
from .rect import RectConfig


def discover(root: str | Path, split: str, limit_per_class: int | None = None) -> list[tuple[str, Path]]:
    """Sorted (label, path) pairs for one split directory."""
    base = Path(root) / split
    if not base.is_dir():
        raise DataError(f"dataset split directory not found: {base}")
    out: list[tuple[str, Path]] = []
    for class_dir in sorted(p for p in base.iterdir() if p.is_dir()):
        files = sorted(class_dir.glob("*.bin"))
        if limit_per_class is not None:
            files = files[:limit_per_class]
        out.extend((class_dir.name, f) for f in files)
    if not out:
        raise DataError(f"no .bin recordings under {base}")
    return out


def _file_descriptors(path: Path, filter_cfg: FilterConfig, rect_cfg: RectConfig) -> np.ndarray:
    stream = parse_nmnist_bin(path.read_bytes())
    filtered = cascade(stream, filter_cfg)
    if len(filtered) == 0:
        return np.empty((0, rect_cfg.dim), dtype=np.float64)
    desc, _ = extract_stream_descriptors(NMNIST_GEOMETRY, rect_cfg, filtered)
    return desc


def run_benchmark(
    root: str | Path,
    k: int = 3000,
    energy: float = 0.95,
    seed: int = 0,
    sample_cap: int = 200_000,
    limit_train: int | None = None,
    limit_test: int | None = None,
    svm_lambda: float = 1e-4,
    svm_epochs: int = 200,
    log=None,
) -> dict:
    """Train on Train/, score on Test/, return accuracy and stage stats.

    limit_train / limit_test cap the number of files per class for
    shortened runs; None uses every file.
    """
    say = log or (lambda msg: None)
    filter_cfg = FilterConfig()
    rect_cfg = RectConfig()
    train_files = discover(root, "Train", limit_train)
    test_files = discover(root, "Test", limit_test)
    say(f"{len(train_files)} training files, {len(test_files)} test files")

    rng = np.random.default_rng(seed)
    quota = max(1, sample_cap // len(train_files))
    sampled: list[np.ndarray] = []
    for _, path in train_files:
        desc = _file_descriptors(path, filter_cfg, rect_cfg)
        if len(desc) == 0:
            continue
        take = min(quota, len(desc))
        rows = rng.choice(len(desc), size=take, replace=False)
        sampled.append(desc[np.sort(rows)])
    if not sampled:
        raise DataError("no descriptors sampled from the training split")
    samples = np.concatenate(sampled, axis=0)
    say(f"sampled {len(samples)} descriptors")

    model = pca_mod.fit(samples, energy=energy)
    say(f"pca kept {model.n_components} dims ({model.energy_kept:.4f} energy)")
    dictionary = learn(pca_mod.project(model, samples), k, seed=seed, feature_space="pca-rect")
    tree = build(dictionary.centroids)
    say(f"dictionary {dictionary.k}, tree depth {tree.depth}")

    def histogram_of(path: Path) -> np.ndarray | None:
        desc = _file_descriptors(path, filter_cfg, rect_cfg)
        if len(desc) == 0:
            return None
        leaves = descend_batch(tree, pca_mod.project(model, desc))
        return np.bincount(leaves, minlength=tree.n_points)

    hists = np.zeros((len(train_files), tree.n_points), dtype=np.float32)
    labels: list[str] = []
    kept_rows = 0
    for label, path in train_files:
        h = histogram_of(path)
        if h is None:
            continue
        hists[kept_rows] = h
        labels.append(label)
        kept_rows += 1
    hists = hists[:kept_rows]
    say(f"{kept_rows} training histograms")

    svm = svm_train(hists, labels, lam=svm_lambda, epochs=svm_epochs, seed=seed)

    correct = 0
    scored = 0
    for label, path in test_files:
        h = histogram_of(path)
        if h is None:
            continue
        predicted, _ = classify_batch(svm, h[None, :])
        scored += 1
        if predicted[0] == label:
            correct += 1
    accuracy = correct / scored if scored else 0.0
    say(f"test accuracy {accuracy:.4f} over {scored} files")
    return {
        "accuracy": accuracy,
        "n_train": kept_rows,
        "n_test": scored,
        "pca_dims": model.n_components,
        "dictionary_k": dictionary.k,
        "tree_depth": tree.depth,
    }
