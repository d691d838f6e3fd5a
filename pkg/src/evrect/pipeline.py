"""End-to-end orchestration: training, windowed inference, detection,
benchmarking, and the bundle mapping that makes a trained pipeline a
single reloadable artifact.

Two inference profiles share one trained bundle.  The float profile
descends the float tree and scores with the trained SVM; the hardware
profile descends the packed quantized tree and accumulates fixed-point
integer scores.  Descriptor normalization is a training-time property
recorded in the bundle, so switching profiles at inference never
changes the feature computation, only descent and scoring numerics.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import bundle as bundle_mod
from . import pca as pca_mod
from .classifier import (
    StreamModel,
    StreamScorer,
    SvmModel,
    classify_batch,
    export_stream,
    scores_of,
    train as svm_train,
)
from .detector import DetectorModel, HeatMapTracker, compute_stats, select_landmarks
from .dictionary import Dictionary, learn, windows_from_leaves
from .errors import CapacityError, DataError
from .events import EventStream, SensorGeometry
from .filtering import CascadeFilter, FilterConfig, cascade
from .kdtree import (
    KdTree,
    PackedTree,
    VirtualProjection,
    build,
    descend,
    descend_batch,
    harvest_dims,
    pack,
    quantized_descend,
    structural_equal,
    unpack,
)
from .pca import PcaModel
from .rect import RectConfig, RectState

PCA_MODES = ("none", "pca", "vpca")
PROFILES = ("float", "hardware")


@dataclass(frozen=True)
class PipelineConfig:
    geometry: SensorGeometry = SensorGeometry()
    filter_cfg: FilterConfig = FilterConfig()
    rect_cfg: RectConfig = RectConfig()
    pca_mode: str = "vpca"
    pca_energy: float = 0.95
    pca_dims: int | None = None
    k: int = 3000             # dictionary size
    s_window: int = 100_000   # events per classification window; 0 = whole stream
    n_landmarks: int = 20
    profile: str = "float"
    seed: int = 0
    sample_cap: int = 100_000
    svm_lambda: float = 1e-4
    svm_epochs: int = 200
    frac_bits: int = 24

    def __post_init__(self) -> None:
        if self.pca_mode not in PCA_MODES:
            raise DataError(f"pca mode {self.pca_mode!r} not one of {PCA_MODES}")
        if self.profile not in PROFILES:
            raise DataError(f"profile {self.profile!r} not one of {PROFILES}")
        if self.k < 2:
            raise DataError("dictionary size must be at least 2")
        if self.s_window < 0:
            raise DataError("window size must be non-negative")
        if self.profile == "hardware" and self.s_window == 0:
            raise DataError("the hardware profile needs a fixed window size")
        if self.n_landmarks < 1:
            raise DataError("landmark count must be at least 1")
        if self.sample_cap < 2:
            raise DataError("sample cap must be at least 2")
        if self.profile == "hardware" and self.rect_cfg.normalize:
            # the hardware pipeline has no normalizer stage
            object.__setattr__(self, "rect_cfg", replace(self.rect_cfg, normalize=False))


@dataclass(frozen=True)
class WindowResult:
    t_end: int
    label: str
    scores: np.ndarray


@dataclass(frozen=True)
class DetectWindow:
    t_end: int
    x: int | None
    y: int | None
    threshold: int
    landmark_hits: int


@dataclass
class TrainedPipeline:
    config: PipelineConfig
    class_names: tuple[str, ...]
    dictionary: Dictionary
    tree: KdTree
    svm: SvmModel
    landmarks: dict[str, DetectorModel]
    pca_model: PcaModel | None = None
    vproj: VirtualProjection | None = None
    packed: PackedTree | None = None
    stream_model: StreamModel | None = None
    stats: dict = field(default_factory=dict)
    _qtree: KdTree | None = field(default=None, repr=False, compare=False)

    def project_features(self, descriptors: np.ndarray) -> np.ndarray:
        if self.pca_model is not None:
            return pca_mod.project(self.pca_model, descriptors)
        if self.vproj is not None:
            return self.vproj.restrict(descriptors)
        return np.asarray(descriptors, dtype=np.float64)

    def quantized_tree(self) -> KdTree:
        if self.packed is None:
            raise DataError("bundle carries no packed tree; hardware profile unavailable")
        if self._qtree is None:
            self._qtree = unpack(self.packed)
        return self._qtree

    def descend_leaves(self, projected: np.ndarray, profile: str) -> np.ndarray:
        tree = self.quantized_tree() if profile == "hardware" else self.tree
        return descend_batch(tree, projected)

    def window_scores(self, counts: np.ndarray, profile: str) -> np.ndarray:
        if profile == "hardware":
            sm = self.stream_model
            if sm is None or not sm.fixed_point:
                raise DataError("bundle was not trained for the hardware profile")
            return sm.weights @ counts.astype(np.int64)
        return scores_of(self.svm, counts)


def _resolve_profile(tp: TrainedPipeline, profile: str | None) -> str:
    prof = profile or tp.config.profile
    if prof not in PROFILES:
        raise DataError(f"profile {prof!r} not one of {PROFILES}")
    return prof


def extract_stream_descriptors(
    geometry: SensorGeometry,
    rect_cfg: RectConfig,
    filtered: EventStream,
    snapshot_at: frozenset[int] = frozenset(),
) -> tuple[np.ndarray, list[tuple[int, np.ndarray, np.ndarray]]]:
    """Replay a filtered stream through the count matrix, extracting one
    descriptor per event; optionally snapshot (counts, pooled) after the
    given event indices."""
    state = RectState(geometry, rect_cfg)
    n = len(filtered)
    out = np.empty((n, rect_cfg.dim), dtype=np.float64)
    xs = filtered.x.tolist()
    ys = filtered.y.tolist()
    push = state.push
    extract = state.extract_values
    snaps: list[tuple[int, np.ndarray, np.ndarray]] = []
    for i in range(n):
        x = xs[i]
        y = ys[i]
        push(x, y)
        out[i] = extract(x, y)
        if i in snapshot_at:
            snaps.append((i, state.counts.copy(), state.pooled.copy()))
    return out, snaps


def _stage(name: str):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and isinstance(exc, DataError) and not getattr(exc, "_staged", False):
                exc._staged = True
                exc.args = (f"{name}: {exc.args[0]}",) if exc.args else (name,)
            return False

    return _Ctx()


def train_pipeline(
    config: PipelineConfig,
    labeled_streams: list[tuple[str, EventStream]],
    log=None,
) -> TrainedPipeline:
    """Run the full learning stage over labeled event streams."""
    say = log or (lambda msg: None)
    if not labeled_streams:
        raise DataError("no training streams")
    rng = np.random.default_rng(config.seed)
    stats: dict = {}

    with _stage("filter"):
        filtered = [(label, cascade(stream, config.filter_cfg)) for label, stream in labeled_streams]
    n_events = sum(len(s) for _, s in filtered)
    stats["filtered_events"] = n_events
    say(f"filtered {n_events} events from {len(filtered)} streams")
    if n_events == 0:
        raise DataError("filtering removed every event")

    # pass 1: sample descriptors for subspace and dictionary learning
    quota_base = config.sample_cap // len(filtered)
    quota_extra = config.sample_cap % len(filtered)
    sampled: list[np.ndarray] = []
    with _stage("descriptor sampling"):
        for i, (_, stream) in enumerate(filtered):
            if len(stream) == 0:
                continue
            desc, _ = extract_stream_descriptors(config.geometry, config.rect_cfg, stream)
            quota = quota_base + (1 if i < quota_extra else 0)
            take = min(quota, len(desc))
            if take:
                rows = rng.choice(len(desc), size=take, replace=False)
                sampled.append(desc[np.sort(rows)])
    if not sampled:
        raise DataError("descriptor sampling: sample cap too small to draw anything")
    samples = np.concatenate(sampled, axis=0)
    stats["sampled_descriptors"] = len(samples)
    say(f"sampled {len(samples)} descriptors")

    pca_model: PcaModel | None = None
    vproj: VirtualProjection | None = None
    if config.pca_mode == "pca":
        with _stage("pca fit"):
            pca_model = pca_mod.fit(samples, energy=config.pca_energy, fixed_dims=config.pca_dims)
        runtime_samples = pca_mod.project(pca_model, samples)
        stats["pca_dims_kept"] = pca_model.n_components
        stats["pca_energy_kept"] = pca_model.energy_kept
        say(f"pca kept {pca_model.n_components} dims ({pca_model.energy_kept:.4f} energy)")
    else:
        runtime_samples = samples

    with _stage("dictionary learning"):
        dict0 = learn(
            runtime_samples,
            config.k,
            seed=config.seed,
            feature_space="rect" if config.pca_mode == "none" else "pca-rect",
        )
    stats["kmeans_iterations"] = len(dict0.inertia_history)
    stats["kmeans_inertia"] = dict0.inertia_history[-1] if dict0.inertia_history else 0.0
    stats["dictionary_k"] = dict0.k
    say(f"dictionary of {dict0.k} entries, inertia {stats['kmeans_inertia']:.6g}")

    with _stage("tree build"):
        if config.pca_mode == "vpca":
            tree_full = build(dict0.centroids)
            vproj = harvest_dims(tree_full)
            centroids = vproj.restrict(dict0.centroids)
            dictionary = Dictionary(
                centroids=centroids,
                feature_space="vpca-rect",
                inertia_history=dict0.inertia_history,
            )
            tree = build(centroids)
            dim_map = {d: i for i, d in enumerate(vproj.kept_dims)}
            stats["vpca_kept_dims"] = len(vproj.kept_dims)
            stats["vpca_structural_identity"] = structural_equal(tree_full, tree, dim_map)
            say(f"virtual projection kept {len(vproj.kept_dims)} of {vproj.source_dim} dims")
        else:
            dictionary = dict0
            tree = build(dictionary.centroids)
    stats["tree_depth"] = tree.depth
    say(f"tree depth {tree.depth} over {tree.n_points} entries")

    # pass 2: descend every training event, window into histograms
    hists: list[np.ndarray] = []
    hist_labels: list[str] = []
    class_names = tuple(sorted({label for label, _ in filtered}))
    per_class_counts = {name: np.zeros(tree.n_points, dtype=np.int64) for name in class_names}
    with _stage("histogram accumulation"):
        for label, stream in filtered:
            if len(stream) == 0:
                continue
            desc, _ = extract_stream_descriptors(config.geometry, config.rect_cfg, stream)
            leaves = descend_batch(tree, (
                pca_mod.project(pca_model, desc) if pca_model is not None
                else vproj.restrict(desc) if vproj is not None
                else desc
            ))
            per_class_counts[label] += np.bincount(leaves, minlength=tree.n_points)
            for h in windows_from_leaves(leaves, tree.n_points, config.s_window):
                hists.append(h.counts)
                hist_labels.append(label)
    if not hists:
        raise DataError("histogram accumulation: no stream filled a full window")
    stats["training_histograms"] = len(hists)
    say(f"{len(hists)} training histograms over {len(class_names)} classes")

    with _stage("svm training"):
        svm = svm_train(
            np.asarray(hists, dtype=np.float64),
            hist_labels,
            lam=config.svm_lambda,
            epochs=config.svm_epochs,
            seed=config.seed,
            class_names=class_names,
        )
    predicted, _ = classify_batch(svm, np.asarray(hists, dtype=np.float64))
    train_acc = float(np.mean([p == l for p, l in zip(predicted, hist_labels)]))
    stats["training_accuracy"] = train_acc
    say(f"training accuracy {train_acc:.4f}")

    with _stage("landmark selection"):
        total_counts = np.zeros(tree.n_points, dtype=np.int64)
        for counts in per_class_counts.values():
            total_counts += counts
        n_landmarks = min(config.n_landmarks, tree.n_points)
        landmarks = {}
        for name in class_names:
            pos = per_class_counts[name]
            neg = total_counts - pos
            landmarks[name] = select_landmarks(compute_stats(pos, neg), n_landmarks)
    stats["landmarks_per_class"] = n_landmarks

    stream_model = None
    if config.s_window >= 1:
        stream_model = export_stream(
            svm,
            config.s_window,
            fixed_point=config.profile == "hardware",
            frac_bits=config.frac_bits,
        )

    packed = None
    with _stage("tree packing"):
        try:
            packed = pack(tree)
        except CapacityError:
            if config.profile == "hardware":
                raise
            stats["packed"] = False
        else:
            stats["packed"] = True

    return TrainedPipeline(
        config=config,
        class_names=class_names,
        dictionary=dictionary,
        tree=tree,
        svm=svm,
        landmarks=landmarks,
        pca_model=pca_model,
        vproj=vproj,
        packed=packed,
        stream_model=stream_model,
        stats=stats,
    )


def window_spans(n: int, s: int) -> list[tuple[int, int]]:
    """Non-overlapping [start, end) windows; s = 0 means one whole-span window."""
    if n == 0:
        return []
    if s == 0:
        return [(0, n)]
    return [(i, i + s) for i in range(0, n - s + 1, s)]


def run_classify(
    tp: TrainedPipeline, stream: EventStream, profile: str | None = None
) -> list[WindowResult]:
    """Filter, describe, descend, and classify each full window."""
    prof = _resolve_profile(tp, profile)
    cfg = tp.config
    filtered = cascade(stream, cfg.filter_cfg)
    if len(filtered) == 0:
        return []
    desc, _ = extract_stream_descriptors(cfg.geometry, cfg.rect_cfg, filtered)
    leaves = tp.descend_leaves(tp.project_features(desc), prof)
    out = []
    for start, end in window_spans(len(leaves), cfg.s_window):
        counts = np.bincount(leaves[start:end], minlength=tp.tree.n_points)
        scores = tp.window_scores(counts, prof)
        label = tp.class_names[int(np.argmax(scores))]
        out.append(WindowResult(t_end=int(filtered.t[end - 1]), label=label, scores=scores))
    return out


def run_detect(
    tp: TrainedPipeline,
    stream: EventStream,
    target: str,
    profile: str | None = None,
) -> list[DetectWindow]:
    """Per-window landmark heat-map localization of one target class."""
    prof = _resolve_profile(tp, profile)
    cfg = tp.config
    if target not in tp.landmarks:
        raise DataError(f"unknown target class {target!r}; bundle has {tp.class_names}")
    model = tp.landmarks[target]
    filtered = cascade(stream, cfg.filter_cfg)
    if len(filtered) == 0:
        return []
    desc, _ = extract_stream_descriptors(cfg.geometry, cfg.rect_cfg, filtered)
    leaves = tp.descend_leaves(tp.project_features(desc), prof)
    mask = model.mask(tp.tree.n_points)
    xs = filtered.x
    ys = filtered.y
    out = []
    for start, end in window_spans(len(leaves), cfg.s_window):
        tracker = HeatMapTracker(cfg.geometry)
        hit_idx = np.flatnonzero(mask[leaves[start:end]]) + start
        for i in hit_idx.tolist():
            tracker.hit(int(xs[i]), int(ys[i]))
        spot = tracker.detect()
        out.append(
            DetectWindow(
                t_end=int(filtered.t[end - 1]),
                x=None if spot is None else spot[0],
                y=None if spot is None else spot[1],
                threshold=tracker.threshold,
                landmark_hits=len(hit_idx),
            )
        )
    return out


@dataclass(frozen=True)
class BenchReport:
    n_events: int
    accepted_events: int
    total_seconds: float
    events_per_sec: float
    p50_us: float
    p99_us: float
    stage_us: dict[str, float]

    def as_text(self) -> str:
        lines = [
            f"events processed : {self.n_events}",
            f"events accepted  : {self.accepted_events}",
            f"wall time        : {self.total_seconds:.3f} s",
            f"throughput       : {self.events_per_sec:.0f} events/s",
            f"latency p50      : {self.p50_us:.2f} us",
            f"latency p99      : {self.p99_us:.2f} us",
        ]
        for name, us in self.stage_us.items():
            lines.append(f"stage {name:<10} : {us:.3f} us/event")
        return "\n".join(lines)


def run_bench(tp: TrainedPipeline, stream: EventStream, profile: str | None = None) -> BenchReport:
    """Time the per-event path end to end; reporting only, no assertions."""
    prof = _resolve_profile(tp, profile)
    cfg = tp.config
    n = len(stream)
    if n == 0:
        return BenchReport(0, 0, 0.0, 0.0, 0.0, 0.0, {})

    filt = CascadeFilter(cfg.geometry, cfg.filter_cfg)
    state = RectState(cfg.geometry, cfg.rect_cfg)
    if tp.pca_model is not None:
        comp = tp.pca_model.components
        mean = tp.pca_model.mean
        transform = lambda v: comp @ (v - mean)
    elif tp.vproj is not None:
        kept = np.asarray(tp.vproj.kept_dims, dtype=np.int64)
        transform = lambda v: v[kept]
    else:
        transform = lambda v: v
    if prof == "hardware":
        packed = tp.packed
        if packed is None:
            raise DataError("bundle carries no packed tree; hardware profile unavailable")
        find_leaf = lambda z: quantized_descend(packed, z)
    else:
        tree = tp.tree
        find_leaf = lambda z: descend(tree, z)
    scorer = StreamScorer(tp.stream_model) if tp.stream_model is not None else None

    xs = stream.x.tolist()
    ys = stream.y.tolist()
    ts = stream.t.tolist()
    lat = np.empty(n, dtype=np.int64)
    stages = {"filter": 0, "rect": 0, "extract": 0, "project": 0, "descend": 0, "score": 0}
    pc = time.perf_counter_ns
    accepted = 0
    begin = pc()
    for i in range(n):
        x = xs[i]
        y = ys[i]
        t0 = pc()
        ok = filt.push(x, y, ts[i])
        t1 = pc()
        stages["filter"] += t1 - t0
        if ok:
            accepted += 1
            state.push(x, y)
            t2 = pc()
            v = state.extract_values(x, y)
            t3 = pc()
            z = transform(v)
            t4 = pc()
            leaf = find_leaf(z)
            t5 = pc()
            if scorer is not None:
                scorer.push(int(leaf))
            t6 = pc()
            stages["rect"] += t2 - t1
            stages["extract"] += t3 - t2
            stages["project"] += t4 - t3
            stages["descend"] += t5 - t4
            stages["score"] += t6 - t5
            lat[i] = t6 - t0
        else:
            lat[i] = t1 - t0
    total_s = (pc() - begin) / 1e9

    return BenchReport(
        n_events=n,
        accepted_events=accepted,
        total_seconds=total_s,
        events_per_sec=n / total_s if total_s > 0 else 0.0,
        p50_us=float(np.percentile(lat, 50)) / 1e3,
        p99_us=float(np.percentile(lat, 99)) / 1e3,
        stage_us={k: v / n / 1e3 for k, v in stages.items()},
    )


def save_bundle(tp: TrainedPipeline) -> bytes:
    cfg = tp.config
    meta = {
        "kind": "evrect-pipeline",
        "config": {
            "geometry": [cfg.geometry.n_rows, cfg.geometry.n_cols],
            "theta_noise_us": cfg.filter_cfg.theta_noise_us,
            "theta_ref_us": cfg.filter_cfg.theta_ref_us,
            "fifo_capacity": cfg.rect_cfg.s,
            "pool_p": cfg.rect_cfg.p,
            "pool_q": cfg.rect_cfg.q,
            "patch_w": cfg.rect_cfg.w,
            "normalize": cfg.rect_cfg.normalize,
            "pca_mode": cfg.pca_mode,
            "pca_energy": cfg.pca_energy,
            "pca_dims": cfg.pca_dims,
            "dictionary_k": cfg.k,
            "window_s": cfg.s_window,
            "landmarks_d": cfg.n_landmarks,
            "profile": cfg.profile,
            "seed": cfg.seed,
            "sample_cap": cfg.sample_cap,
            "svm_lambda": cfg.svm_lambda,
            "svm_epochs": cfg.svm_epochs,
            "frac_bits": cfg.frac_bits,
        },
        "class_names": list(tp.class_names),
        "feature_space": tp.dictionary.feature_space,
        "kept_dims": list(tp.vproj.kept_dims) if tp.vproj is not None else None,
        "source_dim": tp.vproj.source_dim if tp.vproj is not None else None,
        "pca_energy_kept": tp.pca_model.energy_kept if tp.pca_model is not None else None,
        "packed_range": [tp.packed.vmin, tp.packed.vmax] if tp.packed is not None else None,
        "tree_dim": tp.tree.dim,
        "stats": tp.stats,
    }
    sections: dict[str, dict[str, np.ndarray]] = {
        "DICT": {"centroids": tp.dictionary.centroids},
        "TREE": {
            "is_leaf": tp.tree.is_leaf,
            "split_dim": tp.tree.split_dim,
            "split_val": tp.tree.split_val,
            "left": tp.tree.left,
            "right": tp.tree.right,
            "leaf_index": tp.tree.leaf_index,
        },
        "SVM_": {"weights": tp.svm.weights, "bias": tp.svm.bias},
        "LAND": {
            "landmarks": np.asarray(
                [tp.landmarks[name].landmarks for name in tp.class_names], dtype=np.int64
            )
        },
    }
    if tp.pca_model is not None:
        sections["PCA_"] = {
            "mean": tp.pca_model.mean,
            "components": tp.pca_model.components,
            "eigenvalues": tp.pca_model.eigenvalues,
        }
    if tp.packed is not None:
        sections["PACK"] = {"words": tp.packed.words}
    return bundle_mod.write_bundle(meta, sections)


def load_bundle(data: bytes) -> TrainedPipeline:
    meta, sections = bundle_mod.read_bundle(data)
    if meta.get("kind") != "evrect-pipeline":
        raise DataError("bundle: not a pipeline bundle")
    c = meta["config"]
    config = PipelineConfig(
        geometry=SensorGeometry(n_rows=c["geometry"][0], n_cols=c["geometry"][1]),
        filter_cfg=FilterConfig(
            theta_noise_us=c["theta_noise_us"], theta_ref_us=c["theta_ref_us"]
        ),
        rect_cfg=RectConfig(
            s=c["fifo_capacity"], p=c["pool_p"], q=c["pool_q"], w=c["patch_w"],
            normalize=c["normalize"],
        ),
        pca_mode=c["pca_mode"],
        pca_energy=c["pca_energy"],
        pca_dims=c["pca_dims"],
        k=c["dictionary_k"],
        s_window=c["window_s"],
        n_landmarks=c["landmarks_d"],
        profile=c["profile"],
        seed=c["seed"],
        sample_cap=c["sample_cap"],
        svm_lambda=c["svm_lambda"],
        svm_epochs=c["svm_epochs"],
        frac_bits=c["frac_bits"],
    )
    class_names = tuple(meta["class_names"])

    try:
        centroids = sections["DICT"]["centroids"]
        t = sections["TREE"]
        tree = KdTree(
            is_leaf=t["is_leaf"].astype(bool),
            split_dim=t["split_dim"].astype(np.int32),
            split_val=t["split_val"].astype(np.float64),
            left=t["left"].astype(np.int32),
            right=t["right"].astype(np.int32),
            leaf_index=t["leaf_index"].astype(np.int32),
            points=None,
            dim=int(meta["tree_dim"]),
            n_points=len(centroids),
        )
        svm = SvmModel(
            weights=sections["SVM_"]["weights"],
            bias=sections["SVM_"]["bias"],
            class_names=class_names,
        )
        landmark_rows = sections["LAND"]["landmarks"]
    except KeyError as exc:
        raise DataError(f"bundle: missing component {exc.args[0]!r}") from None
    landmarks = {
        name: DetectorModel(landmarks=tuple(int(v) for v in landmark_rows[i]))
        for i, name in enumerate(class_names)
    }

    pca_model = None
    if "PCA_" in sections:
        p = sections["PCA_"]
        pca_model = PcaModel(
            mean=p["mean"],
            components=p["components"],
            eigenvalues=p["eigenvalues"],
            energy_kept=float(meta["pca_energy_kept"]),
        )
    vproj = None
    if meta.get("kept_dims") is not None:
        vproj = VirtualProjection(
            kept_dims=tuple(int(d) for d in meta["kept_dims"]),
            source_dim=int(meta["source_dim"]),
        )
    packed = None
    if "PACK" in sections:
        vmin, vmax = meta["packed_range"]
        packed = PackedTree(words=sections["PACK"]["words"], vmin=float(vmin), vmax=float(vmax))
    stream_model = None
    if config.s_window >= 1:
        stream_model = export_stream(
            svm,
            config.s_window,
            fixed_point=config.profile == "hardware",
            frac_bits=config.frac_bits,
        )
    return TrainedPipeline(
        config=config,
        class_names=class_names,
        dictionary=Dictionary(centroids=centroids, feature_space=meta["feature_space"]),
        tree=tree,
        svm=svm,
        landmarks=landmarks,
        pca_model=pca_model,
        vproj=vproj,
        packed=packed,
        stream_model=stream_model,
        stats=dict(meta.get("stats") or {}),
    )
