"""Command-line interface.

Subcommands: filter, synth, train, classify, detect, bench, tree dump.
Exit codes: 0 success, 1 usage error, 2 data error.  Config files use
one `key = value` per line with `#` comments.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bundle import export_text
from .detector import evaluate
from .errors import DataError, UsageError
from .events import SensorGeometry, parse_csv, write_csv
from .filtering import FilterConfig, cascade
from .kdtree import dump_rom
from .pgm import to_pgm
from .pipeline import (
    PipelineConfig,
    load_bundle,
    run_bench,
    run_classify,
    run_detect,
    save_bundle,
    train_pipeline,
    window_spans,
    extract_stream_descriptors,
)
from .rect import RectConfig
from .synth import SceneSpec, parse_truth_csv, synth_scene, write_truth_csv


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_kv(text: str, source: str = "config") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{source} line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _coerce(kv: dict[str, str], key: str, kind, default):
    if key not in kv:
        return default
    raw = kv.pop(key)
    if kind is bool:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"config key {key}: expected a boolean, got {raw!r}")
    try:
        return kind(raw)
    except ValueError:
        raise UsageError(f"config key {key}: cannot parse {raw!r}") from None


def pipeline_config_from_kv(kv: dict[str, str]) -> PipelineConfig:
    kv = dict(kv)
    geometry = SensorGeometry(
        n_rows=_coerce(kv, "rows", int, 180), n_cols=_coerce(kv, "cols", int, 240)
    )
    filter_cfg = FilterConfig(
        theta_noise_us=_coerce(kv, "theta_noise_us", int, 5_000),
        theta_ref_us=_coerce(kv, "theta_ref_us", int, 1_000),
    )
    rect_cfg = RectConfig(
        s=_coerce(kv, "fifo_capacity", int, 5_000),
        p=_coerce(kv, "pool_p", int, 2),
        q=_coerce(kv, "pool_q", int, 2),
        w=_coerce(kv, "patch_w", int, 9),
        normalize=_coerce(kv, "normalize", bool, True),
    )
    pca_dims = _coerce(kv, "pca_dims", int, 0)
    config = PipelineConfig(
        geometry=geometry,
        filter_cfg=filter_cfg,
        rect_cfg=rect_cfg,
        pca_mode=_coerce(kv, "pca_mode", str, "vpca"),
        pca_energy=_coerce(kv, "pca_energy", float, 0.95),
        pca_dims=pca_dims or None,
        k=_coerce(kv, "dictionary_k", int, 3000),
        s_window=_coerce(kv, "window_s", int, 100_000),
        n_landmarks=_coerce(kv, "landmarks_d", int, 20),
        profile=_coerce(kv, "profile", str, "float"),
        seed=_coerce(kv, "seed", int, 0),
        sample_cap=_coerce(kv, "sample_cap", int, 100_000),
        svm_lambda=_coerce(kv, "svm_lambda", float, 1e-4),
        svm_epochs=_coerce(kv, "svm_epochs", int, 200),
        frac_bits=_coerce(kv, "frac_bits", int, 24),
    )
    if kv:
        raise UsageError(f"unknown config keys: {', '.join(sorted(kv))}")
    return config


def scene_spec_from_kv(kv: dict[str, str]) -> SceneSpec:
    kv = dict(kv)
    spec = SceneSpec(
        shape=_coerce(kv, "shape", str, "ring"),
        geometry=SensorGeometry(
            n_rows=_coerce(kv, "rows", int, 180), n_cols=_coerce(kv, "cols", int, 240)
        ),
        start_x=_coerce(kv, "start_x", float, 120.0),
        start_y=_coerce(kv, "start_y", float, 90.0),
        vx=_coerce(kv, "vx", float, 0.0),
        vy=_coerce(kv, "vy", float, 0.0),
        size=_coerce(kv, "size", float, 12.0),
        duration_us=_coerce(kv, "duration_us", int, 1_000_000),
        event_rate=_coerce(kv, "event_rate", float, 20_000.0),
        noise_rate=_coerce(kv, "noise_rate", float, 0.0),
        frame_interval_us=_coerce(kv, "frame_interval_us", int, 10_000),
    )
    if kv:
        raise UsageError(f"unknown scene keys: {', '.join(sorted(kv))}")
    return spec


def _read_events(path: str, geometry: SensorGeometry):
    return parse_csv(Path(path).read_bytes(), geometry)


def _write_out(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _format_score(v) -> str:
    if isinstance(v, float):
        return "%.9g" % v
    return str(int(v))


def _dump_heat(tp, stream, out_dir: str) -> None:
    cfg = tp.config
    filtered = cascade(stream, cfg.filter_cfg)
    spans = window_spans(len(filtered), cfg.s_window)
    ends = frozenset(end - 1 for _, end in spans)
    _, snaps = extract_stream_descriptors(cfg.geometry, cfg.rect_cfg, filtered, ends)
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    for i, counts, pooled in snaps:
        t_end = int(filtered.t[i])
        (directory / f"window_{t_end}_counts.pgm").write_text(to_pgm(counts))
        (directory / f"window_{t_end}_pooled.pgm").write_text(to_pgm(pooled))


def _cmd_filter(args) -> int:
    geometry = SensorGeometry(n_rows=args.rows, n_cols=args.cols)
    stream = _read_events(args.input, geometry)
    cfg = FilterConfig(theta_noise_us=args.theta_noise_us, theta_ref_us=args.theta_ref_us)
    kept = cascade(stream, cfg)
    Path(args.output).write_text(write_csv(kept))
    print(f"kept {len(kept)} of {len(stream)} events")
    return 0


def _cmd_synth(args) -> int:
    kv = parse_kv(Path(args.spec).read_text(), source=args.spec) if args.spec else {}
    for name in (
        "shape", "rows", "cols", "start_x", "start_y", "vx", "vy", "size",
        "duration_us", "event_rate", "noise_rate", "frame_interval_us",
    ):
        value = getattr(args, name)
        if value is not None:
            kv[name] = str(value)
    spec = scene_spec_from_kv(kv)
    stream, truth = synth_scene(spec, seed=args.seed)
    Path(args.output).write_text(write_csv(stream))
    if args.truth:
        Path(args.truth).write_text(write_truth_csv(truth))
    print(f"wrote {len(stream)} events over {len(truth)} frames")
    return 0


def _labeled_inputs(args) -> list[tuple[str, str]]:
    pairs: list[tuple[str, str]] = []
    if args.manifest:
        for lineno, raw in enumerate(Path(args.manifest).read_text().splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "," not in line:
                raise UsageError(f"manifest line {lineno}: expected label,path")
            label, _, path = line.partition(",")
            pairs.append((label.strip(), path.strip()))
    for item in args.inputs:
        if "=" not in item:
            raise UsageError(f"training input {item!r}: expected label=path")
        label, _, path = item.partition("=")
        pairs.append((label, path))
    if not pairs:
        raise UsageError("no training inputs; pass label=path arguments or --manifest")
    return pairs


def _cmd_train(args) -> int:
    kv = parse_kv(Path(args.config).read_text(), source=args.config) if args.config else {}
    if args.seed is not None:
        kv["seed"] = str(args.seed)
    if args.profile is not None:
        kv["profile"] = str(args.profile)
    config = pipeline_config_from_kv(kv)
    labeled = []
    for label, path in _labeled_inputs(args):
        try:
            labeled.append((label, _read_events(path, config.geometry)))
        except DataError as exc:
            raise DataError(f"{path}: {exc}") from None
    tp = train_pipeline(config, labeled, log=print)
    Path(args.output).write_bytes(save_bundle(tp))
    print(f"bundle written to {args.output}")
    return 0


def _cmd_classify(args) -> int:
    tp = load_bundle(Path(args.bundle).read_bytes())
    stream = _read_events(args.input, tp.config.geometry)
    results = run_classify(tp, stream, profile=args.profile)
    header = "window_end_timestamp,label," + ",".join(
        f"score_{name}" for name in tp.class_names
    )
    lines = [header]
    for r in results:
        scores = ",".join(_format_score(v) for v in r.scores.tolist())
        lines.append(f"{r.t_end},{r.label},{scores}")
    _write_out(args.output, "\n".join(lines) + "\n")
    if args.dump_heat:
        _dump_heat(tp, stream, args.dump_heat)
    return 0


def _cmd_detect(args) -> int:
    tp = load_bundle(Path(args.bundle).read_bytes())
    stream = _read_events(args.input, tp.config.geometry)
    target = args.target or tp.class_names[0]
    rows = run_detect(tp, stream, target, profile=args.profile)
    lines = ["window_end_timestamp,x,y,threshold,landmark_hits"]
    for r in rows:
        x = "" if r.x is None else r.x
        y = "" if r.y is None else r.y
        lines.append(f"{r.t_end},{x},{y},{r.threshold},{r.landmark_hits}")
    _write_out(args.output, "\n".join(lines) + "\n")
    if args.truth:
        truth = parse_truth_csv(Path(args.truth).read_text())
        detections = [(r.t_end, r.x, r.y) for r in rows if r.x is not None]
        m = evaluate(detections, truth)
        flag = " (no detections)" if m.no_detections else ""
        print(
            f"precision {m.precision:.3f} recall {m.recall:.3f} "
            f"in_box {m.in_box} detections {m.n_detections} windows {m.n_truth_windows}{flag}"
        )
    if args.dump_heat:
        _dump_heat(tp, stream, args.dump_heat)
    return 0


def _cmd_bench(args) -> int:
    tp = load_bundle(Path(args.bundle).read_bytes())
    stream = _read_events(args.input, tp.config.geometry)
    report = run_bench(tp, stream, profile=args.profile)
    print(report.as_text())
    return 0


def _cmd_tree_dump(args) -> int:
    tp = load_bundle(Path(args.bundle).read_bytes())
    if tp.packed is None:
        raise DataError("bundle has no packed tree (capacity exceeded at training time)")
    _write_out(args.output, dump_rom(tp.packed))
    return 0


def _cmd_bundle_text(args) -> int:
    _write_out(args.output, export_text(Path(args.bundle).read_bytes()))
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="evrect", description="Event-stream object recognition pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="run the two-stage noise filter over an event CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--rows", type=int, default=180)
    p.add_argument("--cols", type=int, default=240)
    p.add_argument("--theta-noise-us", type=int, default=5_000)
    p.add_argument("--theta-ref-us", type=int, default=1_000)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("synth", help="generate a synthetic labeled scene")
    p.add_argument("--output", required=True)
    p.add_argument("--truth")
    p.add_argument("--spec", help="key=value scene file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shape", choices=["bar", "cross", "ring"])
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--start-x", dest="start_x", type=float)
    p.add_argument("--start-y", dest="start_y", type=float)
    p.add_argument("--vx", type=float)
    p.add_argument("--vy", type=float)
    p.add_argument("--size", type=float)
    p.add_argument("--duration-us", dest="duration_us", type=int)
    p.add_argument("--event-rate", dest="event_rate", type=float)
    p.add_argument("--noise-rate", dest="noise_rate", type=float)
    p.add_argument("--frame-interval-us", dest="frame_interval_us", type=int)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train a pipeline bundle from labeled event CSVs")
    p.add_argument("inputs", nargs="*", metavar="label=path")
    p.add_argument("--manifest", help="file of label,path lines")
    p.add_argument("--config", help="key=value pipeline config file")
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--profile", choices=["float", "hardware"])
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("classify", help="per-window classification of an event CSV")
    p.add_argument("--bundle", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="CSV path, default stdout")
    p.add_argument("--profile", choices=["float", "hardware"])
    p.add_argument("--dump-heat", dest="dump_heat", help="directory for PGM matrix dumps")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("detect", help="per-window target localization")
    p.add_argument("--bundle", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--target", help="target class, default first class")
    p.add_argument("--output", help="CSV path, default stdout")
    p.add_argument("--truth", help="ground-truth CSV for precision/recall")
    p.add_argument("--profile", choices=["float", "hardware"])
    p.add_argument("--dump-heat", dest="dump_heat", help="directory for PGM matrix dumps")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("bench", help="per-event latency report")
    p.add_argument("--bundle", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--profile", choices=["float", "hardware"])
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("tree", help="tree utilities")
    tree_sub = p.add_subparsers(dest="tree_command", required=True)
    q = tree_sub.add_parser("dump", help="write the packed ROM image as hex")
    q.add_argument("--bundle", required=True)
    q.add_argument("--output", help="hex path, default stdout")
    q.set_defaults(func=_cmd_tree_dump)

    p = sub.add_parser("bundle", help="bundle utilities")
    bundle_sub = p.add_subparsers(dest="bundle_command", required=True)
    q = bundle_sub.add_parser("text", help="lossless text export of a bundle")
    q.add_argument("--bundle", required=True)
    q.add_argument("--output", help="text path, default stdout")
    q.set_defaults(func=_cmd_bundle_text)

    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
