"""Command-line driver: data ingestion, pipeline orchestration, reports.

Subcommands: simulate, encode, decode, eval, bench.  All outputs are
deterministic given (inputs, config, seed); the degree of parallelism
(--threads / TLL_THREADS) never changes results because per-frame outputs
are merged in sorted frame order.

File formats
------------
Annotations: tab-separated text, one instance per line:
    frame_id  top_x  top_y  bot_x  bot_y  occlusion_fraction  ignore_flag
'#' starts a comment; a line holding only a frame id declares a frame with
no instances (it still counts toward FPPI).

Detections: tab-separated text, one detection per line:
    frame_id  top_x  top_y  bot_x  bot_y  cx  cy  w  h  score

Grids: binary, magic "TLLG", u8 version=1, u8 kind (0 scalar, 1 vector),
u32le width, u32le height, float32le values row-major (vector kind
interleaves vx,vy).  Maps live under <dir>/<frame>[.s<k>].{top,bot,link}.tllg.

Config: a JSON document with sections encoder/decoder/mrf/degrade/scene/eval;
any CLI flag (including --set section.key=value) overrides the file.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .core import (
    Annotation,
    BBox,
    Point,
    ScalarGrid,
    TopoLine,
    VectorField,
    grid_from_bytes,
    grid_to_bytes,
)
from .decoder import DecoderConfig, build_candidates, decode, aggregate_sequence, hungarian_assign, lines_from_candidates
from .encoder import EncoderConfig, encode_maps
from .evaluation import (
    DEFAULT_ASPECT,
    MrFppiCurve,
    Protocol,
    evaluate_frames,
    line_to_box,
    standard_protocols,
)
from .mrf import MrfConfig, refine
from .simulate import (
    DEGRADE_PRESETS,
    SCENE_PRESETS,
    DegradeConfig,
    SceneConfig,
    degrade,
    degrade_sequence,
    generate_scene,
)


@dataclasses.dataclass(frozen=True)
class RunConfig:
    encoder: EncoderConfig = EncoderConfig()
    decoder: DecoderConfig = DecoderConfig()
    mrf: MrfConfig = MrfConfig()
    degrade: DegradeConfig = DegradeConfig()
    scene: SceneConfig = SceneConfig()
    aspect: float = DEFAULT_ASPECT
    protocols: tuple[Protocol, ...] = tuple(standard_protocols())


def _coerce_field(value, current):
    if isinstance(current, tuple) and isinstance(value, (list, tuple)):
        return tuple(value)
    return value


def _apply_section(default, mapping: dict):
    fields = {f.name: getattr(default, f.name) for f in dataclasses.fields(default)}
    unknown = set(mapping) - set(fields)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    updates = {k: _coerce_field(v, fields[k]) for k, v in mapping.items()}
    return dataclasses.replace(default, **updates)


def _protocols_from(specs: list[dict]) -> tuple[Protocol, ...]:
    protos = []
    for spec in specs:
        spec = dict(spec)
        hi = spec.pop("height_max", None)
        lo = spec.pop("height_min", None)
        if lo is not None or hi is not None:
            spec["height_range"] = (
                float(lo if lo is not None else 0.0),
                float(hi) if hi is not None else math.inf,
            )
        if "height_range" in spec:
            rng = spec["height_range"]
            spec["height_range"] = (
                float(rng[0]),
                math.inf if rng[1] is None else float(rng[1]),
            )
        protos.append(Protocol(**spec))
    return tuple(protos)


def load_config(path: str | None, overrides: list[str]) -> RunConfig:
    """Defaults <- config file <- --set overrides, in that order."""
    doc: dict = {}
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    for item in overrides:
        key, _, raw = item.partition("=")
        if not _ or "." not in key:
            raise ValueError(f"bad --set (want section.key=value): {item!r}")
        section, field = key.split(".", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        doc.setdefault(section, {})[field] = value
    cfg = RunConfig()
    known = {"encoder", "decoder", "mrf", "degrade", "scene", "eval"}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    kwargs = {}
    for section in ("encoder", "decoder", "mrf", "degrade", "scene"):
        if section in doc:
            kwargs[section] = _apply_section(getattr(cfg, section), doc[section])
    eval_doc = dict(doc.get("eval", {}))
    if "aspect" in eval_doc:
        kwargs["aspect"] = float(eval_doc.pop("aspect"))
    if "protocols" in eval_doc:
        kwargs["protocols"] = _protocols_from(eval_doc.pop("protocols"))
    if eval_doc:
        raise ValueError(f"unknown config keys in eval: {sorted(eval_doc)}")
    return dataclasses.replace(cfg, **kwargs)


def _num_threads(arg: int | None) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("TLL_THREADS", "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"bad TLL_THREADS value: {env!r}")
    return 1


def _frame_map(fn, items, threads: int) -> dict:
    """Apply fn over (key, value) pairs, preserving key -> result order."""
    if threads <= 1 or len(items) <= 1:
        return {k: fn(k, v) for k, v in items}
    out = {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {k: pool.submit(fn, k, v) for k, v in items}
        for k, fut in futures.items():
            out[k] = fut.result()
    return out


# ---------------------------------------------------------------------------
# Text formats


def parse_annotations(path: str) -> dict[str, list[Annotation]]:
    frames: dict[str, list[Annotation]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            if len(parts) == 1:
                frames.setdefault(parts[0], [])
                continue
            if len(parts) != 7:
                raise ValueError(
                    f"{path}:{lineno}: expected 7 fields, got {len(parts)}"
                )
            fid = parts[0]
            try:
                tx, ty, bx, by, occ = map(float, parts[1:6])
                ignore = parts[6].strip() in ("1", "true", "True")
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            try:
                ann = Annotation(
                    line=TopoLine(Point(tx, ty), Point(bx, by)),
                    occlusion_fraction=occ,
                    ignore=ignore,
                )
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            frames.setdefault(fid, []).append(ann)
    return frames


def write_annotations(path: Path, frames: dict[str, list[Annotation]]):
    lines = ["# frame_id\ttop_x\ttop_y\tbot_x\tbot_y\tocclusion\tignore"]
    for fid in sorted(frames):
        anns = frames[fid]
        if not anns:
            lines.append(fid)
        for a in anns:
            lines.append(
                "\t".join(
                    [
                        fid,
                        f"{a.line.top.x:.6f}",
                        f"{a.line.top.y:.6f}",
                        f"{a.line.bottom.x:.6f}",
                        f"{a.line.bottom.y:.6f}",
                        f"{a.occlusion_fraction:.6f}",
                        "1" if a.ignore else "0",
                    ]
                )
            )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_detections(path: str) -> dict[str, list[tuple[TopoLine, BBox]]]:
    frames: dict[str, list[tuple[TopoLine, BBox]]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            if len(parts) == 1:
                frames.setdefault(parts[0], [])
                continue
            if len(parts) != 10:
                raise ValueError(
                    f"{path}:{lineno}: expected 10 fields, got {len(parts)}"
                )
            fid = parts[0]
            try:
                tx, ty, bx, by, cx, cy, w, h, score = map(float, parts[1:])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            topo = TopoLine(Point(tx, ty), Point(bx, by), score)
            frames.setdefault(fid, []).append((topo, BBox(cx, cy, w, h, score)))
    return frames


def write_detections(path: Path, frames: dict[str, list[tuple[TopoLine, BBox]]]):
    lines = [
        "# frame_id\ttop_x\ttop_y\tbot_x\tbot_y\tcx\tcy\tw\th\tscore",
    ]
    for fid in sorted(frames):
        dets = frames[fid]
        if not dets:
            lines.append(fid)
        for topo, box in dets:
            lines.append(
                "\t".join(
                    [
                        fid,
                        f"{topo.top.x:.6f}",
                        f"{topo.top.y:.6f}",
                        f"{topo.bottom.x:.6f}",
                        f"{topo.bottom.y:.6f}",
                        f"{box.cx:.6f}",
                        f"{box.cy:.6f}",
                        f"{box.w:.6f}",
                        f"{box.h:.6f}",
                        f"{box.score:.6f}",
                    ]
                )
            )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Map directories


def _map_path(maps_dir: Path, frame: str, kind: str, snapshot: int | None) -> Path:
    stem = frame if snapshot is None else f"{frame}.s{snapshot}"
    return maps_dir / f"{stem}.{kind}.tllg"


def write_frame_maps(maps_dir: Path, frame: str, maps, snapshot: int | None = None):
    t, b, l = maps
    _map_path(maps_dir, frame, "top", snapshot).write_bytes(grid_to_bytes(t))
    _map_path(maps_dir, frame, "bot", snapshot).write_bytes(grid_to_bytes(b))
    _map_path(maps_dir, frame, "link", snapshot).write_bytes(grid_to_bytes(l))


def read_frame_maps(maps_dir: Path, frame: str, snapshot: int | None = None):
    paths = [_map_path(maps_dir, frame, k, snapshot) for k in ("top", "bot", "link")]
    for p in paths:
        if not p.exists():
            raise FileNotFoundError(f"missing map file: {p}")
    t = grid_from_bytes(paths[0].read_bytes())
    b = grid_from_bytes(paths[1].read_bytes())
    l = grid_from_bytes(paths[2].read_bytes())
    if not isinstance(t, ScalarGrid) or not isinstance(b, ScalarGrid) or not isinstance(l, VectorField):
        raise ValueError(f"wrong grid kinds for frame {frame}")
    return t, b, l


def list_frames(maps_dir: Path) -> dict[str, list[int] | None]:
    """Frame ids -> sorted snapshot indices (None: single-shot frame)."""
    frames: dict[str, set[int] | None] = {}
    for p in maps_dir.glob("*.top.tllg"):
        stem = p.name[: -len(".top.tllg")]
        if ".s" in stem:
            frame, _, snap = stem.rpartition(".s")
            if snap.isdigit():
                cur = frames.setdefault(frame, set())
                if cur is not None:
                    cur.add(int(snap))
                continue
        frames[stem] = None
    return {
        f: (sorted(s) if isinstance(s, set) else None)
        for f, s in sorted(frames.items())
    }


# ---------------------------------------------------------------------------
# Reports


def write_curve_csv(path: Path, curve: MrFppiCurve):
    rows = ["threshold,fppi,miss_rate"]
    for t, (f, m) in zip(curve.thresholds, curve.points):
        tval = "inf" if math.isinf(t) else f"{t:.6f}"
        rows.append(f"{tval},{f:.6f},{m:.6f}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def _svg_xy(fppi: float, miss: float, spec) -> tuple[float, float]:
    x0, x1, y0, y1, wpx, hpx, mleft, mtop = spec
    fppi = min(max(fppi, x0), x1)
    miss = min(max(miss, y0), y1)
    fx = (math.log10(fppi) - math.log10(x0)) / (math.log10(x1) - math.log10(x0))
    fy = (math.log10(miss) - math.log10(y0)) / (math.log10(y1) - math.log10(y0))
    return mleft + fx * wpx, mtop + (1.0 - fy) * hpx


def write_curve_svg(path: Path, name: str, curve: MrFppiCurve, mr: float):
    """Minimal deterministic log-log MR-FPPI plot."""
    spec = (1e-3, 1e1, 1e-2, 1.0, 420.0, 300.0, 60.0, 30.0)
    x0, x1, y0, y1, wpx, hpx, mleft, mtop = spec
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="520" height="390" '
        'font-family="monospace" font-size="11">',
        f'<text x="{mleft}" y="18">{name}: log-average MR '
        f"{100.0 * mr:.2f}% (FPPI 1e-2..1e0)</text>",
        f'<rect x="{mleft}" y="{mtop}" width="{wpx}" height="{hpx}" '
        'fill="none" stroke="black"/>',
    ]
    dec = 10.0 ** np.arange(math.log10(x0), math.log10(x1) + 0.5)
    for d in dec:
        gx, _ = _svg_xy(d, y1, spec)
        parts.append(
            f'<line x1="{gx:.1f}" y1="{mtop}" x2="{gx:.1f}" y2="{mtop + hpx}" '
            'stroke="#cccccc"/>'
        )
        parts.append(
            f'<text x="{gx - 12:.1f}" y="{mtop + hpx + 16}">1e{int(round(math.log10(d)))}</text>'
        )
    for d in 10.0 ** np.arange(math.log10(y0), math.log10(y1) + 0.5):
        _, gy = _svg_xy(x0, d, spec)
        parts.append(
            f'<line x1="{mleft}" y1="{gy:.1f}" x2="{mleft + wpx}" y2="{gy:.1f}" '
            'stroke="#cccccc"/>'
        )
        parts.append(
            f'<text x="{mleft - 45:.1f}" y="{gy + 4:.1f}">1e{int(round(math.log10(d)))}</text>'
        )
    pts = [
        _svg_xy(max(f, x0), max(m, y0), spec)
        for f, m in curve.points
    ]
    if pts:
        poly = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        parts.append(
            f'<polyline points="{poly}" fill="none" stroke="#c22" stroke-width="1.5"/>'
        )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Pipeline helpers shared by subcommands


def decode_frame(
    maps,
    cfg: RunConfig,
    use_mrf: bool,
) -> list[TopoLine]:
    if not use_mrf:
        return decode(*maps, cfg.decoder)
    cands = build_candidates(*maps, cfg.decoder)
    cands = refine(cands, cfg.mrf)
    pairs = hungarian_assign(cands.link_scores, cfg.decoder.min_link_score)
    return lines_from_candidates(cands, pairs)


def lines_to_detections(
    lines: list[TopoLine], stride: int, aspect: float
) -> list[tuple[TopoLine, BBox]]:
    """Scale decoded lines from map cells to image pixels and box them."""
    out = []
    for ln in lines:
        scaled = TopoLine(
            Point(ln.top.x * stride, ln.top.y * stride),
            Point(ln.bottom.x * stride, ln.bottom.y * stride),
            ln.score,
        )
        out.append((scaled, line_to_box(scaled, aspect)))
    return out


# ---------------------------------------------------------------------------
# Subcommands


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.set or [])
    scene_cfg = SCENE_PRESETS[args.scene_preset] if args.scene_preset else cfg.scene
    degrade_cfg = (
        DEGRADE_PRESETS[args.degrade_preset] if args.degrade_preset else cfg.degrade
    )
    out = Path(args.out)
    maps_dir = out / "maps"
    maps_dir.mkdir(parents=True, exist_ok=True)
    frames: dict[str, list[Annotation]] = {}
    base_seed = args.seed if args.seed is not None else scene_cfg.rng_seed

    def one_frame(fid: str, index: int):
        anns = generate_scene(
            dataclasses.replace(scene_cfg, rng_seed=base_seed + index)
        )
        maps = encode_maps(anns, scene_cfg.image_size, cfg.encoder)
        if args.snapshots > 1:
            seq = degrade_sequence(
                maps,
                args.snapshots,
                degrade_cfg,
                base_seed + index,
                anns,
                cfg.encoder.map_stride,
            )
            return anns, seq
        degraded = degrade(
            maps, degrade_cfg, base_seed + index, anns, cfg.encoder.map_stride
        )
        return anns, [degraded]

    items = [(f"{i:06d}", i) for i in range(args.frames)]
    results = _frame_map(one_frame, items, _num_threads(args.threads))
    for fid, (anns, seq) in sorted(results.items()):
        frames[fid] = anns
        if len(seq) == 1:
            write_frame_maps(maps_dir, fid, seq[0])
        else:
            for k, snap in enumerate(seq):
                write_frame_maps(maps_dir, fid, snap, snapshot=k)
    write_annotations(out / "annotations.tsv", frames)
    meta = {
        "map_stride": cfg.encoder.map_stride,
        "image_size": list(scene_cfg.image_size),
        "snapshots": args.snapshots,
        "seed": base_seed,
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(frames)} frames to {out}", file=sys.stderr)
    return 0


def cmd_encode(args) -> int:
    cfg = load_config(args.config, args.set or [])
    frames = parse_annotations(args.annotations)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if not frames:
        print("warning: no frames in annotation file", file=sys.stderr)
        return 0
    image_size = tuple(args.image_size) if args.image_size else cfg.scene.image_size

    def one_frame(fid, anns):
        return encode_maps(anns, image_size, cfg.encoder)

    results = _frame_map(one_frame, sorted(frames.items()), _num_threads(args.threads))
    for fid in sorted(results):
        write_frame_maps(out, fid, results[fid])
    print(f"encoded {len(results)} frames to {out}", file=sys.stderr)
    return 0


def cmd_decode(args) -> int:
    cfg = load_config(args.config, args.set or [])
    maps_dir = Path(args.maps)
    if not maps_dir.is_dir():
        raise FileNotFoundError(f"maps directory not found: {maps_dir}")
    stride = args.stride
    if stride is None:
        meta_path = maps_dir.parent / "meta.json"
        if meta_path.exists():
            stride = int(json.loads(meta_path.read_text())["map_stride"])
        else:
            stride = cfg.encoder.map_stride
    frames = list_frames(maps_dir)
    if not frames:
        raise FileNotFoundError(f"no map files under {maps_dir}")
    use_mrf = args.mrf == "on"
    temporal = args.temporal

    def one_frame(fid, snapshots):
        if snapshots is None:
            maps = read_frame_maps(maps_dir, fid)
        else:
            seq = [read_frame_maps(maps_dir, fid, k) for k in snapshots]
            if temporal == "none":
                maps = seq[-1]
            else:
                maps = aggregate_sequence(seq, temporal, args.ema_alpha)
        lines = decode_frame(maps, cfg, use_mrf)
        return lines_to_detections(lines, stride, cfg.aspect)

    results = _frame_map(one_frame, sorted(frames.items()), _num_threads(args.threads))
    write_detections(Path(args.out), {f: results[f] for f in sorted(results)})
    total = sum(len(v) for v in results.values())
    print(f"decoded {total} detections over {len(results)} frames", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    cfg = load_config(args.config, args.set or [])
    annotations = parse_annotations(args.annotations)
    detections = parse_detections(args.detections)
    missing = sorted(set(detections) - set(annotations))
    if missing:
        raise ValueError(
            "detections reference frames absent from annotations: "
            + ", ".join(missing[:20])
        )
    det_boxes = {f: [box for _, box in dets] for f, dets in detections.items()}
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    rows = ["protocol,log_avg_miss_rate"]
    for proto in cfg.protocols:
        try:
            curve, mr = evaluate_frames(det_boxes, annotations, proto, cfg.aspect)
        except ValueError as exc:
            if "empty protocol" in str(exc):
                print(f"{proto.name}: no ground truth under protocol, skipped",
                      file=sys.stderr)
                continue
            raise
        print(f"{proto.name}\tMR={100.0 * mr:.2f}%")
        rows.append(f"{proto.name},{mr:.6f}")
        if out_dir:
            write_curve_csv(out_dir / f"curve_{proto.name}.csv", curve)
            if args.svg:
                write_curve_svg(out_dir / f"curve_{proto.name}.svg", proto.name, curve, mr)
    if out_dir:
        (out_dir / "report.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    return 0


def cmd_bench(args) -> int:
    """Seeded end-to-end benchmark; optionally checked against golden MRs."""
    from .benchmark import run_benchmark

    report = run_benchmark(seed=args.seed, frames=args.frames)
    print(json.dumps(report, indent=2, sort_keys=True))
    if args.golden:
        golden = json.loads(Path(args.golden).read_text())
        worst = 0.0
        for key, ref in golden.items():
            got = report[key]
            worst = max(worst, abs(got - ref))
        tol = args.golden_tol
        if worst > tol:
            print(f"golden mismatch: max |delta|={worst:.4f} > {tol}", file=sys.stderr)
            return 1
        print(f"golden check ok (max |delta|={worst:.4f} <= {tol})", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tll", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override one config value (repeatable)")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: TLL_THREADS or 1)")

    sp = sub.add_parser("simulate", help="generate synthetic annotations and maps")
    common(sp)
    sp.add_argument("--out", required=True)
    sp.add_argument("--frames", type=int, default=10)
    sp.add_argument("--snapshots", type=int, default=1,
                    help="degraded snapshots per frame (for temporal decode)")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--scene-preset", choices=sorted(SCENE_PRESETS))
    sp.add_argument("--degrade-preset", choices=sorted(DEGRADE_PRESETS))
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("encode", help="render GT maps from an annotation file")
    common(sp)
    sp.add_argument("annotations")
    sp.add_argument("--out", required=True)
    sp.add_argument("--image-size", type=int, nargs=2, metavar=("W", "H"))
    sp.set_defaults(fn=cmd_encode)

    sp = sub.add_parser("decode", help="decode detections from a maps directory")
    common(sp)
    sp.add_argument("maps")
    sp.add_argument("--out", required=True)
    sp.add_argument("--mrf", choices=["on", "off"], default="off")
    sp.add_argument("--temporal", choices=["none", "max", "mean", "ema"],
                    default="none")
    sp.add_argument("--ema-alpha", type=float, default=0.5)
    sp.add_argument("--stride", type=int, default=None,
                    help="map stride (default: meta.json next to maps, else config)")
    sp.set_defaults(fn=cmd_decode)

    sp = sub.add_parser("eval", help="score detections against annotations")
    common(sp)
    sp.add_argument("detections")
    sp.add_argument("annotations")
    sp.add_argument("--out", help="directory for report.csv and curves")
    sp.add_argument("--svg", action="store_true", help="also write SVG plots")
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("bench", help="run the pinned synthetic benchmark")
    common(sp)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--frames", type=int, default=40)
    sp.add_argument("--golden", help="JSON file of reference metric values")
    sp.add_argument("--golden-tol", type=float, default=0.005,
                    help="max absolute MR deviation allowed")
    sp.set_defaults(fn=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
