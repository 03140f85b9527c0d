"""Box synthesis, detection matching, and miss-rate/FPPI evaluation.

Detections are synthesized from topological lines as boxes with a uniform
aspect ratio whose centroid coincides with the line midpoint.  Matching is
greedy in descending detection score against ground truth under a protocol
(height bin, occlusion cap); filtered-out ground truth becomes ignore
regions that absorb detections without penalty.  The summary metric is the
log-average miss rate sampled at 9 logarithmic FPPI points in [1e-2, 1e0].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Annotation, BBox, TopoLine

DEFAULT_ASPECT = 0.41
FPPI_RANGE = (1e-2, 1e0)
FPPI_SAMPLES = 9
MISS_FLOOR = 1e-10


@dataclass(frozen=True)
class Protocol:
    """A ground-truth filter: which instances count during evaluation."""

    name: str
    height_range: tuple[float, float] = (0.0, float("inf"))
    max_occlusion: float = 1.0
    iou_threshold: float = 0.5

    def __post_init__(self):
        if not self.height_range[0] < self.height_range[1]:
            raise ValueError("height_range min must be below max")
        if not 0.0 < self.iou_threshold < 1.0:
            raise ValueError("iou_threshold must lie in (0, 1)")
        if not 0.0 <= self.max_occlusion <= 1.0:
            raise ValueError("max_occlusion must lie in [0, 1]")

    def accepts(self, ann: Annotation, height: float) -> bool:
        if ann.ignore:
            return False
        lo, hi = self.height_range
        return lo <= height < hi and ann.occlusion_fraction <= self.max_occlusion


def standard_protocols() -> list[Protocol]:
    """The shipped protocol presets (height bins follow the usual
    pedestrian-benchmark toolkit conventions; all values configurable)."""
    return [
        Protocol("Reasonable", (50.0, float("inf")), 0.35),
        Protocol("All", (0.0, float("inf")), 1.0),
        Protocol("Near", (80.0, float("inf")), 0.35),
        Protocol("Middle", (30.0, 80.0), 0.35),
        Protocol("Far", (0.0, 30.0), 0.35),
    ]


def line_to_box(line: TopoLine, aspect: float = DEFAULT_ASPECT) -> BBox:
    """Box of height = line length and width = aspect * height, centered on
    the line midpoint; the line's score is carried over."""
    h = line.length
    if h == 0.0:
        raise ValueError("zero-length topological line")
    mid = line.midpoint
    return BBox(cx=mid.x, cy=mid.y, w=aspect * h, h=h, score=line.score)


def iou(a: BBox, b: BBox) -> float:
    """Intersection-over-union of two axis-aligned boxes; 0 when disjoint."""
    ix = min(a.x1, b.x1) - max(a.x0, b.x0)
    iy = min(a.y1, b.y1) - max(a.y0, b.y0)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


@dataclass(frozen=True)
class MatchResult:
    """Per-image matching outcome.

    det_records holds one (score, kind) per detection, kind in
    {"tp", "fp", "ignored"}; num_gt is the count of protocol-accepted
    ground-truth instances.
    """

    tp: int
    fp: int
    fn: int
    ignored: int
    det_records: tuple[tuple[float, str], ...]
    num_gt: int


def match_detections(
    detections: list[BBox],
    annotations: list[Annotation],
    protocol: Protocol,
    aspect: float = DEFAULT_ASPECT,
) -> MatchResult:
    """Greedy one-to-one matching in descending detection score.

    Each detection takes the unmatched accepted GT with highest IoU >= the
    protocol threshold; failing that, it may be absorbed by an unmatched
    ignore region (counting neither tp nor fp).  Unmatched accepted GTs are
    false negatives.
    """
    gt_boxes = [line_to_box(a.line, aspect) for a in annotations]
    accepted = [protocol.accepts(a, gt_boxes[i].h) for i, a in enumerate(annotations)]
    order = sorted(range(len(detections)), key=lambda i: (-detections[i].score, i))
    gt_used = [False] * len(annotations)
    records: list[tuple[float, str]] = [None] * len(detections)  # type: ignore[list-item]
    tp = fp = ignored = 0
    for di in order:
        det = detections[di]
        best_real, best_real_iou = -1, 0.0
        best_ign, best_ign_iou = -1, 0.0
        for gi, gbox in enumerate(gt_boxes):
            if gt_used[gi]:
                continue
            ov = iou(det, gbox)
            if ov < protocol.iou_threshold:
                continue
            if accepted[gi]:
                if ov > best_real_iou:
                    best_real, best_real_iou = gi, ov
            elif ov > best_ign_iou:
                best_ign, best_ign_iou = gi, ov
        if best_real >= 0:
            gt_used[best_real] = True
            tp += 1
            records[di] = (det.score, "tp")
        elif best_ign >= 0:
            gt_used[best_ign] = True
            ignored += 1
            records[di] = (det.score, "ignored")
        else:
            fp += 1
            records[di] = (det.score, "fp")
    num_gt = sum(accepted)
    fn = num_gt - tp
    return MatchResult(tp, fp, fn, ignored, tuple(records), num_gt)


@dataclass(frozen=True)
class MrFppiCurve:
    """Operating points swept over score thresholds, highest first."""

    thresholds: tuple[float, ...]
    points: tuple[tuple[float, float], ...]  # (fppi, miss_rate)


def mr_fppi(per_image_results: list[MatchResult], num_images: int) -> MrFppiCurve:
    """Sweep score thresholds over pooled matches.

    Greedy matching is hierarchical in score, so restricting to detections
    with score >= t reproduces the greedy matching of that subset exactly.
    Raises for zero ground-truth instances under the protocol.
    """
    if num_images < 1:
        raise ValueError("need at least one image")
    total_gt = sum(r.num_gt for r in per_image_results)
    if total_gt == 0:
        raise ValueError("empty protocol")
    scored: list[tuple[float, str]] = []
    for r in per_image_results:
        scored.extend(rec for rec in r.det_records if rec[1] != "ignored")
    scored.sort(key=lambda rec: -rec[0])
    thresholds = [math.inf]
    points = [(0.0, 1.0)]
    tp = fp = 0
    i = 0
    while i < len(scored):
        t = scored[i][0]
        while i < len(scored) and scored[i][0] == t:
            if scored[i][1] == "tp":
                tp += 1
            else:
                fp += 1
            i += 1
        thresholds.append(t)
        points.append((fp / num_images, (total_gt - tp) / total_gt))
    return MrFppiCurve(tuple(thresholds), tuple(points))


def log_average_miss_rate(curve: MrFppiCurve) -> float:
    """Exp of the mean log miss rate at 9 FPPI points log-spaced in the
    standard range; at references the curve cannot reach, the lowest
    available miss rate is used.  Misses are floored at 1e-10 before log."""
    refs = np.logspace(
        math.log10(FPPI_RANGE[0]), math.log10(FPPI_RANGE[1]), FPPI_SAMPLES
    )
    logs = []
    for ref in refs:
        eligible = [m for f, m in curve.points if f <= ref + 1e-12]
        miss = min(eligible) if eligible else min(m for _, m in curve.points)
        logs.append(math.log(max(miss, MISS_FLOOR)))
    return float(math.exp(sum(logs) / len(logs)))


def evaluate_frames(
    detections_by_frame: dict[str, list[BBox]],
    annotations_by_frame: dict[str, list[Annotation]],
    protocol: Protocol,
    aspect: float = DEFAULT_ASPECT,
) -> tuple[MrFppiCurve, float]:
    """Match every frame under one protocol and reduce to a curve + MR."""
    results = [
        match_detections(detections_by_frame.get(fid, []), anns, protocol, aspect)
        for fid, anns in sorted(annotations_by_frame.items())
    ]
    curve = mr_fppi(results, num_images=len(annotations_by_frame))
    return curve, log_average_miss_rate(curve)


def annotation_consistency(annotator_boxes: list[BBox]) -> float:
    """IoU between the intersection of all annotators' boxes and their union.

    Exact for axis-aligned boxes via coordinate-compressed area sweep.
    Returns 0 when the common intersection is empty.
    """
    if len(annotator_boxes) < 2:
        raise ValueError("need at least two annotators")
    ix0 = max(b.x0 for b in annotator_boxes)
    iy0 = max(b.y0 for b in annotator_boxes)
    ix1 = min(b.x1 for b in annotator_boxes)
    iy1 = min(b.y1 for b in annotator_boxes)
    inter_area = max(ix1 - ix0, 0.0) * max(iy1 - iy0, 0.0)
    if inter_area == 0.0:
        return 0.0
    xs = np.unique([v for b in annotator_boxes for v in (b.x0, b.x1)])
    ys = np.unique([v for b in annotator_boxes for v in (b.y0, b.y1)])
    union_area = 0.0
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            cx = (xs[i] + xs[i + 1]) / 2.0
            cy = (ys[j] + ys[j + 1]) / 2.0
            if any(b.x0 <= cx <= b.x1 and b.y0 <= cy <= b.y1 for b in annotator_boxes):
                union_area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j])
    return inter_area / union_area
