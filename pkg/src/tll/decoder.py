"""Turn predicted maps into scored topological lines.

Pipeline: peak extraction with non-maximum suppression on both vertex maps,
link scoring by projecting the link field onto each candidate top-bottom
edge, then maximum-score bipartite assignment.  Also provides the
deterministic multi-frame map aggregation used for temporal smoothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter
from scipy.optimize import linear_sum_assignment

from .core import Point, ScalarGrid, TopoLine, VectorField, sample_bilinear_many


@dataclass(frozen=True)
class DecoderConfig:
    peak_threshold: float = 0.3
    nms_radius: float = 2.0
    num_samples: int = 10
    max_pair_distance: float = math.inf
    min_link_score: float = 0.2
    refine_subcell: bool = True

    def __post_init__(self):
        if self.num_samples < 2:
            raise ValueError("num_samples must be >= 2")
        if not self.nms_radius > 0:
            raise ValueError("nms_radius must be positive")
        if not 0.0 <= self.peak_threshold <= 1.0:
            raise ValueError("peak_threshold must lie in [0, 1]")


@dataclass(frozen=True)
class CandidateSet:
    """NMS peaks of both maps plus the link-score matrix E[i][j].

    Gated pairs (too far apart, upward, or degenerate) hold -inf.
    """

    tops: tuple[tuple[Point, float], ...]
    bottoms: tuple[tuple[Point, float], ...]
    link_scores: np.ndarray

    def __post_init__(self):
        e = np.array(self.link_scores, dtype=np.float64)
        if e.shape != (len(self.tops), len(self.bottoms)):
            raise ValueError("link_scores must be |tops| x |bottoms|")
        e.setflags(write=False)
        object.__setattr__(self, "link_scores", e)


def _refine_axis(vals: np.ndarray, idx: int) -> float:
    """Sub-cell peak offset from a parabola through log values when valid."""
    if idx <= 0 or idx >= len(vals) - 1:
        return 0.0
    a, b, c = vals[idx - 1], vals[idx], vals[idx + 1]
    if a <= 0.0 or c <= 0.0 or b <= a or b <= c:
        return 0.0
    la, lb, lc = math.log(a), math.log(b), math.log(c)
    denom = la - 2.0 * lb + lc
    if denom >= 0.0:
        return 0.0
    off = 0.5 * (la - lc) / denom
    return float(np.clip(off, -0.5, 0.5))


def nms_peaks(grid: ScalarGrid, cfg: DecoderConfig) -> list[tuple[Point, float]]:
    """Local maxima >= peak_threshold with greedy radius suppression.

    No two returned points lie within nms_radius of each other; output is
    sorted by descending confidence (ties broken by position).
    """
    data = grid.data
    local_max = (data == maximum_filter(data, size=3, mode="nearest")) & (
        data >= cfg.peak_threshold
    )
    ys, xs = np.nonzero(local_max)
    if len(xs) == 0:
        return []
    confs = data[ys, xs]
    order = np.lexsort((xs, ys, -confs))
    kept: list[tuple[float, float, float]] = []
    r2 = cfg.nms_radius * cfg.nms_radius
    for k in order:
        x, y, c = float(xs[k]), float(ys[k]), float(confs[k])
        if any((x - kx) ** 2 + (y - ky) ** 2 <= r2 for kx, ky, _ in kept):
            continue
        kept.append((x, y, c))
    peaks = []
    for x, y, c in kept:
        if cfg.refine_subcell:
            xi, yi = int(x), int(y)
            x = x + _refine_axis(data[yi, :], xi)
            y = y + _refine_axis(data[:, xi], yi)
        peaks.append((Point(x, y), c))
    return peaks


def link_score(field: VectorField, top: Point, bottom: Point, cfg: DecoderConfig) -> float:
    """Mean projection of the link field onto the candidate edge direction.

    Samples num_samples points evenly from top to bottom inclusive and
    averages the dot product with the edge's unit vector; clamped to [-1, 1].
    """
    dx = bottom.x - top.x
    dy = bottom.y - top.y
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        raise ValueError("degenerate candidate pair")
    u = np.linspace(0.0, 1.0, cfg.num_samples)
    xs = top.x + u * dx
    ys = top.y + u * dy
    vecs = sample_bilinear_many(field, xs, ys)
    score = float(np.mean(vecs[:, 0] * dx + vecs[:, 1] * dy) / norm)
    return float(np.clip(score, -1.0, 1.0))


def hungarian_assign(scores, min_link_score: float) -> list[tuple[int, int]]:
    """Maximum-total-score one-to-one assignment over eligible pairs.

    Pairs with score below min_link_score are never matched; candidates may
    stay unmatched when that increases the total.  Solved exactly via a
    dummy-padded linear sum assignment.
    """
    e = np.asarray(scores, dtype=np.float64)
    if e.ndim != 2:
        raise ValueError("score matrix must be 2D")
    n, m = e.shape
    if n == 0 or m == 0:
        return []
    if np.isnan(e).any():
        raise ValueError("score matrix must not contain NaN")
    eligible = np.isfinite(e) & (e >= min_link_score)
    if not eligible.any():
        return []
    big = float(np.abs(e[eligible]).sum()) + 1.0
    padded = np.full((n + m, n + m), 0.0)
    real = np.where(eligible, e, -big)
    padded[:n, :m] = real
    padded[:n, m:] = -big
    padded[:n, m:][np.arange(n), np.arange(n)] = 0.0
    padded[n:, :m] = -big
    padded[n:, :m][np.arange(m), np.arange(m)] = 0.0
    rows, cols = linear_sum_assignment(-padded)
    pairs = [
        (int(i), int(j))
        for i, j in zip(rows, cols)
        if i < n and j < m and eligible[i, j]
    ]
    pairs.sort()
    return pairs


def build_candidates(
    pred_t: ScalarGrid,
    pred_b: ScalarGrid,
    pred_l: VectorField,
    cfg: DecoderConfig,
) -> CandidateSet:
    """Extract peaks and score every gate-passing top-bottom pair."""
    if (pred_t.width, pred_t.height) != (pred_b.width, pred_b.height) or (
        pred_t.width,
        pred_t.height,
    ) != (pred_l.width, pred_l.height):
        raise ValueError("all maps must share one shape")
    tops = nms_peaks(pred_t, cfg)
    bottoms = nms_peaks(pred_b, cfg)
    e = np.full((len(tops), len(bottoms)), -math.inf)
    for i, (tp, _) in enumerate(tops):
        for j, (bp, _) in enumerate(bottoms):
            if bp.y < tp.y:
                continue
            if tp.distance_to(bp) > cfg.max_pair_distance:
                continue
            if tp == bp:
                continue
            e[i, j] = link_score(pred_l, tp, bp, cfg)
    return CandidateSet(tuple(tops), tuple(bottoms), e)


def lines_from_candidates(
    cands: CandidateSet, pairs: list[tuple[int, int]]
) -> list[TopoLine]:
    """Assemble scored lines; score = conf_top * conf_bottom * link score,
    clamped into [0, 1]."""
    lines = []
    for i, j in pairs:
        tp, tc = cands.tops[i]
        bp, bc = cands.bottoms[j]
        score = float(np.clip(tc * bc * cands.link_scores[i, j], 0.0, 1.0))
        lines.append(TopoLine(tp, bp, score))
    lines.sort(key=lambda ln: (-ln.score, ln.top.y, ln.top.x))
    return lines


def decode(
    pred_t: ScalarGrid,
    pred_b: ScalarGrid,
    pred_l: VectorField,
    cfg: DecoderConfig = DecoderConfig(),
) -> list[TopoLine]:
    """Full single-frame decode: peaks, link scores, bipartite assignment."""
    cands = build_candidates(pred_t, pred_b, pred_l, cfg)
    pairs = hungarian_assign(cands.link_scores, cfg.min_link_score)
    return lines_from_candidates(cands, pairs)


def aggregate_sequence(
    frames: list[tuple[ScalarGrid, ScalarGrid, VectorField]],
    mode: str = "max",
    ema_alpha: float = 0.5,
) -> tuple[ScalarGrid, ScalarGrid, VectorField]:
    """Aggregate a time-ordered map sequence into one triple.

    Scalar maps aggregate element-wise.  For the vector field, "max" keeps
    the per-cell vector of largest norm (element-wise max of components
    would fabricate directions); "mean"/"ema" combine linearly, which keeps
    norms <= 1 by convexity.  EMA runs forward so the last frame is the
    reference: state = alpha * current + (1 - alpha) * state.
    """
    if not frames:
        raise ValueError("empty sequence")
    if mode not in ("max", "mean", "ema"):
        raise ValueError("mode must be 'max', 'mean', or 'ema'")
    if mode == "ema" and not 0.0 < ema_alpha <= 1.0:
        raise ValueError("ema_alpha must lie in (0, 1]")
    shape = (frames[0][0].height, frames[0][0].width)
    for ft, fb, fl in frames:
        for g in (ft, fb, fl):
            if (g.height, g.width) != shape:
                raise ValueError("all frames must share one shape")
    t_stack = np.stack([f[0].data for f in frames])
    b_stack = np.stack([f[1].data for f in frames])
    l_stack = np.stack([f[2].data for f in frames])
    if mode == "max":
        agg_t = t_stack.max(axis=0)
        agg_b = b_stack.max(axis=0)
        norms = np.sqrt(np.sum(l_stack * l_stack, axis=3))
        pick = norms.argmax(axis=0)
        yy, xx = np.indices(shape)
        agg_l = l_stack[pick, yy, xx]
    elif mode == "mean":
        agg_t = t_stack.mean(axis=0)
        agg_b = b_stack.mean(axis=0)
        agg_l = l_stack.mean(axis=0)
    else:
        agg_t, agg_b, agg_l = t_stack[0], b_stack[0], l_stack[0]
        for k in range(1, len(frames)):
            agg_t = ema_alpha * t_stack[k] + (1.0 - ema_alpha) * agg_t
            agg_b = ema_alpha * b_stack[k] + (1.0 - ema_alpha) * agg_b
            agg_l = ema_alpha * l_stack[k] + (1.0 - ema_alpha) * agg_l
    return ScalarGrid(agg_t), ScalarGrid(agg_b), VectorField(agg_l)
