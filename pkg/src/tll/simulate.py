"""Synthetic scene generation, map degradation, and brute-force oracles.

Scenes stand in for a real dataset: instances are placed with controlled
separation or grouped into occlusion clusters with a guaranteed box
overlap.  Degradation stands in for network prediction error (noise, blur,
peak dropout, height-dependent attenuation).  The brute-force solvers are
definitional oracles for the assignment and MRF inference paths.

All randomness flows through numpy's default_rng (PCG64), so every output
is reproducible from (config, seed) on any platform.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter

from .core import Annotation, Point, ScalarGrid, TopoLine, VectorField
from .evaluation import DEFAULT_ASPECT, iou, line_to_box


@dataclass(frozen=True)
class SceneConfig:
    image_size: tuple[int, int] = (160, 120)
    num_instances: tuple[int, int] = (1, 10)
    height_range: tuple[float, float] = (20.0, 60.0)
    occlusion_cluster_prob: float = 0.0
    lean_angle_range: float = 10.0
    rng_seed: int = 0
    min_separation: float = 12.0
    aspect: float = DEFAULT_ASPECT
    max_attempts: int = 500

    def __post_init__(self):
        if self.num_instances[0] < 0 or self.num_instances[0] > self.num_instances[1]:
            raise ValueError("num_instances range invalid")
        if not 0 < self.height_range[0] <= self.height_range[1]:
            raise ValueError("height_range invalid")
        if not 0.0 <= self.occlusion_cluster_prob <= 1.0:
            raise ValueError("occlusion_cluster_prob must lie in [0, 1]")


@dataclass(frozen=True)
class DegradeConfig:
    gaussian_noise_sigma: float = 0.0
    blur_radius: float = 0.0
    peak_dropout_prob: float = 0.0
    confidence_attenuation: float = 0.0
    attenuation_reference_height: float = 100.0
    dropout_radius_scale: float = 0.3

    def __post_init__(self):
        for v in (
            self.gaussian_noise_sigma,
            self.blur_radius,
            self.peak_dropout_prob,
            self.confidence_attenuation,
        ):
            if v < 0:
                raise ValueError("degradation parameters must be non-negative")


DEGRADE_PRESETS = {
    "none": DegradeConfig(),
    "mild": DegradeConfig(
        gaussian_noise_sigma=0.02,
        blur_radius=0.5,
        peak_dropout_prob=0.05,
        confidence_attenuation=0.3,
    ),
    "heavy": DegradeConfig(
        gaussian_noise_sigma=0.06,
        blur_radius=1.0,
        peak_dropout_prob=0.2,
        confidence_attenuation=0.6,
    ),
}

SCENE_PRESETS = {
    "sparse": SceneConfig(num_instances=(2, 8)),
    "crowded": SceneConfig(
        image_size=(240, 160),
        num_instances=(6, 14),
        occlusion_cluster_prob=0.5,
    ),
}


def _line_for(cx, cy, height, theta_deg) -> TopoLine:
    th = math.radians(theta_deg)
    dx = math.sin(th) * height / 2.0
    dy = math.cos(th) * height / 2.0
    return TopoLine(Point(cx - dx, cy - dy), Point(cx + dx, cy + dy))


def _fits_inside(line: TopoLine, image_size, aspect) -> bool:
    w, h = image_size
    box = line_to_box(line, aspect)
    return (
        box.x0 >= 0.0
        and box.y0 >= 0.0
        and box.x1 <= w - 1
        and box.y1 <= h - 1
        and 0.0 <= line.top.x <= w - 1
        and 0.0 <= line.bottom.x <= w - 1
    )


def _separated(line: TopoLine, others: list[TopoLine], cfg: SceneConfig) -> bool:
    box = line_to_box(line, cfg.aspect)
    for other in others:
        if line.top.distance_to(other.top) < cfg.min_separation:
            return False
        if line.bottom.distance_to(other.bottom) < cfg.min_separation:
            return False
        if iou(box, line_to_box(other, cfg.aspect)) >= 0.15:
            return False
    return True


def _sample_single(rng, cfg: SceneConfig, others: list[TopoLine]) -> TopoLine | None:
    w, h = cfg.image_size
    for _ in range(cfg.max_attempts):
        height = float(rng.uniform(*cfg.height_range))
        theta = float(rng.uniform(-cfg.lean_angle_range, cfg.lean_angle_range))
        margin_x = max(cfg.aspect * height, height * abs(math.sin(math.radians(theta)))) / 2.0
        margin_y = height / 2.0
        if w - 1 - 2 * margin_x <= 0 or h - 1 - 2 * margin_y <= 0:
            continue
        cx = float(rng.uniform(margin_x, w - 1 - margin_x))
        cy = float(rng.uniform(margin_y, h - 1 - margin_y))
        line = _line_for(cx, cy, height, theta)
        if _fits_inside(line, cfg.image_size, cfg.aspect) and _separated(line, others, cfg):
            return line
    return None


def _sample_companion(rng, cfg: SceneConfig, base: TopoLine, others: list[TopoLine]) -> TopoLine | None:
    """A cluster member overlapping the base at box IoU >= 0.3."""
    base_box = line_to_box(base, cfg.aspect)
    base_mid = base.midpoint
    base_h = base.length
    for _ in range(cfg.max_attempts):
        shift = float(rng.uniform(0.15, 0.45)) * base_box.w * (1 if rng.random() < 0.5 else -1)
        height = base_h * float(rng.uniform(0.9, 1.1))
        theta = float(rng.uniform(-cfg.lean_angle_range, cfg.lean_angle_range))
        cy = base_mid.y + float(rng.uniform(-0.05, 0.05)) * base_h
        line = _line_for(base_mid.x + shift, cy, height, theta)
        if not _fits_inside(line, cfg.image_size, cfg.aspect):
            continue
        if iou(line_to_box(line, cfg.aspect), base_box) < 0.3:
            continue
        if line.top.distance_to(base.top) < 2.0:
            continue
        if not _separated(line, others, cfg):
            continue
        return line
    return None


def _occlusion_fractions(lines: list[TopoLine], aspect: float) -> list[float]:
    boxes = [line_to_box(ln, aspect) for ln in lines]
    fracs = []
    for i, bi in enumerate(boxes):
        worst = 0.0
        for j, bj in enumerate(boxes):
            if i == j:
                continue
            ix = min(bi.x1, bj.x1) - max(bi.x0, bj.x0)
            iy = min(bi.y1, bj.y1) - max(bi.y0, bj.y0)
            if ix > 0 and iy > 0:
                worst = max(worst, ix * iy / bi.area)
        fracs.append(min(worst, 1.0))
    return fracs


def generate_scene(cfg: SceneConfig) -> list[Annotation]:
    """Place instances deterministically from the config seed.

    occlusion_cluster_prob is the target fraction of instances that belong
    to an occlusion cluster (2-3 instances with pairwise-to-base box IoU
    >= 0.3); the cluster-start probability is derived so the expected
    clustered fraction matches.  Raises when instances cannot fit.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    n = int(rng.integers(cfg.num_instances[0], cfg.num_instances[1] + 1))
    frac = cfg.occlusion_cluster_prob
    mean_cluster = 2.5
    start_prob = frac / (mean_cluster - frac * (mean_cluster - 1.0))
    lines: list[TopoLine] = []
    while len(lines) < n:
        remaining = n - len(lines)
        in_cluster = remaining >= 2 and rng.random() < start_prob
        base = _sample_single(rng, cfg, lines)
        if base is None:
            raise ValueError(
                f"infeasible scene config: only {len(lines)}/{n} instances fit"
            )
        lines.append(base)
        if in_cluster:
            size = int(rng.integers(2, 4))
            size = min(size, remaining)
            outsiders = lines[:-1]
            for _ in range(size - 1):
                comp = _sample_companion(rng, cfg, base, outsiders)
                if comp is None:
                    break
                lines.append(comp)
    fracs = _occlusion_fractions(lines, cfg.aspect)
    return [Annotation(line=ln, occlusion_fraction=f) for ln, f in zip(lines, fracs)]


def _disk_mask(shape, cx, cy, radius):
    h, w = shape
    x0 = max(int(math.floor(cx - radius)), 0)
    x1 = min(int(math.ceil(cx + radius)), w - 1)
    y0 = max(int(math.floor(cy - radius)), 0)
    y1 = min(int(math.ceil(cy + radius)), h - 1)
    if x1 < x0 or y1 < y0:
        return None, None
    xs = np.arange(x0, x1 + 1)
    ys = np.arange(y0, y1 + 1)
    mask = (xs[None, :] - cx) ** 2 + (ys[:, None] - cy) ** 2 <= radius * radius
    return (slice(y0, y1 + 1), slice(x0, x1 + 1)), mask


def degrade(
    maps: tuple[ScalarGrid, ScalarGrid, VectorField],
    cfg: DegradeConfig,
    rng_seed,
    annotations: list[Annotation] | None = None,
    map_stride: int = 1,
) -> tuple[ScalarGrid, ScalarGrid, VectorField]:
    """Model prediction error on ideal maps.

    Order: per-instance attenuation, per-vertex peak dropout, box blur,
    additive Gaussian noise; scalars are clamped to [0, 1] and vectors
    renormalized to norm <= 1.  Dropout and attenuation need annotations to
    locate the peaks.  An all-zero config is the identity.
    """
    rng = np.random.default_rng(rng_seed)
    t = np.array(maps[0].data)
    b = np.array(maps[1].data)
    link = np.array(maps[2].data)
    needs_anns = cfg.peak_dropout_prob > 0 or cfg.confidence_attenuation > 0
    if needs_anns and annotations is None:
        raise ValueError("peak dropout and attenuation require annotations")
    if annotations is not None and needs_anns:
        for ann in annotations:
            height_px = ann.line.length
            radius = max(cfg.dropout_radius_scale * height_px / map_stride, 3.0)
            atten = min((height_px / cfg.attenuation_reference_height) ** cfg.confidence_attenuation, 1.0)
            for which, arr in (("top", t), ("bottom", b)):
                p = ann.line.top if which == "top" else ann.line.bottom
                window, mask = _disk_mask(
                    arr.shape, p.x / map_stride, p.y / map_stride, radius
                )
                if window is None:
                    continue
                if cfg.confidence_attenuation > 0:
                    arr[window][mask] *= atten
                if cfg.peak_dropout_prob > 0 and rng.random() < cfg.peak_dropout_prob:
                    arr[window][mask] = 0.0
    if cfg.blur_radius > 0:
        size = 2 * int(round(cfg.blur_radius)) + 1
        if size > 1:
            t = uniform_filter(t, size=size, mode="constant")
            b = uniform_filter(b, size=size, mode="constant")
            link[..., 0] = uniform_filter(link[..., 0], size=size, mode="constant")
            link[..., 1] = uniform_filter(link[..., 1], size=size, mode="constant")
    if cfg.gaussian_noise_sigma > 0:
        t += rng.normal(0.0, cfg.gaussian_noise_sigma, t.shape)
        b += rng.normal(0.0, cfg.gaussian_noise_sigma, b.shape)
        link += rng.normal(0.0, cfg.gaussian_noise_sigma, link.shape)
    np.clip(t, 0.0, 1.0, out=t)
    np.clip(b, 0.0, 1.0, out=b)
    norms = np.sqrt(np.sum(link * link, axis=2))
    over = norms > 1.0
    if over.any():
        link[over] /= norms[over][:, None]
    return ScalarGrid(t), ScalarGrid(b), VectorField(link)


def degrade_sequence(
    maps: tuple[ScalarGrid, ScalarGrid, VectorField],
    num_frames: int,
    cfg: DegradeConfig,
    rng_seed: int,
    annotations: list[Annotation] | None = None,
    map_stride: int = 1,
) -> list[tuple[ScalarGrid, ScalarGrid, VectorField]]:
    """Independently degraded copies of one scene's maps, one per frame."""
    children = np.random.SeedSequence(rng_seed).spawn(num_frames)
    return [
        degrade(maps, cfg, child, annotations, map_stride) for child in children
    ]


def brute_force_assign(scores, min_link_score: float) -> list[tuple[int, int]]:
    """Exhaustive maximum-total-score one-to-one assignment.

    Enumerates every injection from the smaller dimension into the larger
    (skips allowed), so it is exponential and restricted to
    min(rows, cols) <= 8.
    """
    e = np.asarray(scores, dtype=np.float64)
    if e.ndim != 2:
        raise ValueError("score matrix must be 2D")
    n, m = e.shape
    if n == 0 or m == 0:
        return []
    if min(n, m) > 8:
        raise ValueError("matrix too large for brute force")
    transposed = n > m
    if transposed:
        e = e.T
        n, m = m, n
    eligible = np.isfinite(e) & (e >= min_link_score)
    contrib = np.where(eligible & (e > 0.0), e, 0.0)
    best_total = 0.0
    best_pairs: list[tuple[int, int]] = []
    rows = np.arange(n)
    for perm in itertools.permutations(range(m), n):
        cols = np.asarray(perm)
        total = float(contrib[rows, cols].sum())
        if total > best_total + 1e-15:
            best_total = total
            best_pairs = [
                (int(i), int(j))
                for i, j in zip(rows, cols)
                if eligible[i, j] and e[i, j] > 0.0
            ]
    if transposed:
        best_pairs = [(j, i) for i, j in best_pairs]
    best_pairs.sort()
    return best_pairs


def assignment_total(scores, pairs: list[tuple[int, int]]) -> float:
    e = np.asarray(scores, dtype=np.float64)
    return float(sum(e[i, j] for i, j in pairs))


def mrf_objective(subsets, edges, states: tuple[int, ...]) -> float:
    """The joint compatibility product for one bottom choice per subset."""
    value = 1.0
    for s, n in zip(subsets, states):
        value *= max(s.link_scores[n], 1e-12)
    for a, b, psi in edges:
        value *= psi[states[a], states[b]]
    return value


def brute_force_mrf_map(subsets, edges) -> tuple[tuple[int, ...], float]:
    """Exhaustive joint maximization of the subset-graph objective.

    Enumerates every joint bottom assignment; errors when the state space
    exceeds 1e5 configurations.
    """
    sizes = [s.size for s in subsets]
    if not sizes:
        return (), 1.0
    space = 1
    for k in sizes:
        space *= k
    if space > 100_000:
        raise ValueError("state space too large for brute force")
    best_states = None
    best_value = -math.inf
    for states in itertools.product(*(range(k) for k in sizes)):
        value = mrf_objective(subsets, edges, states)
        if value > best_value:
            best_value = value
            best_states = states
    return best_states, best_value
