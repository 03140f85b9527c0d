"""Render ground-truth vertex confidence maps and link vector fields.

Each instance's top and bottom vertex becomes a Gaussian peak; per-instance
peaks combine by max aggregation.  The link between them is a band of unit
vectors pointing from top to bottom; overlapping bands are averaged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Annotation, Point, ScalarGrid, VectorField


@dataclass(frozen=True)
class EncoderConfig:
    """Rendering parameters for the ground-truth maps.

    sigma is interpreted per sigma_mode: with "height_scaled" (default) the
    per-instance std dev is sigma * line length in pixels; with "fixed" it is
    an absolute pixel value.  Link band width is link_width_scale * line
    length.  Output maps have 1/map_stride the image resolution.
    average_mode "global" divides overlapping link vectors by the total
    instance count; "local" divides by the per-cell overlap count.
    """

    sigma: float = 0.1
    sigma_mode: str = "height_scaled"
    link_width_scale: float = 0.1
    map_stride: int = 1
    average_mode: str = "global"
    truncate_sigmas: float = 3.0
    min_sigma_cells: float = 1.0
    min_link_halfwidth_cells: float = 0.5

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.sigma_mode not in ("height_scaled", "fixed"):
            raise ValueError("sigma_mode must be 'height_scaled' or 'fixed'")
        if not 0.0 < self.link_width_scale <= 1.0:
            raise ValueError("link_width_scale must lie in (0, 1]")
        if self.map_stride < 1:
            raise ValueError("map_stride must be >= 1")
        if self.average_mode not in ("global", "local"):
            raise ValueError("average_mode must be 'global' or 'local'")


def map_shape(image_shape: tuple[int, int], stride: int) -> tuple[int, int]:
    """Map (width, height) for an image shape under the given stride."""
    w, h = image_shape
    return (int(math.ceil(w / stride)), int(math.ceil(h / stride)))


def _sigma_cells(ann: Annotation, cfg: EncoderConfig) -> float:
    if cfg.sigma_mode == "fixed":
        sigma_px = cfg.sigma
    else:
        sigma_px = cfg.sigma * ann.line.length
    return max(sigma_px / cfg.map_stride, cfg.min_sigma_cells)


def _check_inside(p: Point, image_shape: tuple[int, int]):
    w, h = image_shape
    if not (0.0 <= p.x <= w - 1 and 0.0 <= p.y <= h - 1):
        raise ValueError("vertex outside image")


def encode_vertex_map(
    annotations: list[Annotation],
    which: str,
    image_shape: tuple[int, int],
    cfg: EncoderConfig,
) -> ScalarGrid:
    """Render the top or bottom vertex confidence map.

    Every vertex contributes a Gaussian kernel exp(-d^2 / (2 sigma^2)) with
    peak 1 at the vertex; cells take the max over all instances.  Kernels are
    truncated at truncate_sigmas for speed.  An empty annotation list yields
    an all-zero map.
    """
    if which not in ("top", "bottom"):
        raise ValueError("which must be 'top' or 'bottom'")
    mw, mh = map_shape(image_shape, cfg.map_stride)
    out = np.zeros((mh, mw), dtype=np.float64)
    for ann in annotations:
        p = ann.line.top if which == "top" else ann.line.bottom
        _check_inside(p, image_shape)
        cx = p.x / cfg.map_stride
        cy = p.y / cfg.map_stride
        sigma = _sigma_cells(ann, cfg)
        reach = cfg.truncate_sigmas * sigma
        x0 = max(int(math.floor(cx - reach)), 0)
        x1 = min(int(math.ceil(cx + reach)), mw - 1)
        y0 = max(int(math.floor(cy - reach)), 0)
        y1 = min(int(math.ceil(cy + reach)), mh - 1)
        if x1 < x0 or y1 < y0:
            continue
        xs = np.arange(x0, x1 + 1, dtype=np.float64)
        ys = np.arange(y0, y1 + 1, dtype=np.float64)
        d2 = (xs[None, :] - cx) ** 2 + (ys[:, None] - cy) ** 2
        kernel = np.exp(-d2 / (2.0 * sigma * sigma))
        kernel[d2 > reach * reach] = 0.0
        patch = out[y0 : y1 + 1, x0 : x1 + 1]
        np.maximum(patch, kernel, out=patch)
    return ScalarGrid(out)


def _link_mask_and_dir(ann: Annotation, cfg: EncoderConfig, mw: int, mh: int):
    """Cells within the instance's link band plus its unit direction."""
    t = ann.line.top
    b = ann.line.bottom
    length = ann.line.length
    if length == 0.0:
        raise ValueError("zero-length topological line")
    tx, ty = t.x / cfg.map_stride, t.y / cfg.map_stride
    bx, by = b.x / cfg.map_stride, b.y / cfg.map_stride
    vx, vy = (bx - tx), (by - ty)
    seg_len = math.hypot(vx, vy)
    ux, uy = vx / seg_len, vy / seg_len
    half_w = max(
        (cfg.link_width_scale * length / cfg.map_stride) / 2.0,
        cfg.min_link_halfwidth_cells,
    )
    x0 = max(int(math.floor(min(tx, bx) - half_w)), 0)
    x1 = min(int(math.ceil(max(tx, bx) + half_w)), mw - 1)
    y0 = max(int(math.floor(min(ty, by) - half_w)), 0)
    y1 = min(int(math.ceil(max(ty, by) + half_w)), mh - 1)
    xs = np.arange(x0, x1 + 1, dtype=np.float64)
    ys = np.arange(y0, y1 + 1, dtype=np.float64)
    gx, gy = np.meshgrid(xs, ys)
    # Distance from each cell center to the segment [t, b].
    px = gx - tx
    py = gy - ty
    s = np.clip(px * ux + py * uy, 0.0, seg_len)
    dx = px - s * ux
    dy = py - s * uy
    dist = np.sqrt(dx * dx + dy * dy)
    mask = dist <= half_w
    return (slice(y0, y1 + 1), slice(x0, x1 + 1)), mask, (ux, uy)


def encode_maps(
    annotations: list[Annotation],
    image_shape: tuple[int, int],
    cfg: EncoderConfig,
) -> tuple[ScalarGrid, ScalarGrid, VectorField]:
    """Top map, bottom map, and link field for one frame."""
    return (
        encode_vertex_map(annotations, "top", image_shape, cfg),
        encode_vertex_map(annotations, "bottom", image_shape, cfg),
        encode_link_field(annotations, image_shape, cfg),
    )


def encode_link_field(
    annotations: list[Annotation],
    image_shape: tuple[int, int],
    cfg: EncoderConfig,
) -> VectorField:
    """Render the link direction field.

    Cells within each instance's band receive the unit vector from top to
    bottom; overlaps are averaged (global: by the total instance count,
    local: by the per-cell overlap count).  Rejects zero-length lines.
    """
    mw, mh = map_shape(image_shape, cfg.map_stride)
    acc = np.zeros((mh, mw, 2), dtype=np.float64)
    counts = np.zeros((mh, mw), dtype=np.float64)
    n = len(annotations)
    for ann in annotations:
        _check_inside(ann.line.top, image_shape)
        _check_inside(ann.line.bottom, image_shape)
        window, mask, (ux, uy) = _link_mask_and_dir(ann, cfg, mw, mh)
        patch = acc[window]
        patch[mask] += np.array([ux, uy])
        counts[window][mask] += 1.0
    if n == 0:
        return VectorField(acc)
    if cfg.average_mode == "global":
        acc /= float(n)
    else:
        nz = counts > 0
        acc[nz] /= counts[nz][:, None]
    return VectorField(acc)
