"""Squared-error training objective over the three maps, with its gradient.

The objective is the squared L2 distance between predicted and ground-truth
top maps, bottom maps, and (weighted) link fields, summed over all cells.
The analytic gradient enables verification against finite differences
without any network in the loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ScalarGrid, VectorField


@dataclass(frozen=True)
class LossConfig:
    """lam weights the link-field term; normalize_by_cells divides by the
    total number of scalar cells (vector cells count both components)."""

    lam: float = 1.0
    normalize_by_cells: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be non-negative")


def _check_shapes(pred_t, pred_b, pred_l, gt_t, gt_b, gt_l):
    shape = (pred_t.height, pred_t.width)
    for g in (pred_b, gt_t, gt_b):
        if (g.height, g.width) != shape:
            raise ValueError("all maps must share one shape")
    for f in (pred_l, gt_l):
        if (f.height, f.width) != shape:
            raise ValueError("all maps must share one shape")
    return shape


def _cell_count(shape) -> float:
    h, w = shape
    # Scalar terms contribute w*h cells each; the vector term 2*w*h.
    return float(4 * w * h)


def tll_loss(
    pred_t: ScalarGrid,
    pred_b: ScalarGrid,
    pred_l: VectorField,
    gt_t: ScalarGrid,
    gt_b: ScalarGrid,
    gt_l: VectorField,
    cfg: LossConfig = LossConfig(),
) -> float:
    """Total squared error: |pt-gt|^2 + |pb-gb|^2 + lam * |pl-gl|^2."""
    shape = _check_shapes(pred_t, pred_b, pred_l, gt_t, gt_b, gt_l)
    dt = pred_t.data - gt_t.data
    db = pred_b.data - gt_b.data
    dl = pred_l.data - gt_l.data
    total = float(np.sum(dt * dt) + np.sum(db * db) + cfg.lam * np.sum(dl * dl))
    if cfg.normalize_by_cells:
        total /= _cell_count(shape)
    return total


def tll_loss_gradient(
    pred_t: ScalarGrid,
    pred_b: ScalarGrid,
    pred_l: VectorField,
    gt_t: ScalarGrid,
    gt_b: ScalarGrid,
    gt_l: VectorField,
    cfg: LossConfig = LossConfig(),
) -> tuple[ScalarGrid, ScalarGrid, VectorField]:
    """Gradient of tll_loss with respect to the predicted maps."""
    shape = _check_shapes(pred_t, pred_b, pred_l, gt_t, gt_b, gt_l)
    scale = 2.0
    if cfg.normalize_by_cells:
        scale /= _cell_count(shape)
    grad_t = scale * (pred_t.data - gt_t.data)
    grad_b = scale * (pred_b.data - gt_b.data)
    grad_l = scale * cfg.lam * (pred_l.data - gt_l.data)
    return (
        ScalarGrid(grad_t),
        ScalarGrid(grad_b),
        VectorField(grad_l, check_norm=False),
    )
