"""Occlusion-aware refinement of link scores via max-product inference.

In crowded scenes a top vertex can have several bottom candidates whose
link scores are high and close.  Each such top forms a subset over its
ambiguous bottoms; a virtual box per (top, bottom) pair gives subsets a
geometric footprint, and overlapping footprints repel each other through a
pairwise compatibility exp(-IoU / alpha).  Damped max-product message
passing yields per-subset beliefs, which rescale the link scores before
the final bipartite matching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BBox, Point, TopoLine
from .decoder import CandidateSet
from .evaluation import DEFAULT_ASPECT, iou, line_to_box

BELIEF_FLOOR = 1e-12


@dataclass(frozen=True)
class MrfConfig:
    alpha: float = 0.5
    ambiguity_abs: float = 0.2
    ambiguity_rel: float = 0.8
    max_iterations: int = 20
    damping: float = 0.5
    convergence_eps: float = 1e-9
    aspect: float = DEFAULT_ASPECT

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")


@dataclass(frozen=True)
class MrfSubset:
    """One candidate top with its ambiguous bottoms.

    bottom_indices point back into the CandidateSet's bottom list;
    link_scores are the unary potentials; one virtual box per pair supplies
    the geometry for neighbor compatibilities.  beliefs is filled by
    inference and forms a distribution over the bottoms.
    """

    top_index: int
    top: tuple[Point, float]
    bottom_indices: tuple[int, ...]
    bottoms: tuple[tuple[Point, float], ...]
    link_scores: tuple[float, ...]
    virtual_boxes: tuple[BBox, ...]
    beliefs: tuple[float, ...] = ()

    @property
    def size(self) -> int:
        return len(self.bottom_indices)


def build_subsets(cands: CandidateSet, cfg: MrfConfig = MrfConfig()) -> list[MrfSubset]:
    """Group each top's plausible bottoms.

    A bottom joins the subset when its link score is at least ambiguity_abs
    and within ambiguity_rel of the top's best score.  Tops with no
    qualifying bottom are dropped.
    """
    subsets = []
    e = cands.link_scores
    for i, top in enumerate(cands.tops):
        row = e[i]
        finite = np.isfinite(row)
        if not finite.any():
            continue
        best = row[finite].max()
        keep = [
            j
            for j in range(len(cands.bottoms))
            if finite[j] and row[j] >= cfg.ambiguity_abs and row[j] >= cfg.ambiguity_rel * best
        ]
        if not keep:
            continue
        boxes = tuple(
            line_to_box(
                TopoLine(top[0], cands.bottoms[j][0], score=float(row[j])),
                cfg.aspect,
            )
            for j in keep
        )
        subsets.append(
            MrfSubset(
                top_index=i,
                top=top,
                bottom_indices=tuple(keep),
                bottoms=tuple(cands.bottoms[j] for j in keep),
                link_scores=tuple(float(row[j]) for j in keep),
                virtual_boxes=boxes,
            )
        )
    return subsets


def neighbor_compatibility(
    s_i: MrfSubset, s_j: MrfSubset, cfg: MrfConfig = MrfConfig()
) -> np.ndarray:
    """Pairwise compatibility psi[n][m] = exp(-IoU(VB_i[n], VB_j[m]) / alpha).

    Higher overlap means stronger repulsion; disjoint boxes give 1.
    """
    psi = np.empty((s_i.size, s_j.size))
    for n, bn in enumerate(s_i.virtual_boxes):
        for m, bm in enumerate(s_j.virtual_boxes):
            psi[n, m] = math.exp(-iou(bn, bm) / cfg.alpha)
    return psi


def subset_edges(
    subsets: list[MrfSubset], cfg: MrfConfig = MrfConfig()
) -> list[tuple[int, int, np.ndarray]]:
    """Edges between subsets with any overlapping virtual-box pair."""
    edges = []
    for a in range(len(subsets)):
        for b in range(a + 1, len(subsets)):
            overlap = any(
                iou(bn, bm) > 0.0
                for bn in subsets[a].virtual_boxes
                for bm in subsets[b].virtual_boxes
            )
            if overlap:
                edges.append((a, b, neighbor_compatibility(subsets[a], subsets[b], cfg)))
    return edges


def _has_cycle(num_nodes: int, edges: list[tuple[int, int, np.ndarray]]) -> bool:
    parent = list(range(num_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, _ in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            return True
        parent[ra] = rb
    return False


def max_product(
    subsets: list[MrfSubset],
    edges: list[tuple[int, int, np.ndarray]],
    cfg: MrfConfig = MrfConfig(),
) -> tuple[list[np.ndarray], bool]:
    """Synchronous max-product message passing over the subset graph.

    Unary potentials are the link scores; messages are damped on cyclic
    graphs (trees run undamped and converge exactly within the diameter).
    Returns per-subset beliefs normalized to sum 1, plus a convergence flag.
    """
    phi = [np.maximum(np.asarray(s.link_scores, dtype=np.float64), BELIEF_FLOOR) for s in subsets]
    if not subsets:
        return [], True
    damping = cfg.damping if _has_cycle(len(subsets), edges) else 0.0
    # Directed messages: msg[(src, dst)][state of dst].
    msgs: dict[tuple[int, int], np.ndarray] = {}
    neighbors: dict[int, list[tuple[int, np.ndarray]]] = {i: [] for i in range(len(subsets))}
    for a, b, psi in edges:
        neighbors[a].append((b, psi))
        neighbors[b].append((a, psi.T))
        msgs[(a, b)] = np.ones(subsets[b].size)
        msgs[(b, a)] = np.ones(subsets[a].size)
    converged = not edges
    for _ in range(cfg.max_iterations):
        if not edges:
            break
        new_msgs = {}
        change = 0.0
        for (src, dst), old in msgs.items():
            psi = next(p for nb, p in neighbors[src] if nb == dst)
            incoming = phi[src].copy()
            for nb, _ in neighbors[src]:
                if nb != dst:
                    incoming *= msgs[(nb, src)]
            fresh = (incoming[:, None] * psi).max(axis=0)
            fresh /= fresh.max()
            updated = damping * old + (1.0 - damping) * fresh
            change = max(change, float(np.abs(updated - old).max()))
            new_msgs[(src, dst)] = updated
        msgs = new_msgs
        if change < cfg.convergence_eps:
            converged = True
            break
    beliefs = []
    for i, s in enumerate(subsets):
        b = phi[i].copy()
        for nb, _ in neighbors[i]:
            b *= msgs[(nb, i)]
        total = b.sum()
        beliefs.append(b / total if total > 0 else np.full(s.size, 1.0 / s.size))
    return beliefs, converged


def refine(cands: CandidateSet, cfg: MrfConfig = MrfConfig()) -> CandidateSet:
    """Update ambiguous link scores by belief-weighted redistribution.

    Each subset member's score becomes belief * (sum of the subset's link
    scores); non-members keep their original scores.  Ambiguity-free
    candidate sets pass through unchanged.
    """
    subsets = build_subsets(cands, cfg)
    if not subsets:
        return cands
    edges = subset_edges(subsets, cfg)
    beliefs, _ = max_product(subsets, edges, cfg)
    e = np.array(cands.link_scores)
    for s, c in zip(subsets, beliefs):
        total = float(sum(s.link_scores))
        for n, j in enumerate(s.bottom_indices):
            e[s.top_index, j] = float(c[n]) * total
    return CandidateSet(cands.tops, cands.bottoms, e)
