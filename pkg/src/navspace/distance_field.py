"""Obstacle-boundary distance fields in image space.

Pipeline: edge map of the navigability mask, strong-boundary filtering by
row, exact Euclidean distance transform, and the alpha-clamped field whose
complement is the per-pixel collision potential.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .kernels import bilinear_sample
from .mask_geometry import SegMask

# RGB endpoints of the heatmap colormap: 0 -> blue, field maximum -> red
HEATMAP_LOW = (0, 0, 255)
HEATMAP_HIGH = (255, 0, 0)


@dataclass(frozen=True)
class ObstacleBoundarySet:
    """Integer pixel coordinates ``(u, v)`` stored as an (n, 2) array, sorted."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64).reshape(-1, 2)
        pts = np.unique(pts, axis=0) if len(pts) else pts
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def as_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.points}

    def union(self, other: "ObstacleBoundarySet") -> "ObstacleBoundarySet":
        return ObstacleBoundarySet(np.vstack([self.points, other.points]))

    def to_mask(self, width: int, height: int) -> np.ndarray:
        m = np.zeros((height, width), dtype=bool)
        if len(self.points):
            m[self.points[:, 1], self.points[:, 0]] = True
        return m

    @classmethod
    def from_mask(cls, m: np.ndarray) -> "ObstacleBoundarySet":
        v, u = np.nonzero(m)
        return cls(np.column_stack([u, v]))


@dataclass(frozen=True)
class DistanceField:
    values: np.ndarray  # (height, width), pixel units

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def d_max(self) -> float:
        return float(self.values.max())


@dataclass(frozen=True)
class SedfConfig:
    alpha: float = 0.25
    v_thres: float = 60.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.v_thres < 0:
            raise ValueError("v_thres must be non-negative")


def compute_edge_map(mask: SegMask) -> ObstacleBoundarySet:
    """Blocked pixels with at least one navigable 4-neighbour."""
    nav = mask.cells
    near = np.zeros_like(nav)
    near[1:, :] |= nav[:-1, :]
    near[:-1, :] |= nav[1:, :]
    near[:, 1:] |= nav[:, :-1]
    near[:, :-1] |= nav[:, 1:]
    return ObstacleBoundarySet.from_mask(~nav & near)


def filter_sob(edges: ObstacleBoundarySet, v_thres: float) -> ObstacleBoundarySet:
    """Strong obstacle boundaries: edge pixels strictly below row ``v_thres``."""
    v_thres = max(v_thres, 0)
    return ObstacleBoundarySet(edges.points[edges.points[:, 1] > v_thres])


def weak_boundaries(edges: ObstacleBoundarySet, v_thres: float) -> ObstacleBoundarySet:
    """Edge pixels that are not strong; identified but never costed."""
    v_thres = max(v_thres, 0)
    return ObstacleBoundarySet(edges.points[edges.points[:, 1] <= v_thres])


def empty_sentinel(width: int, height: int) -> float:
    return float(width + height)


def exact_edt_squared(omega: ObstacleBoundarySet, width: int, height: int) -> Optional[np.ndarray]:
    """Integer squared distance from every pixel to its nearest point of ``omega``.

    Returns ``None`` for an empty set. The nearest-point indices come from an
    exact (Maurer) transform; squared distances are then recomputed in
    integer arithmetic.
    """
    if len(omega) == 0:
        return None
    free = ~omega.to_mask(width, height)
    idx = ndimage.distance_transform_edt(free, return_distances=False, return_indices=True)
    vv, uu = np.indices((height, width))
    dv = vv - idx[0]
    du = uu - idx[1]
    return (du * du + dv * dv).astype(np.int64)


def exact_edt(omega: ObstacleBoundarySet, width: int, height: int) -> DistanceField:
    """Euclidean distance to the nearest boundary pixel.

    An empty boundary set yields the constant ``width + height``, larger than
    any distance achievable inside the image.
    """
    sq = exact_edt_squared(omega, width, height)
    if sq is None:
        return DistanceField(np.full((height, width), empty_sentinel(width, height)))
    return DistanceField(np.sqrt(sq.astype(float)))


def apply_scale(field: DistanceField, alpha: float) -> DistanceField:
    """Clamp the field at ``alpha * d_max``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return DistanceField(np.minimum(field.values, alpha * field.d_max))


def potential_field(sedf: DistanceField, alpha_dmax: float, literal: bool = False) -> np.ndarray:
    """Per-pixel collision cost.

    The default is ``alpha_dmax - E'``: largest on the boundary and zero where
    the clamp is active. ``literal=True`` returns ``E'`` itself, which rewards
    closeness to obstacles when minimised.
    """
    if literal:
        return sedf.values.copy()
    return np.maximum(alpha_dmax - sedf.values, 0.0)


def collision_potential(sedf: DistanceField, alpha_dmax: float, point, literal: bool = False) -> float:
    u, v = point
    if not (0 <= u <= sedf.width - 1 and 0 <= v <= sedf.height - 1):
        raise ValueError(f"point ({u}, {v}) outside the field")
    field = potential_field(sedf, alpha_dmax, literal)
    return float(bilinear_sample(field, np.array([u]), np.array([v]))[0])


def sedf_from_mask(mask: SegMask, cfg: SedfConfig):
    """Run edge -> SOB -> EDT -> clamp. Returns ``(omega, edf, sedf, alpha_dmax)``."""
    omega = filter_sob(compute_edge_map(mask), cfg.v_thres)
    edf = exact_edt(omega, mask.width, mask.height)
    return omega, edf, apply_scale(edf, cfg.alpha), cfg.alpha * edf.d_max


def heatmap_rgb(field: DistanceField) -> np.ndarray:
    """Blue-to-red colouring, linear in value from 0 to the field maximum."""
    vmax = field.d_max
    t = field.values / vmax if vmax > 0 else np.zeros_like(field.values)
    lo = np.array(HEATMAP_LOW, dtype=float)
    hi = np.array(HEATMAP_HIGH, dtype=float)
    rgb = lo + t[..., None] * (hi - lo)
    return np.round(rgb).astype(np.uint8)
