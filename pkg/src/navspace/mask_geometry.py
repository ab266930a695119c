"""Binary navigability masks and their polyline representation.

Coordinates are ``(u, v)``: ``u`` is the column, ``v`` the row, both in pixel
units with pixel ``(u, v)`` sampled at the integer point ``(u, v)``. The
navigable region is assumed to sit at the bottom of the image, bounded above
by a function-shaped boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .delaunay import TriangleSet, delaunay_triangulate
from .io import parse_pgm, encode_pgm, read_pgm, write_pgm

GEOM_EPS = 1e-9
DEFAULT_VERTEX_COUNT = 16


class InsufficientSupportError(ValueError):
    pass


@dataclass(frozen=True)
class SegMask:
    """H x W boolean grid, True = navigable."""

    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells).astype(bool)
        if cells.ndim != 2 or cells.shape[0] < 2 or cells.shape[1] < 2:
            raise ValueError(f"mask must be at least 2x2, got shape {cells.shape}")
        object.__setattr__(self, "cells", cells)

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @classmethod
    def full(cls, width: int, height: int, navigable: bool) -> "SegMask":
        return cls(np.full((height, width), navigable, dtype=bool))

    @classmethod
    def from_pgm_bytes(cls, data: bytes) -> "SegMask":
        return cls(parse_pgm(data) > 0)

    @classmethod
    def read_pgm(cls, path) -> "SegMask":
        return cls(read_pgm(path) > 0)

    def to_pgm_bytes(self) -> bytes:
        return encode_pgm(self.cells.astype(np.uint8) * 255)

    def write_pgm(self, path) -> None:
        write_pgm(path, self.cells.astype(np.uint8) * 255)

    def __eq__(self, other):
        return isinstance(other, SegMask) and np.array_equal(self.cells, other.cells)

    def __hash__(self):
        return hash(self.cells.tobytes())


@dataclass(frozen=True)
class BoundaryFunction:
    values: np.ndarray  # per-column row index, int
    valid: np.ndarray  # per-column bool
    height: int

    @property
    def width(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Polyline:
    vertices: np.ndarray  # (k, 2) columns u, v

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=float).reshape(-1, 2))

    def __len__(self):
        return len(self.vertices)

    def validate(self, width: int, height: int) -> None:
        u, v = self.vertices[:, 0], self.vertices[:, 1]
        if np.any(np.diff(u) <= 0):
            raise ValueError("polyline vertices must be strictly increasing in u")
        if np.any(u < 0) or np.any(u >= width) or np.any(v < 0) or np.any(v >= height):
            raise ValueError("polyline vertex outside the image")


@dataclass(frozen=True)
class AugmentedPoints:
    """Polyline vertices followed by the bottom-border anchors."""

    points: np.ndarray
    is_anchor: np.ndarray


def extract_boundary(mask: SegMask) -> BoundaryFunction:
    """Top row of the bottom-connected navigable run in every column.

    Columns whose bottom pixel is blocked have no such run; they are marked
    invalid with value ``height``.
    """
    h = mask.height
    run = np.cumprod(mask.cells[::-1], axis=0).sum(axis=0)
    values = (h - run).astype(np.int64)
    return BoundaryFunction(values=values, valid=run > 0, height=h)


def sample_vertices(boundary: BoundaryFunction, k: int = DEFAULT_VERTEX_COUNT) -> Polyline:
    """Pick ``k`` boundary columns evenly spread over the valid span.

    Target positions are rounded to whole columns, then snapped to the
    nearest valid column that keeps the sequence strictly increasing, so every
    vertex carries an exact boundary row.
    """
    if k < 2:
        raise ValueError("need at least two vertices")
    cols = np.flatnonzero(boundary.valid)
    if len(cols) < k:
        raise InsufficientSupportError(
            f"insufficient boundary support: {len(cols)} valid columns for {k} vertices")
    targets = np.linspace(cols[0], cols[-1], k)
    picked = []
    lo = 0  # index into cols of the first still-unused candidate
    for i, t in enumerate(targets):
        hi = len(cols) - (k - i)  # leave room for the remaining vertices
        j = int(np.clip(np.searchsorted(cols, t), lo, hi))
        if j > lo and abs(cols[j - 1] - t) <= abs(cols[j] - t):
            j -= 1
        picked.append(cols[j])
        lo = j + 1
    u = np.array(picked, dtype=float)
    return Polyline(np.column_stack([u, boundary.values[picked].astype(float)]))


def bottom_anchors(width: int, height: int) -> np.ndarray:
    b = height - 1.0
    return np.array([[0.0, b], [(width - 1) / 2.0, b], [width - 1.0, b]])


def augment_with_anchors(polyline: Polyline, width: int, height: int) -> AugmentedPoints:
    """Append the two bottom corners and the bottom midpoint.

    An anchor that coincides with a polyline vertex is emitted once, as the
    vertex.
    """
    verts = polyline.vertices
    extra = [a for a in bottom_anchors(width, height)
             if not np.any(np.all(verts == a, axis=1))]
    pts = np.vstack([verts] + [np.array(extra).reshape(-1, 2)])
    flags = np.zeros(len(pts), dtype=bool)
    flags[len(verts):] = True
    return AugmentedPoints(pts, flags)


def _column_extent(tri: np.ndarray, u: float, eps: float) -> Optional[tuple[float, float]]:
    """Row interval covered by the closed triangle on the vertical line at ``u``."""
    vs = []
    for i in range(3):
        (u0, v0), (u1, v1) = tri[i], tri[(i + 1) % 3]
        lo, hi = min(u0, u1), max(u0, u1)
        if u < lo - eps or u > hi + eps:
            continue
        if hi - lo <= eps:
            vs.extend((v0, v1))
        else:
            t = min(max((u - u0) / (u1 - u0), 0.0), 1.0)
            vs.append(v0 + t * (v1 - v0))
    if not vs:
        return None
    return min(vs), max(vs)


def _drop_hits(tri: np.ndarray, source: np.ndarray, bottom: float, eps: float) -> bool:
    u, v = source
    ext = _column_extent(tri, u, eps)
    if ext is None:
        return False
    vmin, vmax = ext
    if v >= bottom - eps:
        # zero-length drop: any contact with the source point
        return vmin <= v + eps and vmax >= v - eps
    # positive drop: a contact below the source vertex itself is required
    return vmax > v + eps and vmin <= bottom + eps


def select_triangles(tris: TriangleSet, polyline: Polyline, height: int,
                     eps: float = GEOM_EPS) -> TriangleSet:
    """Keep the triangles that lie under the boundary.

    Each polyline vertex drops a vertical segment to the bottom row, and so
    does every other triangulation point (the bottom anchors). A triangle is
    kept when some drop segment passes into it below the segment's own source
    vertex. Points already on the bottom row have zero-length drops, which
    count on any contact. Grazing contact at a drop's
    source vertex alone does not keep a triangle; that contact is exactly how
    triangles spanning a boundary notch from above touch the drops.
    """
    bottom = height - 1.0
    sources = np.unique(np.vstack([polyline.vertices, tris.points]), axis=0)
    corners = tris.vertices()
    keep = np.zeros(len(tris), dtype=bool)
    for t, tri in enumerate(corners):
        umin, umax = tri[:, 0].min() - eps, tri[:, 0].max() + eps
        for s in sources:
            if umin <= s[0] <= umax and _drop_hits(tri, s, bottom, eps):
                keep[t] = True
                break
    return tris.subset(keep)


def rasterize_triangles(tris: TriangleSet, width: int, height: int,
                        eps: float = GEOM_EPS) -> SegMask:
    """Pixel ``(u, v)`` is navigable iff the point ``(u, v)`` lies in a closed triangle."""
    cells = np.zeros((height, width), dtype=bool)
    for tri in tris.vertices():
        u0 = max(int(np.floor(tri[:, 0].min() - eps)), 0)
        u1 = min(int(np.ceil(tri[:, 0].max() + eps)), width - 1)
        v0 = max(int(np.floor(tri[:, 1].min() - eps)), 0)
        v1 = min(int(np.ceil(tri[:, 1].max() + eps)), height - 1)
        if u1 < u0 or v1 < v0:
            continue
        uu, vv = np.meshgrid(np.arange(u0, u1 + 1, dtype=float), np.arange(v0, v1 + 1, dtype=float))
        area = ((tri[1, 0] - tri[0, 0]) * (tri[2, 1] - tri[0, 1])
                - (tri[1, 1] - tri[0, 1]) * (tri[2, 0] - tri[0, 0]))
        if abs(area) <= eps:
            continue
        sign = 1.0 if area > 0 else -1.0
        inside = np.ones(uu.shape, dtype=bool)
        for i in range(3):
            (ax, ay), (bx, by) = tri[i], tri[(i + 1) % 3]
            edge = (bx - ax) * (vv - ay) - (by - ay) * (uu - ax)
            scale = np.hypot(bx - ax, by - ay)
            inside &= sign * edge >= -eps * max(scale, 1.0)
        cells[v0:v1 + 1, u0:u1 + 1] |= inside
    return SegMask(cells)


def reconstruct(mask: SegMask, k: int = DEFAULT_VERTEX_COUNT):
    """Full round trip: boundary, polyline, triangulation, selection, raster.

    Returns ``(polyline, all_triangles, kept_triangles, reconstructed_mask)``.
    """
    polyline = sample_vertices(extract_boundary(mask), k)
    aug = augment_with_anchors(polyline, mask.width, mask.height)
    # polyline segments are pinned so no triangle straddles the boundary
    k_poly = len(polyline)
    tris = delaunay_triangulate(aug.points, constraints=[(i, i + 1) for i in range(k_poly - 1)])
    kept = select_triangles(tris, polyline, mask.height)
    return polyline, tris, kept, rasterize_triangles(kept, mask.width, mask.height)


@dataclass(frozen=True)
class ConfusionCounts:
    n_tp: int
    n_tn: int
    n_fp: int
    n_fn: int

    @property
    def total(self) -> int:
        return self.n_tp + self.n_tn + self.n_fp + self.n_fn


@dataclass(frozen=True)
class SegmentationMetrics:
    """Accuracy, precision, recall, F-score, IoU. ``None`` marks an undefined ratio."""

    accuracy: Optional[float]
    precision: Optional[float]
    recall: Optional[float]
    f_score: Optional[float]
    iou: Optional[float]

    def as_tuple(self):
        return (self.accuracy, self.precision, self.recall, self.f_score, self.iou)


def confusion_counts(pred: SegMask, gt: SegMask) -> ConfusionCounts:
    if pred.cells.shape != gt.cells.shape:
        raise ValueError(f"mask shapes differ: {pred.cells.shape} vs {gt.cells.shape}")
    p, g = pred.cells, gt.cells
    return ConfusionCounts(int(np.sum(p & g)), int(np.sum(~p & ~g)),
                           int(np.sum(p & ~g)), int(np.sum(~p & g)))


def _ratio(num: int, den: int) -> Optional[float]:
    return None if den == 0 else num / den


def metrics_from_counts(c: ConfusionCounts) -> SegmentationMetrics:
    tp, tn, fp, fn = c.n_tp, c.n_tn, c.n_fp, c.n_fn
    return SegmentationMetrics(
        accuracy=_ratio(tp + tn, tp + tn + fp + fn),
        precision=_ratio(tp, tp + fp),
        recall=_ratio(tp, tp + fn),
        f_score=_ratio(2 * tp * tp, 2 * tp * tp + tp * (fp + fn)),
        iou=_ratio(tp, tp + fp + fn),
    )


def segmentation_metrics(pred: SegMask, gt: SegMask) -> SegmentationMetrics:
    return metrics_from_counts(confusion_counts(pred, gt))
