"""Planar Delaunay triangulation: sweep-hull seeding followed by Lawson edge flips.

Predicates are evaluated in floating point and re-evaluated exactly with
``fractions.Fraction`` when the result is too close to zero to trust, so
cocircular quads (common on pixel grids) cannot make the flip loop cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

INCIRCLE_TOL = 1e-9
_EPS = 2.0 ** -52


class DegenerateGeometryError(ValueError):
    pass


@dataclass(frozen=True)
class TriangleSet:
    """Vertex array ``points`` (n, 2) and index triples ``triangles`` (t, 3), CCW."""

    points: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        tris = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "triangles", tris)

    def __len__(self) -> int:
        return len(self.triangles)

    def vertices(self) -> np.ndarray:
        """Triangle corner coordinates, shape (t, 3, 2)."""
        return self.points[self.triangles]

    def subset(self, keep) -> "TriangleSet":
        return TriangleSet(self.points, self.triangles[np.asarray(keep, dtype=bool)])

    def signed_areas(self) -> np.ndarray:
        v = self.vertices()
        return 0.5 * ((v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
                      - (v[:, 1, 1] - v[:, 0, 1]) * (v[:, 2, 0] - v[:, 0, 0]))

    def validate(self) -> None:
        n = len(self.points)
        for t in self.triangles:
            if len(set(t.tolist())) != 3 or t.min() < 0 or t.max() >= n:
                raise ValueError(f"bad index triple {t.tolist()}")
        if len(self.triangles) and np.min(np.abs(self.signed_areas())) <= 1e-9:
            raise ValueError("degenerate triangle")


def orient(a, b, c) -> float:
    """Twice the signed area of (a, b, c); positive when counter-clockwise."""
    l = (b[0] - a[0]) * (c[1] - a[1])
    r = (b[1] - a[1]) * (c[0] - a[0])
    det = l - r
    if abs(det) > 8 * _EPS * (abs(l) + abs(r)):
        return det
    fa, fb, fc = ([Fraction(x) for x in p] for p in (a, b, c))
    return float((fb[0] - fa[0]) * (fc[1] - fa[1]) - (fb[1] - fa[1]) * (fc[0] - fa[0]))


def _incircle_terms(a, b, c, d):
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    return (alift * (bdx * cdy - cdx * bdy),
            blift * (cdx * ady - adx * cdy),
            clift * (adx * bdy - bdx * ady))


def incircle(a, b, c, d) -> float:
    """Positive when ``d`` lies strictly inside the circumcircle of CCW (a, b, c)."""
    terms = _incircle_terms(a, b, c, d)
    det = sum(terms)
    if abs(det) > 64 * _EPS * sum(abs(t) for t in terms):
        return det
    exact = _incircle_terms(*([Fraction(x) for x in p] for p in (a, b, c, d)))
    return float(sum(exact))


def _seed_triangulation(pts: list) -> list[list[int]]:
    order = sorted(range(len(pts)), key=lambda i: (pts[i][0], pts[i][1]))
    p0, p1 = order[0], order[1]
    k = 2
    while k < len(order) and orient(pts[p0], pts[p1], pts[order[k]]) == 0.0:
        k += 1
    if k == len(order):
        raise DegenerateGeometryError("degenerate point set")
    apex = order[k]
    chain = order[:k]
    tris = []
    left = orient(pts[chain[0]], pts[chain[-1]], pts[apex]) > 0
    for i in range(k - 1):
        a, b = chain[i], chain[i + 1]
        tris.append([a, b, apex] if left else [b, a, apex])
    hull = chain + [apex] if left else [chain[0], apex] + chain[:0:-1]

    for q in order[k + 1:]:
        n = len(hull)
        vis = [orient(pts[hull[i]], pts[hull[(i + 1) % n]], pts[q]) < 0 for i in range(n)]
        start = next(i for i in range(n) if vis[i] and not vis[i - 1])
        i = start
        while vis[i]:
            a, b = hull[i], hull[(i + 1) % n]
            tris.append([b, a, q])
            i = (i + 1) % n
        end = i  # hull[end] is the last vertex of the visible chain
        # keep hull[end] .. hull[start] (cyclically), then q
        kept = []
        j = end
        while True:
            kept.append(hull[j])
            if j == start:
                break
            j = (j + 1) % n
        hull = kept + [q]
    return tris


def _prefer_other_diagonal(a, b, c, d) -> bool:
    return min(c, d) < min(a, b)


def _key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


class _Mesh:
    """Triangles with a directed-edge index, supporting diagonal flips."""

    def __init__(self, pts: list, tris: list[list[int]]):
        self.pts = pts
        self.tris = tris
        self.owner: dict[tuple[int, int], int] = {}
        for t, (a, b, c) in enumerate(tris):
            self.owner[(a, b)] = t
            self.owner[(b, c)] = t
            self.owner[(c, a)] = t

    def interior_edges(self) -> list[tuple[int, int]]:
        return [e for e in self.owner if e[0] < e[1] and (e[1], e[0]) in self.owner]

    def quad(self, a: int, b: int):
        """Opposite vertices (c, d) of interior edge a-b, or None on the hull."""
        t1 = self.owner.get((a, b))
        t2 = self.owner.get((b, a))
        if t1 is None or t2 is None:
            return None
        c = next(x for x in self.tris[t1] if x != a and x != b)
        d = next(x for x in self.tris[t2] if x != a and x != b)
        return c, d

    def flippable(self, a: int, b: int, c: int, d: int) -> bool:
        p = self.pts
        return orient(p[d], p[b], p[c]) > 0 and orient(p[c], p[a], p[d]) > 0

    def flip(self, a: int, b: int, c: int, d: int) -> None:
        t1 = self.owner.pop((a, b))
        t2 = self.owner.pop((b, a))
        self.tris[t1] = [d, b, c]
        self.tris[t2] = [c, a, d]
        for e, t in (((d, b), t1), ((b, c), t1), ((c, d), t1),
                     ((c, a), t2), ((a, d), t2), ((d, c), t2)):
            self.owner[e] = t


def _legalize(mesh: _Mesh, tol: float, fixed: frozenset = frozenset()) -> None:
    pts = mesh.pts
    stack = [e for e in mesh.interior_edges() if e not in fixed]
    budget = 50 * len(pts) ** 2 + 1000
    while stack:
        a, b = stack.pop()
        if (a, b) in fixed:
            continue
        q = mesh.quad(a, b)
        if q is None:
            continue
        c, d = q
        det = incircle(pts[a], pts[b], pts[c], pts[d])
        flip = det > tol
        if not flip and abs(det) <= tol and _prefer_other_diagonal(a, b, c, d):
            # cocircular tie; the quad must be strictly convex to flip
            flip = mesh.flippable(a, b, c, d)
        if not flip:
            continue
        budget -= 1
        if budget < 0:
            raise RuntimeError("edge flipping did not converge")
        mesh.flip(a, b, c, d)
        for u, v in ((b, c), (c, a), (a, d), (d, b)):
            stack.append(_key(u, v))


def _split_constraint(pts: list, a: int, b: int) -> list[tuple[int, int]]:
    """Break segment a-b at input points lying strictly inside it."""
    pa, pb = pts[a], pts[b]
    inner = []
    for i, p in enumerate(pts):
        if i in (a, b) or orient(pa, pb, p) != 0.0:
            continue
        t = ((p[0] - pa[0]) * (pb[0] - pa[0]) + (p[1] - pa[1]) * (pb[1] - pa[1]))
        if 0 < t < (pb[0] - pa[0]) ** 2 + (pb[1] - pa[1]) ** 2:
            inner.append((t, i))
    chain = [a] + [i for _, i in sorted(inner)] + [b]
    return [_key(u, v) for u, v in zip(chain, chain[1:])]


def _crosses(pts: list, a: int, b: int, c: int, d: int) -> bool:
    pa, pb, pc, pd = pts[a], pts[b], pts[c], pts[d]
    return (orient(pa, pb, pc) * orient(pa, pb, pd) < 0
            and orient(pc, pd, pa) * orient(pc, pd, pb) < 0)


def _insert_constraint(mesh: _Mesh, a: int, b: int) -> None:
    while True:
        crossing = [(c, d) for c, d in mesh.interior_edges()
                    if len({a, b, c, d}) == 4 and _crosses(mesh.pts, a, b, c, d)]
        if not crossing:
            return
        for c, d in crossing:
            e, f = mesh.quad(c, d)
            if mesh.flippable(c, d, e, f):
                mesh.flip(c, d, e, f)
                break
        else:
            raise RuntimeError(f"could not recover constrained edge {a}-{b}")


def delaunay_triangulate(points, tol: float = INCIRCLE_TOL, constraints=()) -> TriangleSet:
    """Delaunay triangulation of a planar point set covering its convex hull.

    No input point lies strictly inside any output circumcircle (in-circle
    determinant above ``tol``). Cocircular quads take the diagonal that
    contains the lowest point index.

    ``constraints`` is an optional list of index pairs that must appear as
    edges; the result is then the constrained Delaunay triangulation, and the
    empty-circumcircle property holds only between mutually visible points.
    Constraint segments must not cross each other.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        raise DegenerateGeometryError("degenerate point set")
    if len(np.unique(pts, axis=0)) != len(pts):
        raise DegenerateGeometryError("degenerate point set: duplicate points")
    plist = [tuple(p) for p in pts.tolist()]
    mesh = _Mesh(plist, _seed_triangulation(plist))
    _legalize(mesh, tol)
    fixed = set()
    for a, b in constraints:
        for u, v in _split_constraint(plist, int(a), int(b)):
            _insert_constraint(mesh, u, v)
            fixed.add((u, v))
    if fixed:
        _legalize(mesh, tol, frozenset(fixed))
    return TriangleSet(pts, np.array(mesh.tris, dtype=np.int64))
