"""k-nearest-neighbor concave hull of a projected 2D point set.

The boundary walk starts at the lowest-v point and repeatedly picks, among
the k nearest unused points ordered by largest right-hand turn from the
previous edge, the first whose new edge crosses no existing hull edge.  If
the walk cannot close, or the closed polygon is not simple, or some input
point falls outside, the neighbor count is increased and the walk retried.
At k = count-1 the walk degenerates to gift wrapping, so the convex hull is
the terminal fallback and failure is unreachable for non-collinear input.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateCollinear, HullFailed, TooFewPoints
from .geometry import as_point_array, dedupe_rows

_DEDUPE_TOL = 1e-9
_ON_EDGE_TOL = 1e-9


class HullPolygon:
    """Ordered simple closed polygon over projected points.

    Vertices are counter-clockwise (positive shoelace area in (u, v));
    closure back to the first vertex is implicit.  Each vertex carries the
    index of its source 3D point so gradients can be routed back.
    """

    def __init__(self, vertices, source_indices, k_used: int):
        verts = np.array(vertices, dtype=np.float64, copy=True).reshape(-1, 2)
        if verts.shape[0] < 3:
            raise ValueError("a polygon needs at least 3 vertices")
        if not np.all(np.isfinite(verts)):
            raise ValueError("polygon vertices must be finite")
        src = np.array(source_indices, dtype=np.intp, copy=True)
        if src.shape != (verts.shape[0],):
            raise ValueError("need one source index per vertex")
        if np.unique(src).size != src.size:
            raise ValueError("source indices must be distinct")
        verts.setflags(write=False)
        src.setflags(write=False)
        self._verts = verts
        self._src = src
        self.k_used = int(k_used)

    @property
    def vertices(self) -> np.ndarray:
        return self._verts

    @property
    def source_indices(self) -> np.ndarray:
        return self._src

    def __len__(self) -> int:
        return self._verts.shape[0]

    def with_vertices(self, vertices) -> "HullPolygon":
        """Same membership and order, new vertex coordinates (used while the
        3D points behind a frozen hull move during refinement)."""
        return HullPolygon(vertices, self._src, self.k_used)

    def __repr__(self) -> str:
        return f"HullPolygon({len(self)} vertices, k_used={self.k_used})"


def _signed_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _orient(a, b, c):
    """Orientation cross product (b-a) x (c-a); vectorized over c."""
    return (b[0] - a[0]) * (c[..., 1] - a[1]) - (b[1] - a[1]) * (c[..., 0] - a[0])


def _crosses_any(p, q, e0: np.ndarray, e1: np.ndarray) -> bool:
    """True if open segment p-q properly crosses any segment e0[i]-e1[i].

    Shared endpoints do not count (an orientation is zero there), which is
    exactly what the walk needs when testing against adjacent hull edges.
    """
    if e0.shape[0] == 0:
        return False
    d1 = _orient(p, q, e0)
    d2 = _orient(p, q, e1)
    d3 = (e1[:, 0] - e0[:, 0]) * (p[1] - e0[:, 1]) - (e1[:, 1] - e0[:, 1]) * (
        p[0] - e0[:, 0]
    )
    d4 = (e1[:, 0] - e0[:, 0]) * (q[1] - e0[:, 1]) - (e1[:, 1] - e0[:, 1]) * (
        q[0] - e0[:, 0]
    )
    return bool(np.any((d1 * d2 < 0) & (d3 * d4 < 0)))


def _segments_intersect(p1, p2, p3, p4) -> bool:
    """Full segment intersection test, including collinear overlap and
    endpoint touching."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_segment(a, b, c):
        return (
            min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])
        )

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and on_segment(p3, p4, p1):
        return True
    if d2 == 0 and on_segment(p3, p4, p2):
        return True
    if d3 == 0 and on_segment(p1, p2, p3):
        return True
    if d4 == 0 and on_segment(p1, p2, p4):
        return True
    return False


def polygon_is_simple(poly: HullPolygon) -> bool:
    """True iff no pair of non-adjacent edges intersects (touching counts)."""
    verts = poly.vertices
    n = verts.shape[0]
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # adjacent edges share an endpoint legitimately
            c, d = verts[j], verts[(j + 1) % n]
            if _segments_intersect(a, b, c, d):
                return False
    return True


def _points_in_polygon(verts: np.ndarray, pts: np.ndarray,
                       tol: float = _ON_EDGE_TOL) -> np.ndarray:
    """Inside-or-on test for each point (ray casting + on-edge tolerance)."""
    n = verts.shape[0]
    px, py = pts[:, 0], pts[:, 1]
    inside = np.zeros(pts.shape[0], dtype=bool)
    on_edge = np.zeros(pts.shape[0], dtype=bool)
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        # distance from each point to this segment
        ex, ey = x2 - x1, y2 - y1
        seg_len2 = ex * ex + ey * ey
        if seg_len2 == 0.0:
            d2 = (px - x1) ** 2 + (py - y1) ** 2
        else:
            t = np.clip(((px - x1) * ex + (py - y1) * ey) / seg_len2, 0.0, 1.0)
            d2 = (px - (x1 + t * ex)) ** 2 + (py - (y1 + t * ey)) ** 2
        on_edge |= d2 <= tol * tol
        # standard crossing-number rule
        crosses = (y1 > py) != (y2 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (py - y1) * ex / (ey if ey != 0 else np.inf)
        inside ^= crosses & (px < xint)
    return inside | on_edge


def contains_all(poly: HullPolygon, points) -> bool:
    """True iff every point lies inside or on the polygon."""
    pts = as_point_array(points, 2)
    if pts.shape[0] == 0:
        return True
    return bool(np.all(_points_in_polygon(poly.vertices, pts)))


def _monotone_chain(pts: np.ndarray) -> list[int]:
    """Convex hull indices, CCW, keeping collinear boundary points."""
    order = sorted(range(pts.shape[0]), key=lambda i: (pts[i, 0], pts[i, 1]))

    def cross(o, a, b):
        return (pts[a, 0] - pts[o, 0]) * (pts[b, 1] - pts[o, 1]) - (
            pts[a, 1] - pts[o, 1]
        ) * (pts[b, 0] - pts[o, 0])

    lower: list[int] = []
    for i in order:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], i) < 0:
            lower.pop()
        lower.append(i)
    upper: list[int] = []
    for i in reversed(order):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], i) < 0:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def _walk(pts: np.ndarray, kk: int) -> list[int] | None:
    """One Moreira-Santos boundary walk; None when it cannot close."""
    n = pts.shape[0]
    start = int(np.lexsort((pts[:, 0], pts[:, 1]))[0])  # lowest v, then u
    hull = [start]
    used = np.zeros(n, dtype=bool)
    used[start] = True
    cur = start
    prev_angle = np.pi

    for _ in range(2 * n + 4):
        if len(hull) == 4:
            used[start] = False  # start point may close the hull from now on

        d = pts - pts[cur]
        d2 = d[:, 0] ** 2 + d[:, 1] ** 2
        d2[used] = np.inf
        d2[cur] = np.inf
        avail = int(np.sum(np.isfinite(d2)))
        if avail == 0:
            return None
        cand = np.lexsort((np.arange(n), d2))[: min(kk, avail)]

        # largest right-hand turn first: ascending clockwise angle from the
        # reversed previous edge direction
        angles = np.arctan2(pts[cand, 1] - pts[cur, 1], pts[cand, 0] - pts[cur, 0])
        diff = np.mod(prev_angle - angles, 2.0 * np.pi)
        cand = cand[np.argsort(diff, kind="stable")]

        e0 = pts[hull[:-1]]
        e1 = pts[hull[1:]]
        nxt = -1
        for c in cand:
            if not _crosses_any(pts[cur], pts[c], e0, e1):
                nxt = int(c)
                break
        if nxt < 0:
            return None
        if nxt == start:
            return hull
        hull.append(nxt)
        used[nxt] = True
        prev_angle = float(
            np.arctan2(pts[cur, 1] - pts[nxt, 1], pts[cur, 0] - pts[nxt, 0])
        )
        cur = nxt
    return None


def _oriented_ccw(order: list[int], pts: np.ndarray) -> list[int]:
    if _signed_area(pts[order]) < 0:
        order = [order[0]] + order[1:][::-1]
    return order


def concave_hull(points, index_map=None, k: int = 20) -> HullPolygon:
    """Concave hull of a 2D point set with 3D source back-references.

    `index_map[i]` is the 3D source index of input point i (identity when
    omitted).  `k` is the starting neighbor count; it escalates on failure.
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    raw = as_point_array(points, 2)
    if index_map is None:
        index_map = np.arange(raw.shape[0], dtype=np.intp)
    else:
        index_map = np.asarray(index_map, dtype=np.intp)
        if index_map.shape != (raw.shape[0],):
            raise ValueError("index_map must map every input point")

    keep = dedupe_rows(raw, _DEDUPE_TOL)
    pts = raw[keep]
    sources = index_map[keep]
    n = pts.shape[0]
    if n < 3:
        raise TooFewPoints(f"need at least 3 distinct points, got {n}")
    if np.all(_orient(pts[0], pts[1], pts) == 0.0):
        raise DegenerateCollinear("all points are collinear")

    if n == 3:
        order = _oriented_ccw([0, 1, 2], pts)
        return HullPolygon(pts[order], sources[order], min(k, n - 1))

    for kk in range(min(k, n - 1), n):
        order = _walk(pts, kk)
        if order is None:
            continue
        order = _oriented_ccw(order, pts)
        poly = HullPolygon(pts[order], sources[order], kk)
        if polygon_is_simple(poly) and contains_all(poly, pts):
            return poly

    # terminal fallback: the convex hull is the k -> count-1 limit and always
    # satisfies the contract for non-collinear input
    order = _monotone_chain(pts)
    if len(order) >= 3:
        order = _oriented_ccw(order, pts)
        return HullPolygon(pts[order], sources[order], n - 1)
    raise HullFailed("no neighbor count produced a valid hull")
