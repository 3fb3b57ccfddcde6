"""Point containers, exact nearest-neighbor search, and downsampling.

All containers are immutable after construction (the backing arrays are
marked read-only) and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, InsufficientPoints, InvalidTarget

#: roles a 2D point set can play in the pipeline
POINTSET2_ROLES = ("edge-map", "projection", "hull")

_NN_CHUNK = 512  # queries per block in batched nearest-neighbor scans


def _require_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} must be finite (no NaN/Inf)")


@dataclass(frozen=True)
class Point3:
    """A single 3D point, camera-frame meters."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        _require_finite(np.array([self.x, self.y, self.z]), "Point3 coordinates")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)


@dataclass(frozen=True)
class Point2:
    """A single 2D pixel-coordinate point (u rightward, v downward)."""

    u: float
    v: float

    def __post_init__(self):
        _require_finite(np.array([self.u, self.v]), "Point2 coordinates")

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v], dtype=np.float64)


class PointCloud3:
    """Immutable ordered collection of 3D points."""

    def __init__(self, points):
        arr = np.array(points, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError("expected an (N, 3) array of 3D points")
        if arr.shape[0] < 1:
            raise ValueError("point cloud must contain at least one point")
        _require_finite(arr, "point cloud coordinates")
        arr.setflags(write=False)
        self._points = arr

    @property
    def points(self) -> np.ndarray:
        """Read-only (N, 3) float64 view of the coordinates."""
        return self._points

    def __len__(self) -> int:
        return self._points.shape[0]

    def point(self, i: int) -> Point3:
        x, y, z = self._points[i]
        return Point3(float(x), float(y), float(z))

    def __repr__(self) -> str:
        return f"PointCloud3({len(self)} points)"


class PointSet2:
    """Immutable 2D point set tagged with its pipeline role.

    May be empty (an edge detector can legitimately find nothing); callers
    that need points enforce their own minimum counts.
    """

    def __init__(self, points, role: str):
        if role not in POINTSET2_ROLES:
            raise ValueError(f"role must be one of {POINTSET2_ROLES}, got {role!r}")
        arr = np.array(points, dtype=np.float64, copy=True).reshape(-1, 2)
        _require_finite(arr, "2D point coordinates")
        arr.setflags(write=False)
        self._points = arr
        self._role = role

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def role(self) -> str:
        return self._role

    def __len__(self) -> int:
        return self._points.shape[0]

    def point(self, i: int) -> Point2:
        u, v = self._points[i]
        return Point2(float(u), float(v))

    def deduplicated(self, tol: float = 1e-9):
        """Drop points within `tol` of an earlier point (grid snap).

        Returns (deduped set, kept indices into this set).
        """
        keep = dedupe_rows(self._points, tol)
        return PointSet2(self._points[keep], self._role), keep

    def __repr__(self) -> str:
        return f"PointSet2({len(self)} points, role={self._role!r})"


def dedupe_rows(arr: np.ndarray, tol: float) -> np.ndarray:
    """Indices (ascending) of first representatives of near-duplicate rows.

    Rows are snapped to a grid of pitch `tol`; rows sharing a grid cell are
    considered duplicates and the lowest index wins.
    """
    if arr.shape[0] == 0:
        return np.arange(0, dtype=np.intp)
    keys = np.round(arr / tol).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    return np.sort(first)


def as_point_array(points, dim: int | None = None) -> np.ndarray:
    """Coerce a container or array-like to an (N, D) float64 array."""
    if isinstance(points, PointCloud3) or isinstance(points, PointSet2):
        arr = points.points
    else:
        arr = np.asarray(points, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("expected a 2D array of points")
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got {arr.shape[1]}")
    return arr


class SpatialIndex:
    """Exact nearest-neighbor index over an immutable point snapshot.

    Implemented as a vectorized flat scan rather than a kd-tree: at the
    point counts this toolkit handles (<= a few tens of thousands) the flat
    scan is fast enough, and it makes the contract trivial to guarantee --
    results, including the lowest-index tie rule, are bit-identical to an
    exhaustive linear scan because it *is* one.
    """

    @staticmethod
    def _sq_dists(pts: np.ndarray, q: np.ndarray) -> np.ndarray:
        # per-coordinate accumulation: the exact IEEE operation sequence of a
        # scalar left-fold scan (vectorized reductions may reassociate)
        d = pts[..., 0] - q[..., 0]
        d2 = d * d
        for axis in range(1, pts.shape[-1]):
            d = pts[..., axis] - q[..., axis]
            d2 = d2 + d * d
        return d2

    def __init__(self, points):
        arr = as_point_array(points)
        if arr.shape[0] < 1:
            raise EmptyInput("cannot index an empty point set")
        _require_finite(arr, "indexed point coordinates")
        arr = arr.copy()
        arr.setflags(write=False)
        self._points = arr

    @property
    def count(self) -> int:
        return self._points.shape[0]

    @property
    def dim(self) -> int:
        return self._points.shape[1]

    def knn(self, query, k: int) -> list[tuple[int, float]]:
        """k nearest neighbors of `query`, ascending by distance.

        Exact ties are broken by the lowest point index.
        """
        if k < 1:
            raise InsufficientPoints("k must be at least 1")
        if k > self.count:
            raise InsufficientPoints(f"k={k} exceeds point count {self.count}")
        q = np.asarray(query, dtype=np.float64).reshape(self.dim)
        d2 = self._sq_dists(self._points, q)
        order = np.lexsort((np.arange(self.count), d2))[:k]
        return [(int(i), float(np.sqrt(d2[i]))) for i in order]

    def nearest(self, query) -> tuple[int, float]:
        """Single nearest neighbor (index, distance), lowest index on ties."""
        return self.knn(query, 1)[0]

    def knn_batch(self, queries, k: int) -> tuple[np.ndarray, np.ndarray]:
        """k nearest neighbors for each query row.

        Returns (indices (M, k), squared distances (M, k)), each row sorted
        ascending with ties broken by lowest index (stable argsort).
        """
        if k < 1:
            raise InsufficientPoints("k must be at least 1")
        if k > self.count:
            raise InsufficientPoints(f"k={k} exceeds point count {self.count}")
        Q = as_point_array(queries, self.dim)
        idx = np.empty((Q.shape[0], k), dtype=np.intp)
        sqd = np.empty((Q.shape[0], k), dtype=np.float64)
        for lo in range(0, Q.shape[0], _NN_CHUNK):
            block = Q[lo:lo + _NN_CHUNK]
            d2 = self._sq_dists(self._points[None, :, :], block[:, None, :])
            order = np.argsort(d2, axis=1, kind="stable")[:, :k]
            idx[lo:lo + block.shape[0]] = order
            sqd[lo:lo + block.shape[0]] = np.take_along_axis(d2, order, axis=1)
        return idx, sqd

    def nearest_batch(self, queries) -> tuple[np.ndarray, np.ndarray]:
        """Nearest neighbor for each query row.

        Returns (indices, squared distances). np.argmin returns the first
        minimum, so ties break to the lowest index exactly as `nearest`.
        """
        Q = as_point_array(queries, self.dim)
        idx = np.empty(Q.shape[0], dtype=np.intp)
        sqd = np.empty(Q.shape[0], dtype=np.float64)
        for lo in range(0, Q.shape[0], _NN_CHUNK):
            block = Q[lo:lo + _NN_CHUNK]
            d2 = self._sq_dists(self._points[None, :, :], block[:, None, :])
            j = np.argmin(d2, axis=1)
            idx[lo:lo + block.shape[0]] = j
            sqd[lo:lo + block.shape[0]] = d2[np.arange(block.shape[0]), j]
        return idx, sqd


def build_index(points) -> SpatialIndex:
    """Build an immutable exact nearest-neighbor index."""
    return SpatialIndex(points)


def knn(index: SpatialIndex, query, k: int) -> list[tuple[int, float]]:
    """k nearest neighbors from a prebuilt index (see SpatialIndex.knn)."""
    return index.knn(query, k)


def _voxel_bin_count(pts: np.ndarray, origin: np.ndarray, edge: float) -> int:
    keys = np.floor((pts - origin) / edge).astype(np.int64)
    return np.unique(keys, axis=0).shape[0]


def _voxel_centroids(pts: np.ndarray, origin: np.ndarray, edge: float) -> np.ndarray:
    """Centroid of each occupied voxel, ordered by voxel key."""
    keys = np.floor((pts - origin) / edge).astype(np.int64)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    sums = np.zeros((uniq.shape[0], pts.shape[1]))
    np.add.at(sums, inverse, pts)
    counts = np.bincount(inverse, minlength=uniq.shape[0]).astype(np.float64)
    return sums / counts[:, None]


def farthest_point_select(pts: np.ndarray, m: int) -> np.ndarray:
    """Indices of m points chosen by farthest-point (max-min) selection.

    Deterministic: starts from the point farthest from the mean and breaks
    ties by lowest index (np.argmax returns the first maximum).
    """
    d0 = np.sum((pts - pts.mean(axis=0)) ** 2, axis=1)
    chosen = [int(np.argmax(d0))]
    dmin = np.sum((pts - pts[chosen[0]]) ** 2, axis=1)
    while len(chosen) < m:
        nxt = int(np.argmax(dmin))
        chosen.append(nxt)
        dmin = np.minimum(dmin, np.sum((pts - pts[nxt]) ** 2, axis=1))
    return np.array(chosen, dtype=np.intp)


def binned_centroids(pts: np.ndarray, target: int) -> tuple[np.ndarray, float]:
    """Voxel-bin a point array so that at least `target` bins are occupied.

    Bisects the voxel edge length until the occupied-bin count brackets the
    target as tightly as the bisection resolves, then returns the centroids
    of the occupied bins and the edge length used.  When the input has fewer
    than `target` distinct rows no edge length can reach the target; the
    distinct rows themselves are returned.
    """
    origin = pts.min(axis=0)
    extent = pts.max(axis=0) - origin

    # smallest separating edge: below the smallest positive per-axis gap,
    # every pair of distinct rows lands in different bins
    gaps = []
    for d in range(pts.shape[1]):
        diffs = np.diff(np.sort(pts[:, d]))
        diffs = diffs[diffs > 0]
        if diffs.size:
            gaps.append(diffs.min())
    if not gaps:  # all rows identical
        return pts[:1].copy(), 1.0
    lo = min(gaps) / 2.0
    hi = float(np.linalg.norm(extent)) + lo

    if _voxel_bin_count(pts, origin, lo) < target:
        # fewer distinct rows than requested; return what exists
        return _voxel_centroids(pts, origin, lo), lo

    for _ in range(64):
        mid = 0.5 * (lo + hi)
        if _voxel_bin_count(pts, origin, mid) >= target:
            lo = mid
        else:
            hi = mid
    return _voxel_centroids(pts, origin, lo), lo


def bin_downsample(cloud: PointCloud3, target_count: int) -> PointCloud3:
    """Downsample a cloud to exactly `target_count` voxel-bin centroids.

    Voxel edge length is bisected until the occupied bins bracket the
    target, then farthest-point selection among the bin centroids hits the
    count exactly.  Asking for the input size returns the input unchanged.
    """
    if target_count <= 0:
        raise InvalidTarget("target_count must be positive")
    n = len(cloud)
    if target_count > n:
        raise InvalidTarget(f"target_count {target_count} exceeds cloud size {n}")
    if target_count == n:
        return cloud

    centroids, _ = binned_centroids(cloud.points, target_count)
    m = min(target_count, centroids.shape[0])
    out = centroids[farthest_point_select(centroids, m)]
    if out.shape[0] < target_count:
        # degenerate duplicate-heavy cloud: cycle selected centroids
        reps = -(-target_count // out.shape[0])
        out = np.tile(out, (reps, 1))[:target_count]
    return PointCloud3(out)


def normalize_to_unit(cloud: PointCloud3) -> tuple[PointCloud3, float, Point3]:
    """Center a cloud on its bounding-box midpoint and scale to unit size.

    Returns (normalized cloud, scale, offset) with max |coordinate| == 1
    after the transform; `denormalize` inverts it exactly up to float
    rounding.  A zero-extent cloud keeps scale 1.
    """
    pts = cloud.points
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    offset = 0.5 * (lo + hi)
    scale = float(np.max(np.abs(pts - offset)))
    if scale == 0.0:
        scale = 1.0
    out = PointCloud3((pts - offset) / scale)
    return out, scale, Point3(float(offset[0]), float(offset[1]), float(offset[2]))


def denormalize(cloud: PointCloud3, scale: float, offset: Point3) -> PointCloud3:
    """Invert `normalize_to_unit`."""
    return PointCloud3(cloud.points * scale + offset.as_array())
