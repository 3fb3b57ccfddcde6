"""Deterministic cloud densification by iterative kNN-midpoint interpolation.

Each round emits the midpoints between every point and its nearest
neighbors, deduplicates, and repeats until the pool is large enough; the
generated points are then voxel-downsampled so the output hits exactly
rate * input_count while every original point is passed through untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooFewPoints
from .geometry import PointCloud3, SpatialIndex, bin_downsample, dedupe_rows


@dataclass(frozen=True)
class DensifyConfig:
    """Upsampling rate, neighbors interpolated per point, and the merge
    tolerance for coincident midpoints."""

    rate: int = 4
    k_interp: int = 4
    dedupe_eps: float = 1e-9

    def __post_init__(self):
        if self.rate < 2:
            raise ValueError("rate must be at least 2")
        if self.k_interp < 2:
            raise ValueError("k_interp must be at least 2")
        if not self.dedupe_eps > 0:
            raise ValueError("dedupe_eps must be positive")


def _midpoint_round(pts: np.ndarray, k_interp: int) -> np.ndarray:
    """Midpoints between each point and its k nearest neighbors (self
    excluded).  Pair duplicates collapse later: (a+b)/2 == (b+a)/2 exactly."""
    n = pts.shape[0]
    k = min(k_interp + 1, n)  # +1: the nearest neighbor of a point is itself
    nbrs, _ = SpatialIndex(pts).knn_batch(pts, k)
    rows = np.repeat(np.arange(n), k)
    cols = nbrs.ravel()
    mask = rows != cols
    return 0.5 * (pts[rows[mask]] + pts[cols[mask]])


def densify(cloud: PointCloud3, cfg: DensifyConfig = DensifyConfig()) -> PointCloud3:
    """Upsample a cloud to exactly cfg.rate * len(cloud) points.

    The output is a superset of the input; generated points are midpoints
    (and voxel centroids of midpoints), so they stay inside the input's
    convex hull.  Fully deterministic.
    """
    n_in = len(cloud)
    if n_in < 2:
        raise TooFewPoints("densification needs at least 2 points")
    target = cfg.rate * n_in
    originals = cloud.points

    # the working pool starts from the deduped originals; all originals are
    # reinstated verbatim at the end regardless
    keep = dedupe_rows(originals, cfg.dedupe_eps)
    pool = originals[keep]
    n_base = pool.shape[0]
    while pool.shape[0] - n_base < target - n_in:
        mids = _midpoint_round(pool, cfg.k_interp)
        grown = np.vstack([pool, mids])
        grown = grown[dedupe_rows(grown, cfg.dedupe_eps)]
        if grown.shape[0] == pool.shape[0]:
            break  # degenerate cloud stopped producing new points
        pool = grown

    generated = pool[n_base:]
    extra = target - n_in
    if generated.shape[0] > extra:
        generated = bin_downsample(PointCloud3(generated), extra).points
    elif generated.shape[0] < extra:
        # degenerate duplicate-heavy input: cycle what exists
        base = generated if generated.shape[0] else pool
        reps = -(-extra // base.shape[0])
        generated = np.tile(base, (reps, 1))[:extra]
    return PointCloud3(np.vstack([originals, generated]))
